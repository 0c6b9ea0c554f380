#include "qpart/executor.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <random>

namespace qpart {

double DistState::norm_squared() const {
  double total = 0.0;
  for (const auto& b : blocks) total += b.squaredNorm();
  return total;
}

void InProcessTransport::send(int src, int dst, std::uint64_t tag, std::vector<Complex> data) {
  amplitudes_sent_ += data.size();
  const auto [it, inserted] = mailbox_.try_emplace({src, dst, tag}, std::move(data));
  if (!inserted) throw std::logic_error("duplicate message on one (src, dst, tag)");
}

std::vector<Complex> InProcessTransport::receive(int dst, int src, std::uint64_t tag) {
  const auto it = mailbox_.find({src, dst, tag});
  if (it == mailbox_.end()) {
    throw std::logic_error("rank " + std::to_string(dst) + " expected a message from rank " + std::to_string(src));
  }
  auto data = std::move(it->second);
  mailbox_.erase(it);
  return data;
}

OracleState oracle_simulate(const Circuit& circuit) {
  const int d = circuit.num_qubits;
  if (d > kMaxDenseQubits) {
    throw TooLarge("oracle simulation supports at most " + std::to_string(kMaxDenseQubits) + " qubits");
  }
  const std::uint64_t dim = std::uint64_t{1} << d;
  OracleState psi = OracleState::Zero(static_cast<Eigen::Index>(dim));
  psi(0) = 1.0;
  for (const auto& op : circuit.ops) {
    const auto g = gate_matrix(op.kind, op.params);
    const auto p = op.qubits.size();
    std::uint64_t mask = 0;
    for (int q : op.qubits) mask |= std::uint64_t{1} << (d - 1 - q);
    const std::uint64_t sub = std::uint64_t{1} << p;
    std::vector<std::uint64_t> idx(sub);
    Eigen::VectorXcd in(static_cast<Eigen::Index>(sub));
    for (std::uint64_t base = 0; base < dim; ++base) {
      if (base & mask) continue;
      for (std::uint64_t s = 0; s < sub; ++s) {
        std::uint64_t i = base;
        for (std::size_t k = 0; k < p; ++k) {
          if ((s >> (p - 1 - k)) & 1U) i |= std::uint64_t{1} << (d - 1 - op.qubits[k]);
        }
        idx[s] = i;
        in(static_cast<Eigen::Index>(s)) = psi(static_cast<Eigen::Index>(i));
      }
      const Eigen::VectorXcd out = g.matrix * in;
      for (std::uint64_t s = 0; s < sub; ++s) psi(static_cast<Eigen::Index>(idx[s])) = out(static_cast<Eigen::Index>(s));
    }
  }
  return psi;
}

namespace {

/// Physical index of dense basis state `x` under `layout`, and back.
std::uint64_t to_physical(std::uint64_t x, const Layout& layout) {
  const int d = layout.num_qubits;
  std::uint64_t p = 0;
  for (int q = 0; q < d; ++q) {
    p |= ((x >> (d - 1 - q)) & 1U) << layout.bit_of_qubit[static_cast<std::size_t>(q)];
  }
  return p;
}

std::uint64_t to_dense(std::uint64_t p, const Layout& layout) {
  const int d = layout.num_qubits;
  std::uint64_t x = 0;
  for (int q = 0; q < d; ++q) {
    x |= ((p >> layout.bit_of_qubit[static_cast<std::size_t>(q)]) & 1U) << (d - 1 - q);
  }
  return x;
}

}  // namespace

DistState scatter(const OracleState& state, const Layout& layout) {
  const std::uint64_t dim = std::uint64_t{1} << layout.num_qubits;
  if (static_cast<std::uint64_t>(state.size()) != dim) {
    throw DimensionMismatch("scatter: state has " + std::to_string(state.size()) + " amplitudes, layout expects " +
                            std::to_string(dim));
  }
  DistState s;
  s.num_qubits = layout.num_qubits;
  s.num_global = layout.num_global;
  s.layout = layout;
  const int local = layout.local_bits();
  const std::uint64_t block = std::uint64_t{1} << local;
  s.blocks.assign(std::size_t{1} << layout.num_global, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(block)));
  for (std::uint64_t x = 0; x < dim; ++x) {
    const std::uint64_t p = to_physical(x, layout);
    s.blocks[p >> local](static_cast<Eigen::Index>(p & (block - 1))) = state(static_cast<Eigen::Index>(x));
  }
  return s;
}

OracleState gather(const DistState& state) {
  const int local = state.layout.local_bits();
  const std::uint64_t block = std::uint64_t{1} << local;
  OracleState out(static_cast<Eigen::Index>(std::uint64_t{1} << state.num_qubits));
  for (std::size_t r = 0; r < state.blocks.size(); ++r) {
    for (std::uint64_t o = 0; o < block; ++o) {
      const std::uint64_t p = (static_cast<std::uint64_t>(r) << local) | o;
      out(static_cast<Eigen::Index>(to_dense(p, state.layout))) = state.blocks[r](static_cast<Eigen::Index>(o));
    }
  }
  return out;
}

double compare(const OracleState& a, const OracleState& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("compare: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                            " amplitudes");
  }
  if (a.size() == 0) return 0.0;
  Eigen::Index k = 0;
  a.cwiseAbs().maxCoeff(&k);
  Complex phi = 1.0;
  if (std::abs(a(k)) > 0.0 && std::abs(b(k)) > 0.0) {
    phi = (a(k) / std::abs(a(k))) / (b(k) / std::abs(b(k)));
  }
  return (a - phi * b).cwiseAbs().maxCoeff();
}

namespace {

using Clock = std::chrono::steady_clock;

/// Applies `m` (slot 0 = most significant) to the amplitudes of `buf` at
/// `positions`.
void apply_operator(Complex* buf, std::uint64_t size, std::span<const int> positions, const Eigen::MatrixXcd& m,
                    bool diagonal) {
  const std::size_t p = positions.size();
  if (p == 0) {
    const Complex c = m(0, 0);
    if (c != Complex{1.0, 0.0}) {
      for (std::uint64_t i = 0; i < size; ++i) buf[i] *= c;
    }
    return;
  }
  const std::uint64_t sub = std::uint64_t{1} << p;
  std::array<std::uint64_t, 8> off{};
  for (std::uint64_t s = 0; s < sub; ++s) {
    std::uint64_t o = 0;
    for (std::size_t j = 0; j < p; ++j) o |= ((s >> (p - 1 - j)) & 1U) << positions[j];
    off[s] = o;
  }
  std::array<int, 3> sorted{};
  std::copy(positions.begin(), positions.end(), sorted.begin());
  std::sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(p));

  std::array<Complex, 8> in{};
  const std::uint64_t count = size >> p;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t base = i;
    for (std::size_t j = 0; j < p; ++j) {
      const std::uint64_t low = base & ((std::uint64_t{1} << sorted[j]) - 1);
      base = ((base >> sorted[j]) << (sorted[j] + 1)) | low;
    }
    if (diagonal) {
      for (std::uint64_t s = 0; s < sub; ++s) buf[base + off[s]] *= m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
      continue;
    }
    for (std::uint64_t s = 0; s < sub; ++s) in[s] = buf[base + off[s]];
    for (std::uint64_t r = 0; r < sub; ++r) {
      Complex acc = 0.0;
      for (std::uint64_t c = 0; c < sub; ++c) acc += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
      buf[base + off[r]] = acc;
    }
  }
}

/// One fused op specialised to a rank: variants over the non-resident local
/// slots, each acting on the resident slots.
struct RankOp {
  std::vector<int> positions;            // buffer positions of resident slots
  std::vector<int> fixed_bits;           // local bits outside the tile
  std::vector<Eigen::MatrixXcd> variants;
  std::vector<char> skip;
  std::vector<char> diagonal;
};

bool is_identity(const Eigen::MatrixXcd& m) {
  return (m - Eigen::MatrixXcd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() == 0.0;
}

std::optional<RankOp> specialise(const FusedOp& op, std::uint64_t rank, int local, const std::vector<int>& tile_pos) {
  if (op.mode == FusedMode::RankControlled && (rank & op.rank_mask) != op.rank_value) return std::nullopt;

  const auto g = gate_matrix(op.kind, op.params);
  const int p = g.num_qubits;
  std::vector<int> global_slots, global_values, rest;
  for (int s = 0; s < p; ++s) {
    const int bit = op.bits[static_cast<std::size_t>(s)];
    if (bit >= local) {
      global_slots.push_back(s);
      global_values.push_back(static_cast<int>((rank >> (bit - local)) & 1U));
    } else {
      rest.push_back(s);
    }
  }
  Eigen::MatrixXcd base;
  if (op.mode == FusedMode::RankDiagonal) {
    std::size_t pattern = 0;
    for (int v : global_values) pattern = (pattern << 1) | static_cast<std::size_t>(v);
    const auto& row = op.phase_table.at(pattern);
    base = Eigen::Map<const Eigen::VectorXcd>(row.data(), static_cast<Eigen::Index>(row.size())).asDiagonal();
  } else {
    base = restrict_slots(g.matrix, p, global_slots, global_values);
  }

  RankOp out;
  std::vector<int> fixed_in_rest;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const int bit = op.bits[static_cast<std::size_t>(rest[i])];
    const int pos = tile_pos[static_cast<std::size_t>(bit)];
    if (pos >= 0) {
      out.positions.push_back(pos);
    } else {
      fixed_in_rest.push_back(static_cast<int>(i));
      out.fixed_bits.push_back(bit);
    }
  }
  const auto n = static_cast<int>(fixed_in_rest.size());
  for (int pattern = 0; pattern < (1 << n); ++pattern) {
    std::vector<int> values(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = (pattern >> (n - 1 - i)) & 1;
    auto v = restrict_slots(base, static_cast<int>(rest.size()), fixed_in_rest, values);
    out.skip.push_back(is_identity(v));
    out.diagonal.push_back(is_diagonal_matrix(v));
    out.variants.push_back(std::move(v));
  }
  return out;
}

void apply_kernel(const FusedKernel& k, DistState& state) {
  const int local = state.layout.local_bits();
  const std::uint64_t block = std::uint64_t{1} << local;
  std::vector<int> tile_pos(static_cast<std::size_t>(local), -1);
  std::vector<int> other;
  const bool whole_block = static_cast<int>(k.tile_bits.size()) == local;
  for (std::size_t j = 0; j < k.tile_bits.size(); ++j) {
    tile_pos[static_cast<std::size_t>(k.tile_bits[j])] = whole_block ? k.tile_bits[j] : static_cast<int>(j);
  }
  for (int b = 0; b < local; ++b) {
    if (tile_pos[static_cast<std::size_t>(b)] < 0) other.push_back(b);
  }
  const std::uint64_t tile_size = std::uint64_t{1} << k.tile_bits.size();
  const std::uint64_t num_tiles = std::uint64_t{1} << other.size();

  std::vector<Complex> tile(whole_block ? 0 : tile_size);
  for (std::size_t r = 0; r < state.blocks.size(); ++r) {
    std::vector<RankOp> ops;
    for (const auto& op : k.ops) {
      if (auto s = specialise(op, r, local, tile_pos)) ops.push_back(std::move(*s));
    }
    Complex* amps = state.blocks[r].data();
    for (std::uint64_t t = 0; t < num_tiles; ++t) {
      std::uint64_t base = 0;
      for (std::size_t j = 0; j < other.size(); ++j) base |= ((t >> j) & 1U) << other[j];
      Complex* buf = amps;
      std::uint64_t buf_size = block;
      if (!whole_block) {
        for (std::uint64_t i = 0; i < tile_size; ++i) {
          std::uint64_t o = base;
          for (std::size_t j = 0; j < k.tile_bits.size(); ++j) o |= ((i >> j) & 1U) << k.tile_bits[j];
          tile[i] = amps[o];
        }
        buf = tile.data();
        buf_size = tile_size;
      }
      for (const auto& op : ops) {
        std::size_t pattern = 0;
        for (int bit : op.fixed_bits) pattern = (pattern << 1) | ((base >> bit) & 1U);
        if (op.skip[pattern]) continue;
        apply_operator(buf, buf_size, op.positions, op.variants[pattern], op.diagonal[pattern] != 0);
      }
      if (!whole_block) {
        for (std::uint64_t i = 0; i < tile_size; ++i) {
          std::uint64_t o = base;
          for (std::size_t j = 0; j < k.tile_bits.size(); ++j) o |= ((i >> j) & 1U) << k.tile_bits[j];
          amps[o] = tile[i];
        }
      }
    }
  }
}

/// Splits local offset `o` into (sub-block key over `block_bits`, packed rest).
struct BlockIndexer {
  std::vector<int> block_bits;
  std::vector<int> rest_bits;

  BlockIndexer(std::vector<int> bits, int local) : block_bits(std::move(bits)) {
    for (int b = 0; b < local; ++b) {
      if (std::find(block_bits.begin(), block_bits.end(), b) == block_bits.end()) rest_bits.push_back(b);
    }
  }
  std::uint64_t key(std::uint64_t o) const {
    std::uint64_t k = 0;
    for (int b : block_bits) k = (k << 1) | ((o >> b) & 1U);
    return k;
  }
  std::uint64_t rest(std::uint64_t o) const {
    std::uint64_t j = 0;
    for (std::size_t i = 0; i < rest_bits.size(); ++i) j |= ((o >> rest_bits[i]) & 1U) << i;
    return j;
  }
};

}  // namespace

RunResult run_plan(const ExecutionPlan& plan, const RunOptions& options) {
  InProcessTransport transport;
  return run_plan(plan, options, transport);
}

RunResult run_plan(const ExecutionPlan& plan, const RunOptions& options, Transport& transport) {
  validate_plan(plan);
  RunResult result;
  DistState& state = result.state;
  const int local = plan.local_bits();
  const std::uint64_t block = std::uint64_t{1} << local;
  const auto ranks = static_cast<std::size_t>(plan.num_ranks());
  std::vector<std::vector<Complex>> send(ranks), recv(ranks);
  double reference_norm = 1.0;
  double pending_pack = 0.0;
  result.stats.phases.resize(plan.phases.size());
  for (std::size_t i = 0; i < plan.phases.size(); ++i) result.stats.phases[i].phase = static_cast<int>(i);
  const auto elapsed = [](Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); };
  const auto add_exchange = [&](int phase, double s) {
    result.stats.exchange_seconds += s;
    result.stats.phases.at(static_cast<std::size_t>(phase)).exchange_seconds += s;
  };

  for (const auto& task : plan.tasks) {
    ++result.stats.task_counts[task.kind()];
    const auto start = Clock::now();
    switch (task.kind()) {
      case TaskKind::Alloc: {
        const auto& layout = plan.phases[static_cast<std::size_t>(std::get<AllocPayload>(task.payload).phase)];
        if (options.initial_state) {
          state = scatter(*options.initial_state, layout);
        } else {
          state.num_qubits = plan.num_qubits;
          state.num_global = plan.num_global;
          state.layout = layout;
          state.blocks.assign(ranks, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(block)));
          state.blocks[0](0) = 1.0;
        }
        state.phase = std::get<AllocPayload>(task.payload).phase;
        reference_norm = state.norm_squared();
        break;
      }
      case TaskKind::Pack: {
        const auto& pk = std::get<PackPayload>(task.payload);
        if (pk.phase != state.phase) throw PlanInvalid("Pack phase does not match the current layout");
        const BlockIndexer ix(pk.block_bits, local);
        const std::uint64_t bs = block >> pk.block_bits.size();
        for (std::size_t r = 0; r < ranks; ++r) {
          send[r].resize(block);
          for (std::uint64_t o = 0; o < block; ++o) send[r][ix.key(o) * bs + ix.rest(o)] = state.blocks[r](static_cast<Eigen::Index>(o));
        }
        pending_pack = elapsed(start);
        break;
      }
      case TaskKind::Exchange: {
        const auto& x = std::get<ExchangePayload>(task.payload);
        const auto transfers = block_transfers(x.swaps, local, plan.num_global);
        const std::uint64_t bs = x.block_size;
        for (std::size_t r = 0; r < ranks; ++r) recv[r].assign(block, Complex{});
        ExchangeStats es;
        es.task = task.id;
        es.amplitudes_per_pair = bs;
        for (const auto& t : transfers) {
          const auto first = send[static_cast<std::size_t>(t.src_rank)].begin() + static_cast<std::ptrdiff_t>(t.src_block * bs);
          if (t.dst_rank == t.src_rank) {
            std::copy(first, first + static_cast<std::ptrdiff_t>(bs),
                      recv[static_cast<std::size_t>(t.dst_rank)].begin() + static_cast<std::ptrdiff_t>(t.dst_block * bs));
          } else {
            transport.send(t.src_rank, t.dst_rank, t.dst_block, std::vector<Complex>(first, first + static_cast<std::ptrdiff_t>(bs)));
            es.amplitudes_moved += bs;
          }
        }
        transport.barrier();
        for (const auto& t : transfers) {
          if (t.dst_rank == t.src_rank) continue;
          const auto data = transport.receive(t.dst_rank, t.src_rank, t.dst_block);
          if (data.size() != bs) throw PlanInvalid("exchange block size mismatch");
          std::copy(data.begin(), data.end(),
                    recv[static_cast<std::size_t>(t.dst_rank)].begin() + static_cast<std::ptrdiff_t>(t.dst_block * bs));
        }
        es.bytes_moved = es.amplitudes_moved * sizeof(Complex);
        result.stats.exchanges.push_back(es);
        add_exchange(x.to_phase, elapsed(start) + pending_pack);
        pending_pack = 0.0;
        break;
      }
      case TaskKind::Unpack: {
        const auto& up = std::get<UnpackPayload>(task.payload);
        const BlockIndexer ix(up.block_bits, local);
        const std::uint64_t bs = block >> up.block_bits.size();
        for (std::size_t r = 0; r < ranks; ++r) {
          for (std::uint64_t o = 0; o < block; ++o) state.blocks[r](static_cast<Eigen::Index>(o)) = recv[r][ix.key(o) * bs + ix.rest(o)];
        }
        state.phase = up.phase;
        state.layout = plan.phases[static_cast<std::size_t>(up.phase)];
        add_exchange(up.phase, elapsed(start));
        break;
      }
      case TaskKind::ApplyFused: {
        const auto& k = std::get<FusedKernel>(task.payload);
        if (k.phase != state.phase) throw PlanInvalid("ApplyFused phase does not match the current layout");
        apply_kernel(k, state);
        const double drift = std::abs(state.norm_squared() - reference_norm);
        result.stats.max_norm_drift = std::max(result.stats.max_norm_drift, drift);
        if (drift > 1e-8) {
          throw NonUnitaryDrift("norm drifted by " + std::to_string(drift) + " after task " + std::to_string(task.id));
        }
        const double s = elapsed(start);
        result.stats.compute_seconds += s;
        result.stats.phases.at(static_cast<std::size_t>(k.phase)).compute_seconds += s;
        break;
      }
      case TaskKind::Free:
        send.clear();
        recv.clear();
        break;
    }
  }

  if (options.shots) result.histogram = sample(gather(state), *options.shots, options.seed);
  return result;
}

std::string bitstring(std::uint64_t index, int num_qubits) {
  std::string s(static_cast<std::size_t>(num_qubits), '0');
  for (int q = 0; q < num_qubits; ++q) {
    if ((index >> (num_qubits - 1 - q)) & 1U) s[static_cast<std::size_t>(q)] = '1';
  }
  return s;
}

Histogram sample(const OracleState& state, std::uint64_t shots, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(state.size());
  const auto d = static_cast<int>(std::lround(std::log2(static_cast<double>(std::max<std::size_t>(n, 1)))));
  std::vector<double> cdf(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += std::norm(state(static_cast<Eigen::Index>(i)));
    cdf[i] = total;
  }
  Histogram h;
  if (n == 0 || total <= 0.0) return h;
  std::mt19937_64 rng(seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
    auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    idx = std::min(idx, n - 1);
    ++h[bitstring(idx, d)];
  }
  return h;
}

std::map<std::string, double> probabilities(const OracleState& state, double cutoff) {
  const auto n = static_cast<std::uint64_t>(state.size());
  const auto d = static_cast<int>(std::lround(std::log2(static_cast<double>(std::max<std::uint64_t>(n, 1)))));
  std::map<std::string, double> out;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double p = std::norm(state(static_cast<Eigen::Index>(i)));
    if (p > cutoff) out[bitstring(i, d)] = p;
  }
  return out;
}

nlohmann::json histogram_to_json(const Histogram& h) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : h) j[k] = v;
  return j;
}

}  // namespace qpart
