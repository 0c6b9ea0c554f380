#include "qpart/plan.hpp"

#include <algorithm>
#include <set>

namespace qpart {

std::vector<int> Layout::local_qubits() const {
  std::vector<int> out;
  for (int q = 0; q < num_qubits; ++q) {
    if (!is_global(q)) out.push_back(q);
  }
  return out;
}

int Layout::qubit_at(int bit) const {
  const auto it = std::find(bit_of_qubit.begin(), bit_of_qubit.end(), bit);
  if (it == bit_of_qubit.end()) throw std::out_of_range("no qubit on bit " + std::to_string(bit));
  return static_cast<int>(it - bit_of_qubit.begin());
}

Layout Layout::canonical(int num_qubits, std::span<const int> local_qubits) {
  Layout l;
  l.num_qubits = num_qubits;
  l.num_global = num_qubits - static_cast<int>(local_qubits.size());
  l.bit_of_qubit.assign(static_cast<std::size_t>(num_qubits), -1);
  std::vector<char> is_local(static_cast<std::size_t>(num_qubits), 0);
  for (int q : local_qubits) is_local.at(static_cast<std::size_t>(q)) = 1;
  int next_local = l.local_bits() - 1;
  int next_global = num_qubits - 1;
  for (int q = 0; q < num_qubits; ++q) {
    l.bit_of_qubit[static_cast<std::size_t>(q)] = is_local[static_cast<std::size_t>(q)] ? next_local-- : next_global--;
  }
  return l;
}

Reshape infer_reshape(const Layout& current, std::span<const int> next_local) {
  if (static_cast<int>(next_local.size()) != current.local_bits()) {
    throw std::invalid_argument("infer_reshape: next local set has " + std::to_string(next_local.size()) +
                                " qubits, layout holds " + std::to_string(current.local_bits()));
  }
  const std::set<int> wanted(next_local.begin(), next_local.end());
  std::vector<int> outgoing, incoming;
  for (int q = 0; q < current.num_qubits; ++q) {
    const bool now_local = !current.is_global(q);
    const bool want_local = wanted.contains(q);
    if (now_local && !want_local) outgoing.push_back(q);
    if (!now_local && want_local) incoming.push_back(q);
  }
  Reshape r;
  r.next = current;
  for (std::size_t i = 0; i < outgoing.size(); ++i) {
    auto& out_bit = r.next.bit_of_qubit[static_cast<std::size_t>(outgoing[i])];
    auto& in_bit = r.next.bit_of_qubit[static_cast<std::size_t>(incoming[i])];
    r.swaps.push_back({in_bit, out_bit});
    std::swap(out_bit, in_bit);
  }
  return r;
}

std::vector<BlockTransfer> block_transfers(std::span<const std::array<int, 2>> swaps, int local_bits,
                                           int num_global) {
  const auto m = static_cast<int>(swaps.size());
  std::vector<BlockTransfer> out;
  const int ranks = 1 << num_global;
  for (int r = 0; r < ranks; ++r) {
    std::uint64_t own = 0;
    for (int i = 0; i < m; ++i) {
      own |= static_cast<std::uint64_t>((r >> (swaps[static_cast<std::size_t>(i)][0] - local_bits)) & 1)
             << (m - 1 - i);
    }
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << m); ++k) {
      int dst = r;
      for (int i = 0; i < m; ++i) {
        const int rank_bit = swaps[static_cast<std::size_t>(i)][0] - local_bits;
        const int v = static_cast<int>((k >> (m - 1 - i)) & 1);
        dst = (dst & ~(1 << rank_bit)) | (v << rank_bit);
      }
      out.push_back(BlockTransfer{r, k, dst, own});
    }
  }
  return out;
}

std::string_view task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::Alloc:
      return "Alloc";
    case TaskKind::Pack:
      return "Pack";
    case TaskKind::Exchange:
      return "Exchange";
    case TaskKind::Unpack:
      return "Unpack";
    case TaskKind::ApplyFused:
      return "ApplyFused";
    case TaskKind::Free:
      return "Free";
  }
  return "?";
}

std::string_view fused_mode_name(FusedMode mode) {
  switch (mode) {
    case FusedMode::Local:
      return "local";
    case FusedMode::RankControlled:
      return "rank_controlled";
    case FusedMode::RankDiagonal:
      return "rank_diagonal";
  }
  return "?";
}

std::size_t ExecutionPlan::count(TaskKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(tasks.begin(), tasks.end(), [&](const Task& t) { return t.kind() == kind; }));
}

FusedKernel fuse(const Partition& leaf, const Layout& layout, std::span<const PartitionGate> gates) {
  FusedKernel k;
  k.level = leaf.level;
  for (int q : leaf.local_dims) {
    if (layout.is_global(q)) {
      throw std::logic_error("leaf keeps qubit " + std::to_string(q) + " resident but it is a rank bit");
    }
    k.tile_bits.push_back(layout.bit_of_qubit[static_cast<std::size_t>(q)]);
  }

  const int local = layout.local_bits();
  for (int id : leaf.gates) {
    const auto& g = gates[static_cast<std::size_t>(id)];
    FusedOp op;
    op.gate = id;
    op.kind = g.tensor.kind;
    op.params = g.tensor.params;
    op.qubits = g.qubits;
    std::vector<int> global_slots;
    for (std::size_t s = 0; s < g.qubits.size(); ++s) {
      const int bit = layout.bit_of_qubit[static_cast<std::size_t>(g.qubits[s])];
      op.bits.push_back(bit);
      if (bit >= local) global_slots.push_back(static_cast<int>(s));
    }

    if (global_slots.empty()) {
      op.mode = FusedMode::Local;
    } else if (std::all_of(global_slots.begin(), global_slots.end(),
                           [&](int s) { return g.tensor.is_control_slot(s); })) {
      op.mode = FusedMode::RankControlled;
      for (int s : global_slots) op.rank_mask |= std::uint64_t{1} << (op.bits[static_cast<std::size_t>(s)] - local);
      op.rank_value = op.rank_mask;
    } else if (g.tensor.is_diagonal) {
      op.mode = FusedMode::RankDiagonal;
      const auto n = static_cast<int>(global_slots.size());
      for (int pattern = 0; pattern < (1 << n); ++pattern) {
        std::vector<int> values(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = (pattern >> (n - 1 - i)) & 1;
        const Eigen::MatrixXcd sub = restrict_slots(g.tensor.matrix, g.tensor.num_qubits, global_slots, values);
        const Eigen::VectorXcd d = sub.diagonal();
        op.phase_table.emplace_back(d.data(), d.data() + d.size());
      }
    } else {
      throw std::logic_error("gate " + std::to_string(id) + " touches a rank bit and cannot pass through");
    }
    k.ops.push_back(std::move(op));
  }
  return k;
}

namespace {

void collect_leaves(const Partition& p, std::vector<const Partition*>& out) {
  if (p.children.empty()) {
    out.push_back(&p);
    return;
  }
  for (const auto& c : p.children) collect_leaves(c, out);
}

}  // namespace

ExecutionPlan lower(const PartitionTree& tree) {
  ExecutionPlan plan;
  plan.num_qubits = tree.num_qubits;
  const int l0 = tree.hierarchy.levels.empty() ? tree.num_qubits : tree.hierarchy.levels.front().local_qubits;
  plan.num_global = tree.num_qubits - l0;

  if (tree.children.empty()) {
    std::vector<int> local;
    for (int q = plan.num_global; q < tree.num_qubits; ++q) local.push_back(q);
    plan.phases.push_back(Layout::canonical(tree.num_qubits, local));
  } else {
    plan.phases.push_back(Layout::canonical(tree.num_qubits, tree.children.front().local_dims));
  }

  const auto add = [&](TaskPayload payload) {
    Task t;
    t.id = static_cast<int>(plan.tasks.size());
    if (t.id > 0) t.deps.push_back(t.id - 1);
    t.payload = std::move(payload);
    plan.tasks.push_back(std::move(t));
  };

  add(AllocPayload{0});
  int phase = 0;
  for (const auto& part : tree.children) {
    const auto& current = plan.phases[static_cast<std::size_t>(phase)];
    if (current.local_qubits() != part.local_dims) {
      auto reshape = infer_reshape(current, part.local_dims);
      std::vector<int> block_bits;
      for (const auto& s : reshape.swaps) block_bits.push_back(s[1]);
      const auto block_size = reshape.block_size();
      plan.phases.push_back(std::move(reshape.next));
      add(PackPayload{phase, block_bits});
      add(ExchangePayload{phase, phase + 1, reshape.swaps, block_size});
      add(UnpackPayload{phase + 1, block_bits});
      ++phase;
    }
    std::vector<const Partition*> leaves;
    collect_leaves(part, leaves);
    for (const auto* leaf : leaves) {
      auto kernel = fuse(*leaf, plan.phases[static_cast<std::size_t>(phase)], tree.gates);
      kernel.phase = phase;
      add(std::move(kernel));
    }
  }
  add(FreePayload{});
  return plan;
}

void validate_plan(const ExecutionPlan& plan) {
  const auto fail = [](const std::string& what) { throw PlanInvalid(what); };
  if (plan.num_global < 0 || plan.num_global > plan.num_qubits) fail("bad global qubit count");
  if (plan.phases.empty()) fail("plan has no layout phases");
  for (const auto& l : plan.phases) {
    if (l.num_qubits != plan.num_qubits || l.num_global != plan.num_global ||
        static_cast<int>(l.bit_of_qubit.size()) != plan.num_qubits) {
      fail("layout phase shape mismatch");
    }
    std::vector<int> bits = l.bit_of_qubit;
    std::sort(bits.begin(), bits.end());
    for (int i = 0; i < plan.num_qubits; ++i) {
      if (bits[static_cast<std::size_t>(i)] != i) fail("layout phase is not a bijection");
    }
  }
  const auto check_phase = [&](int p) {
    if (p < 0 || p >= static_cast<int>(plan.phases.size())) fail("task references unknown phase");
  };
  const int local = plan.local_bits();
  for (std::size_t i = 0; i < plan.tasks.size(); ++i) {
    const auto& t = plan.tasks[i];
    if (t.id != static_cast<int>(i)) fail("task ids must be dense and ordered");
    for (int d : t.deps) {
      if (d < 0 || d >= t.id) fail("task " + std::to_string(t.id) + " depends on a later task");
    }
    const auto prev = i > 0 ? plan.tasks[i - 1].kind() : TaskKind::Free;
    const auto next = i + 1 < plan.tasks.size() ? plan.tasks[i + 1].kind() : TaskKind::Alloc;
    switch (t.kind()) {
      case TaskKind::Alloc:
        if (i != 0) fail("Alloc must be the first task");
        check_phase(std::get<AllocPayload>(t.payload).phase);
        break;
      case TaskKind::Free:
        if (i + 1 != plan.tasks.size()) fail("Free must be the last task");
        break;
      case TaskKind::Pack:
        check_phase(std::get<PackPayload>(t.payload).phase);
        if (next != TaskKind::Exchange) fail("Pack must be followed by Exchange");
        break;
      case TaskKind::Unpack:
        check_phase(std::get<UnpackPayload>(t.payload).phase);
        if (prev != TaskKind::Exchange) fail("Unpack must follow Exchange");
        break;
      case TaskKind::Exchange: {
        const auto& x = std::get<ExchangePayload>(t.payload);
        check_phase(x.from_phase);
        check_phase(x.to_phase);
        if (prev != TaskKind::Pack || next != TaskKind::Unpack) fail("Exchange must sit between Pack and Unpack");
        for (const auto& s : x.swaps) {
          if (s[0] < local || s[0] >= plan.num_qubits || s[1] < 0 || s[1] >= local) fail("bad swap bits");
        }
        if (x.block_size != (std::uint64_t{1} << (local - static_cast<int>(x.swaps.size())))) {
          fail("exchange block size does not match swap count");
        }
        break;
      }
      case TaskKind::ApplyFused: {
        const auto& k = std::get<FusedKernel>(t.payload);
        check_phase(k.phase);
        for (int b : k.tile_bits) {
          if (b < 0 || b >= local) fail("tile bit outside the local block");
        }
        for (const auto& op : k.ops) {
          const auto g = gate_matrix(op.kind, op.params);
          if (op.bits.size() != static_cast<std::size_t>(g.num_qubits) || op.qubits.size() != op.bits.size()) {
            fail("fused op arity mismatch");
          }
          const auto& layout = plan.phases[static_cast<std::size_t>(k.phase)];
          for (std::size_t s = 0; s < op.bits.size(); ++s) {
            if (layout.bit_of_qubit.at(static_cast<std::size_t>(op.qubits[s])) != op.bits[s]) {
              fail("fused op bit binding disagrees with its layout phase");
            }
            const bool resident = std::find(k.tile_bits.begin(), k.tile_bits.end(), op.bits[s]) != k.tile_bits.end();
            if (!resident && !g.is_diagonal && !g.is_control_slot(static_cast<int>(s))) {
              fail("fused op needs a non-resident target bit");
            }
          }
        }
        break;
      }
    }
  }
  if (plan.tasks.empty() || plan.tasks.front().kind() != TaskKind::Alloc ||
      plan.tasks.back().kind() != TaskKind::Free) {
    fail("plan must start with Alloc and end with Free");
  }
}

namespace {

using nlohmann::json;

json complex_json(const Complex& c) { return json::array({c.real(), c.imag()}); }

Complex complex_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json payload_json(const TaskPayload& p) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AllocPayload>) {
          return {{"phase", v.phase}};
        } else if constexpr (std::is_same_v<T, PackPayload> || std::is_same_v<T, UnpackPayload>) {
          return {{"phase", v.phase}, {"block_bits", v.block_bits}};
        } else if constexpr (std::is_same_v<T, ExchangePayload>) {
          auto swaps = json::array();
          for (const auto& s : v.swaps) swaps.push_back({s[0], s[1]});
          return {{"from_phase", v.from_phase},
                  {"to_phase", v.to_phase},
                  {"swaps", std::move(swaps)},
                  {"block_size", v.block_size}};
        } else if constexpr (std::is_same_v<T, FusedKernel>) {
          auto ops = json::array();
          for (const auto& op : v.ops) {
            json o{{"gate", op.gate},
                   {"kind", gate_name(op.kind)},
                   {"params", op.params},
                   {"qubits", op.qubits},
                   {"bits", op.bits},
                   {"mode", fused_mode_name(op.mode)}};
            if (op.mode == FusedMode::RankControlled) {
              o["rank_condition"] = {{"mask", op.rank_mask}, {"value", op.rank_value}};
            }
            if (op.mode == FusedMode::RankDiagonal) {
              auto table = json::array();
              for (const auto& row : op.phase_table) {
                auto r = json::array();
                for (const auto& c : row) r.push_back(complex_json(c));
                table.push_back(std::move(r));
              }
              o["phase_table"] = std::move(table);
            }
            ops.push_back(std::move(o));
          }
          return {{"phase", v.phase}, {"level", v.level}, {"tile_bits", v.tile_bits}, {"ops", std::move(ops)}};
        } else {
          return json::object();
        }
      },
      p);
}

TaskKind kind_from(const std::string& s) {
  for (auto k : {TaskKind::Alloc, TaskKind::Pack, TaskKind::Exchange, TaskKind::Unpack, TaskKind::ApplyFused,
                 TaskKind::Free}) {
    if (task_kind_name(k) == s) return k;
  }
  throw PlanInvalid("unknown task kind '" + s + "'");
}

FusedMode mode_from(const std::string& s) {
  for (auto m : {FusedMode::Local, FusedMode::RankControlled, FusedMode::RankDiagonal}) {
    if (fused_mode_name(m) == s) return m;
  }
  throw PlanInvalid("unknown fused mode '" + s + "'");
}

TaskPayload payload_from(TaskKind kind, const json& j) {
  switch (kind) {
    case TaskKind::Alloc:
      return AllocPayload{j.at("phase").get<int>()};
    case TaskKind::Pack:
      return PackPayload{j.at("phase").get<int>(), j.at("block_bits").get<std::vector<int>>()};
    case TaskKind::Unpack:
      return UnpackPayload{j.at("phase").get<int>(), j.at("block_bits").get<std::vector<int>>()};
    case TaskKind::Exchange: {
      ExchangePayload x;
      x.from_phase = j.at("from_phase").get<int>();
      x.to_phase = j.at("to_phase").get<int>();
      for (const auto& s : j.at("swaps")) x.swaps.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
      x.block_size = j.at("block_size").get<std::uint64_t>();
      return x;
    }
    case TaskKind::ApplyFused: {
      FusedKernel k;
      k.phase = j.at("phase").get<int>();
      k.level = j.at("level").get<int>();
      k.tile_bits = j.at("tile_bits").get<std::vector<int>>();
      for (const auto& o : j.at("ops")) {
        FusedOp op;
        op.gate = o.at("gate").get<int>();
        const auto name = o.at("kind").get<std::string>();
        const auto kind_opt = gate_from_name(name);
        if (!kind_opt) throw PlanInvalid("unknown gate '" + name + "' in plan");
        op.kind = *kind_opt;
        op.params = o.at("params").get<std::vector<double>>();
        op.qubits = o.at("qubits").get<std::vector<int>>();
        op.bits = o.at("bits").get<std::vector<int>>();
        op.mode = mode_from(o.at("mode").get<std::string>());
        if (o.contains("rank_condition")) {
          op.rank_mask = o["rank_condition"].at("mask").get<std::uint64_t>();
          op.rank_value = o["rank_condition"].at("value").get<std::uint64_t>();
        }
        if (o.contains("phase_table")) {
          for (const auto& row : o["phase_table"]) {
            std::vector<Complex> r;
            for (const auto& c : row) r.push_back(complex_from(c));
            op.phase_table.push_back(std::move(r));
          }
        }
        k.ops.push_back(std::move(op));
      }
      return k;
    }
    case TaskKind::Free:
      return FreePayload{};
  }
  throw PlanInvalid("unreachable task kind");
}

}  // namespace

nlohmann::json plan_to_json(const ExecutionPlan& plan) {
  json j;
  j["version"] = plan.version;
  j["d"] = plan.num_qubits;
  j["g"] = plan.num_global;
  auto phases = json::array();
  for (const auto& l : plan.phases) phases.push_back(l.bit_of_qubit);
  j["layout_phases"] = std::move(phases);
  auto tasks = json::array();
  for (const auto& t : plan.tasks) {
    tasks.push_back({{"id", t.id}, {"kind", task_kind_name(t.kind())}, {"deps", t.deps}, {"payload", payload_json(t.payload)}});
  }
  j["tasks"] = std::move(tasks);
  return j;
}

ExecutionPlan plan_from_json(const nlohmann::json& j) {
  try {
    ExecutionPlan plan;
    plan.version = j.at("version").get<int>();
    if (plan.version != 1) throw PlanInvalid("unsupported plan version " + std::to_string(plan.version));
    plan.num_qubits = j.at("d").get<int>();
    plan.num_global = j.at("g").get<int>();
    for (const auto& p : j.at("layout_phases")) {
      Layout l;
      l.num_qubits = plan.num_qubits;
      l.num_global = plan.num_global;
      l.bit_of_qubit = p.get<std::vector<int>>();
      plan.phases.push_back(std::move(l));
    }
    for (const auto& t : j.at("tasks")) {
      Task task;
      task.id = t.at("id").get<int>();
      task.deps = t.at("deps").get<std::vector<int>>();
      task.payload = payload_from(kind_from(t.at("kind").get<std::string>()), t.at("payload"));
      plan.tasks.push_back(std::move(task));
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw PlanInvalid(std::string("malformed plan JSON: ") + e.what());
  }
}

}  // namespace qpart
