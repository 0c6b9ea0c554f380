#include "qpart/gates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>

namespace qpart {

namespace {

struct GateInfo {
  GateKind kind;
  std::string_view name;
  int arity;
  int num_params;
};

constexpr std::array<GateInfo, 19> kGateTable{{
    {GateKind::I, "id", 1, 0},
    {GateKind::H, "h", 1, 0},
    {GateKind::X, "x", 1, 0},
    {GateKind::Y, "y", 1, 0},
    {GateKind::Z, "z", 1, 0},
    {GateKind::S, "s", 1, 0},
    {GateKind::Sdg, "sdg", 1, 0},
    {GateKind::T, "t", 1, 0},
    {GateKind::Tdg, "tdg", 1, 0},
    {GateKind::RX, "rx", 1, 1},
    {GateKind::RY, "ry", 1, 1},
    {GateKind::RZ, "rz", 1, 1},
    {GateKind::P, "p", 1, 1},
    {GateKind::U, "u", 1, 3},
    {GateKind::CX, "cx", 2, 0},
    {GateKind::CZ, "cz", 2, 0},
    {GateKind::CP, "cp", 2, 1},
    {GateKind::SWAP, "swap", 2, 0},
    {GateKind::CCX, "ccx", 3, 0},
}};

const GateInfo& info(GateKind kind) {
  return kGateTable[static_cast<std::size_t>(kind)];
}

constexpr Complex kI{0.0, 1.0};

Eigen::MatrixXcd diag(std::initializer_list<Complex> entries) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (const auto& e : entries) v(i++) = e;
  return v.asDiagonal();
}

Eigen::MatrixXcd controlled(const Eigen::MatrixXcd& target, int num_controls) {
  const Eigen::Index n = target.rows() << num_controls;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n);
  m.bottomRightCorner(target.rows(), target.cols()) = target;
  return m;
}

Eigen::MatrixXcd pauli_x() {
  Eigen::MatrixXcd m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

}  // namespace

std::string_view gate_name(GateKind kind) { return info(kind).name; }

std::optional<GateKind> gate_from_name(std::string_view name) {
  if (name == "u1") return GateKind::P;
  if (name == "u3" || name == "U") return GateKind::U;
  if (name == "CX") return GateKind::CX;
  if (name == "cu1") return GateKind::CP;
  for (const auto& g : kGateTable) {
    if (g.kind != GateKind::I && g.name == name) return g.kind;
  }
  return std::nullopt;
}

int gate_arity(GateKind kind) { return info(kind).arity; }

int gate_num_params(GateKind kind) { return info(kind).num_params; }

bool GateTensor::is_control_slot(int slot) const {
  return std::find(control_slots.begin(), control_slots.end(), slot) != control_slots.end();
}

bool is_diagonal_matrix(const Eigen::MatrixXcd& m, double tol) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r != c && std::abs(m(r, c)) >= tol) return false;
    }
  }
  return true;
}

GateTensor gate_matrix(GateKind kind, std::span<const double> params) {
  const auto& gi = info(kind);
  if (static_cast<int>(params.size()) != gi.num_params) {
    throw BadArity("gate '" + std::string(gi.name) + "' takes " + std::to_string(gi.num_params) +
                   " parameter(s), got " + std::to_string(params.size()));
  }

  GateTensor g;
  g.kind = kind;
  g.params.assign(params.begin(), params.end());
  g.num_qubits = gi.arity;

  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  switch (kind) {
    case GateKind::I:
      g.matrix = Eigen::MatrixXcd::Identity(2, 2);
      break;
    case GateKind::H:
      g.matrix.resize(2, 2);
      g.matrix << inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2;
      break;
    case GateKind::X:
      g.matrix = pauli_x();
      break;
    case GateKind::Y:
      g.matrix.resize(2, 2);
      g.matrix << 0.0, -kI, kI, 0.0;
      break;
    case GateKind::Z:
      g.matrix = diag({1.0, -1.0});
      break;
    case GateKind::S:
      g.matrix = diag({1.0, kI});
      break;
    case GateKind::Sdg:
      g.matrix = diag({1.0, -kI});
      break;
    case GateKind::T:
      g.matrix = diag({1.0, std::polar(1.0, std::numbers::pi / 4)});
      break;
    case GateKind::Tdg:
      g.matrix = diag({1.0, std::polar(1.0, -std::numbers::pi / 4)});
      break;
    case GateKind::RX: {
      const double c = std::cos(params[0] / 2), s = std::sin(params[0] / 2);
      g.matrix.resize(2, 2);
      g.matrix << c, -kI * s, -kI * s, c;
      break;
    }
    case GateKind::RY: {
      const double c = std::cos(params[0] / 2), s = std::sin(params[0] / 2);
      g.matrix.resize(2, 2);
      g.matrix << c, -s, s, c;
      break;
    }
    case GateKind::RZ:
      g.matrix = diag({std::polar(1.0, -params[0] / 2), std::polar(1.0, params[0] / 2)});
      break;
    case GateKind::P:
      // P(a) = diag(1, e^{-ja}).
      g.matrix = diag({1.0, std::polar(1.0, -params[0])});
      break;
    case GateKind::U: {
      const double theta = params[0], phi = params[1], lambda = params[2];
      const double c = std::cos(theta / 2), s = std::sin(theta / 2);
      g.matrix.resize(2, 2);
      g.matrix << c, -std::polar(s, lambda), std::polar(s, phi), std::polar(c, phi + lambda);
      break;
    }
    case GateKind::CX:
      g.matrix = controlled(pauli_x(), 1);
      g.control_slots = {0};
      break;
    case GateKind::CZ:
      g.matrix = diag({1.0, 1.0, 1.0, -1.0});
      g.control_slots = {0, 1};
      break;
    case GateKind::CP:
      g.matrix = diag({1.0, 1.0, 1.0, std::polar(1.0, -params[0])});
      g.control_slots = {0, 1};
      break;
    case GateKind::SWAP:
      g.matrix = Eigen::MatrixXcd::Zero(4, 4);
      g.matrix(0, 0) = g.matrix(3, 3) = 1.0;
      g.matrix(1, 2) = g.matrix(2, 1) = 1.0;
      break;
    case GateKind::CCX:
      g.matrix = controlled(pauli_x(), 2);
      g.control_slots = {0, 1};
      break;
  }
  g.is_diagonal = is_diagonal_matrix(g.matrix);
  return g;
}

Eigen::MatrixXcd restrict_slots(const Eigen::MatrixXcd& m, int num_slots, std::span<const int> fixed_slots,
                                std::span<const int> values) {
  std::vector<int> free_slots;
  for (int s = 0; s < num_slots; ++s) {
    if (std::find(fixed_slots.begin(), fixed_slots.end(), s) == fixed_slots.end()) free_slots.push_back(s);
  }
  Eigen::Index base = 0;
  for (std::size_t i = 0; i < fixed_slots.size(); ++i) {
    if (values[i]) base |= Eigen::Index{1} << (num_slots - 1 - fixed_slots[i]);
  }
  const auto k = static_cast<int>(free_slots.size());
  const Eigen::Index n = Eigen::Index{1} << k;
  std::vector<Eigen::Index> full(static_cast<std::size_t>(n));
  for (Eigen::Index s = 0; s < n; ++s) {
    Eigen::Index idx = base;
    for (int j = 0; j < k; ++j) {
      if ((s >> (k - 1 - j)) & 1) idx |= Eigen::Index{1} << (num_slots - 1 - free_slots[static_cast<std::size_t>(j)]);
    }
    full[static_cast<std::size_t>(s)] = idx;
  }
  Eigen::MatrixXcd out(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) out(r, c) = m(full[static_cast<std::size_t>(r)], full[static_cast<std::size_t>(c)]);
  }
  return out;
}

Eigen::MatrixXcd kron_embed(const GateTensor& gate, std::span<const int> qubit_slots, int d) {
  if (d < 1 || d > kMaxDenseQubits) {
    throw TooLarge("kron_embed supports 1.." + std::to_string(kMaxDenseQubits) +
                   " qubits, got " + std::to_string(d));
  }
  const int p = gate.num_qubits;
  if (static_cast<int>(qubit_slots.size()) != p) {
    throw BadArity("kron_embed: gate acts on " + std::to_string(p) + " qubit(s), got " +
                   std::to_string(qubit_slots.size()) + " slot(s)");
  }
  std::uint64_t gate_mask = 0;
  for (int q : qubit_slots) {
    if (q < 0 || q >= d) throw std::out_of_range("kron_embed: qubit out of range");
    gate_mask |= std::uint64_t{1} << (d - 1 - q);
  }

  const std::uint64_t dim = std::uint64_t{1} << d;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                                static_cast<Eigen::Index>(dim));
  const auto sub_index = [&](std::uint64_t basis) {
    std::uint64_t s = 0;
    for (int k = 0; k < p; ++k) {
      s = (s << 1) | ((basis >> (d - 1 - qubit_slots[k])) & 1U);
    }
    return s;
  };
  const auto with_sub = [&](std::uint64_t basis, std::uint64_t s) {
    std::uint64_t b = basis & ~gate_mask;
    for (int k = 0; k < p; ++k) {
      const std::uint64_t bit = (s >> (p - 1 - k)) & 1U;
      b |= bit << (d - 1 - qubit_slots[k]);
    }
    return b;
  };
  const std::uint64_t sub_dim = std::uint64_t{1} << p;
  for (std::uint64_t col = 0; col < dim; ++col) {
    const std::uint64_t c = sub_index(col);
    for (std::uint64_t r = 0; r < sub_dim; ++r) {
      out(static_cast<Eigen::Index>(with_sub(col, r)), static_cast<Eigen::Index>(col)) =
          gate.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return out;
}

}  // namespace qpart
