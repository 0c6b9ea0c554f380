#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qpart {

using Complex = std::complex<double>;

/// Built-in gate set. `I` is the barrier identity and never appears in QASM.
enum class GateKind {
  I,
  H,
  X,
  Y,
  Z,
  S,
  Sdg,
  T,
  Tdg,
  RX,
  RY,
  RZ,
  P,
  U,
  CX,
  CZ,
  CP,
  SWAP,
  CCX,
};

class UnknownGate : public std::runtime_error {
 public:
  explicit UnknownGate(std::string name)
      : std::runtime_error("unknown gate '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class BadArity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view gate_name(GateKind kind);

/// Looks up a QASM gate identifier, including the u1/u3/U/CX/cu1 aliases.
std::optional<GateKind> gate_from_name(std::string_view name);

int gate_arity(GateKind kind);
int gate_num_params(GateKind kind);

/// A gate as a small dense tensor. Slot order is (controls..., targets...)
/// and slot 0 is the most significant bit of the matrix row/column index.
struct GateTensor {
  GateKind kind = GateKind::I;
  std::vector<double> params;
  Eigen::MatrixXcd matrix;
  int num_qubits = 0;
  std::vector<int> control_slots;
  bool is_diagonal = false;

  bool is_control_slot(int slot) const;
};

GateTensor gate_matrix(GateKind kind, std::span<const double> params = {});

/// True iff every off-diagonal entry has magnitude below `tol`.
bool is_diagonal_matrix(const Eigen::MatrixXcd& m, double tol = 1e-15);

/// Sub-matrix of a `num_slots`-slot operator with `fixed_slots[i]` pinned to
/// bit `values[i]` on both rows and columns; remaining slots keep their order.
/// Only meaningful when the operator is block diagonal in the fixed slots
/// (they are controls, or the operator is diagonal).
Eigen::MatrixXcd restrict_slots(const Eigen::MatrixXcd& m, int num_slots, std::span<const int> fixed_slots,
                                std::span<const int> values);

/// Largest oracle-scale register size accepted by kron_embed and the dense
/// simulator.
inline constexpr int kMaxDenseQubits = 14;

/// Dense 2^d x 2^d embedding of `gate` acting on `qubit_slots` (one qubit per
/// gate slot). Qubit 0 is the leftmost Kronecker factor, i.e. the most
/// significant bit of the basis index.
Eigen::MatrixXcd kron_embed(const GateTensor& gate, std::span<const int> qubit_slots, int d);

}  // namespace qpart
