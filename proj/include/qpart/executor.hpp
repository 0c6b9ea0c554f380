#pragma once

#include "qpart/plan.hpp"
#include "qpart/qasm.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace qpart {

/// Dense amplitudes, basis index read with qubit 0 most significant.
using OracleState = Eigen::VectorXcd;

/// Per-rank amplitude blocks under `layout`.
struct DistState {
  int num_qubits = 0;
  int num_global = 0;
  int phase = 0;
  Layout layout;
  std::vector<Eigen::VectorXcd> blocks;

  double norm_squared() const;
};

/// Point-to-point block messages between simulated ranks.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(int src, int dst, std::uint64_t tag, std::vector<Complex> data) = 0;
  virtual std::vector<Complex> receive(int dst, int src, std::uint64_t tag) = 0;
  /// Every send issued before the barrier is receivable after it.
  virtual void barrier() {}
};

/// Mailbox transport for ranks living in one process.
class InProcessTransport final : public Transport {
 public:
  void send(int src, int dst, std::uint64_t tag, std::vector<Complex> data) override;
  std::vector<Complex> receive(int dst, int src, std::uint64_t tag) override;

  std::uint64_t amplitudes_sent() const { return amplitudes_sent_; }
  std::size_t pending() const { return mailbox_.size(); }

 private:
  std::map<std::tuple<int, int, std::uint64_t>, std::vector<Complex>> mailbox_;
  std::uint64_t amplitudes_sent_ = 0;
};

class DimensionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonUnitaryDrift : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sequential reference simulator starting from |0...0>.
OracleState oracle_simulate(const Circuit& circuit);

DistState scatter(const OracleState& state, const Layout& layout);
OracleState gather(const DistState& state);

/// min over unit-modulus phi of max_i |a_i - phi b_i|, with phi taken from the
/// largest-magnitude amplitude of `a`.
double compare(const OracleState& a, const OracleState& b);

using Histogram = std::map<std::string, std::uint64_t>;

struct ExchangeStats {
  int task = 0;
  std::uint64_t amplitudes_per_pair = 0;
  std::uint64_t amplitudes_moved = 0;   // across ranks, all pairs
  std::uint64_t bytes_moved = 0;
};

struct PhaseTiming {
  int phase = 0;
  double compute_seconds = 0.0;
  double exchange_seconds = 0.0;   // Pack/Exchange/Unpack entering this phase
};

struct RunStats {
  double compute_seconds = 0.0;
  double exchange_seconds = 0.0;
  std::map<TaskKind, std::size_t> task_counts;
  std::vector<ExchangeStats> exchanges;
  std::vector<PhaseTiming> phases;
  double max_norm_drift = 0.0;   // worst |norm^2 - initial| after an ApplyFused
};

struct RunOptions {
  std::optional<std::uint64_t> shots;
  std::uint64_t seed = 0;
  std::optional<OracleState> initial_state;   // scattered with phase 0
};

struct RunResult {
  DistState state;
  std::optional<Histogram> histogram;
  RunStats stats;
};

RunResult run_plan(const ExecutionPlan& plan, const RunOptions& options = {});
RunResult run_plan(const ExecutionPlan& plan, const RunOptions& options, Transport& transport);

/// Seeded sampling of basis states; keys are bitstrings with qubit 0 first.
Histogram sample(const OracleState& state, std::uint64_t shots, std::uint64_t seed);

/// Exact probabilities for nonzero amplitudes, keyed like `sample`.
std::map<std::string, double> probabilities(const OracleState& state, double cutoff = 1e-15);

std::string bitstring(std::uint64_t index, int num_qubits);

nlohmann::json histogram_to_json(const Histogram& h);

}  // namespace qpart
