#pragma once

#include "qpart/centrality.hpp"
#include "qpart/gates.hpp"
#include "qpart/graph.hpp"

#include <json.hpp>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpart {

struct MemoryLevel {
  std::string name;
  int local_qubits = 0;
};

/// Level 0 is distributed memory; deeper levels are smaller and faster.
struct MemoryHierarchy {
  std::vector<MemoryLevel> levels;

  /// Levels named distributed/shared/register/level<k>, outermost first.
  static MemoryHierarchy from_budgets(std::span<const int> local_qubits);
  std::vector<int> budgets() const;
  /// Throws InvalidHierarchy unless 0 < L_k <= d and L_{k+1} <= L_k.
  void validate(int num_qubits) const;
};

class InvalidHierarchy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A group of gates executed while `local_dims` are resident at `level`.
/// Gate ids are indices into PartitionTree::gates (the circuit op order).
struct Partition {
  int level = 0;
  std::vector<int> gates;         // execution order
  std::vector<int> local_dims;    // ascending
  std::vector<int> global_dims;   // ascending complement over all qubits
  std::vector<int> passthrough;   // subset of `gates` touching a global dim
  std::vector<Partition> children;

  bool is_passthrough(int gate) const;
};

struct PartitionGate {
  GateTensor tensor;
  std::vector<int> qubits;
};

struct PartitionTree {
  int num_qubits = 0;
  MemoryHierarchy hierarchy;
  std::vector<PartitionGate> gates;
  std::vector<Partition> children;   // level-0 partitions

  /// Leaves in pre-order; their gate lists concatenate to the execution order.
  std::vector<const Partition*> leaves() const;
  std::size_t depth() const { return hierarchy.levels.size(); }
};

/// Slots of `gate` that must be resident for it to execute: none for a
/// diagonal gate, every non-control slot otherwise.
std::vector<int> required_slots(const GateTensor& gate);

/// Whether `gate` can run with `nonlocal_slots` not resident: it is diagonal,
/// or every nonlocal slot is a control.
bool can_pass_through(const GateTensor& gate, std::span<const int> nonlocal_slots);

/// Greedy level-0 pass over the whole graph. `centrality` scores the first
/// frontier; later frontiers get barriers re-inserted and are re-scored on the
/// remaining suffix.
std::vector<Partition> forward_pass(const ContractionGraph& graph, const CentralityTable& centrality,
                                    int local_budget);

PartitionTree partition(const ContractionGraph& graph, const MemoryHierarchy& hierarchy);

nlohmann::json tree_to_json(const PartitionTree& tree);

}  // namespace qpart
