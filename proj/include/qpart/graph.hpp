#pragma once

#include "qpart/gates.hpp"
#include "qpart/qasm.hpp"

#include <json.hpp>

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpart {

/// Edge label: qubit line (subscript) and time step (superscript).
struct DimIndex {
  int qubit = 0;
  int step = 0;

  friend auto operator<=>(const DimIndex&, const DimIndex&) = default;
};

enum class NodeRole { StateVector, Gate, Barrier, Output };

std::string_view role_name(NodeRole role);

struct TensorNode {
  int id = 0;
  NodeRole role = NodeRole::Gate;
  std::optional<GateTensor> gate;   // Gate and Barrier nodes only
  std::vector<int> qubits;          // slot order
  int op_index = -1;                // position in the source circuit, gates only
  std::vector<DimIndex> in_dims;
  std::vector<DimIndex> out_dims;
  int level = 0;                    // critical-path length l
};

struct EdgeEnds {
  int producer = -1;
  int consumer = -1;
};

class InvalidCut : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotAdjacent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidCircuit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor-contraction graph of a circuit. Node ids index `nodes()`. Every
/// DimIndex has exactly one producer and one consumer; the free output dims
/// are consumed by the synthetic Output node.
class ContractionGraph {
 public:
  int num_qubits() const { return num_qubits_; }
  const std::vector<TensorNode>& nodes() const { return nodes_; }
  const TensorNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::map<DimIndex, EdgeEnds>& edges() const { return edges_; }
  /// Construction order: state vector, then tensors in a dependency-respecting
  /// order, then Output.
  const std::vector<int>& order() const { return order_; }
  int state_node() const { return order_.front(); }
  int output_node() const { return order_.back(); }

  /// Count of nodes other than the synthetic Output node.
  std::size_t num_tensor_nodes() const { return nodes_.size() - 1; }
  std::size_t num_gate_nodes() const;
  std::size_t num_barrier_nodes() const;
  /// Highest step index on each qubit line (the free output dim).
  std::vector<int> final_steps() const;

 private:
  friend class GraphBuilder;

  int num_qubits_ = 0;
  std::vector<TensorNode> nodes_;
  std::map<DimIndex, EdgeEnds> edges_;
  std::vector<int> order_;
};

/// Throws InvalidCircuit when `validate(circuit)` reports diagnostics.
ContractionGraph build_graph(const Circuit& circuit);

/// Barrier positions: qubit line -> step of the edge the barrier is placed on.
/// Step s means the barrier consumes (q, s) and everything downstream on q
/// shifts by one step.
struct Cut {
  std::map<int, int> steps;

  /// A cut at step 0 on every line.
  static Cut at_start(int num_qubits);
};

ContractionGraph insert_barriers(const ContractionGraph& graph, const Cut& cut);

/// Contracts every barrier away; node ids are compacted.
ContractionGraph remove_barriers(const ContractionGraph& graph);

/// |l_u - l_v| for two nodes sharing a dimension.
int edge_weight(const ContractionGraph& graph, int u, int v);

nlohmann::json graph_to_json(const ContractionGraph& graph);
std::string graph_to_dot(const ContractionGraph& graph);

}  // namespace qpart
