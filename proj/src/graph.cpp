#include "qpart/graph.hpp"

#include <algorithm>
#include <sstream>

namespace qpart {

std::string_view role_name(NodeRole role) {
  switch (role) {
    case NodeRole::StateVector:
      return "state";
    case NodeRole::Gate:
      return "gate";
    case NodeRole::Barrier:
      return "barrier";
    case NodeRole::Output:
      return "output";
  }
  return "?";
}

/// Assembles a graph from nodes listed in a dependency-respecting order.
/// Dims, edges and critical-path lengths are derived; ids are taken as given.
class GraphBuilder {
 public:
  GraphBuilder(int num_qubits, std::size_t num_ids) {
    g_.num_qubits_ = num_qubits;
    g_.nodes_.resize(num_ids);
    step_.assign(static_cast<std::size_t>(num_qubits), 0);
    last_.assign(static_cast<std::size_t>(num_qubits), -1);
  }

  void state(int id) {
    TensorNode& n = place(id, NodeRole::StateVector);
    n.level = 0;
    for (int q = 0; q < g_.num_qubits_; ++q) {
      const DimIndex dim{q, 0};
      n.out_dims.push_back(dim);
      g_.edges_[dim].producer = id;
      last_[static_cast<std::size_t>(q)] = id;
    }
  }

  void tensor(int id, NodeRole role, std::optional<GateTensor> gate, std::vector<int> qubits,
              int op_index) {
    TensorNode& n = place(id, role);
    n.gate = std::move(gate);
    n.qubits = std::move(qubits);
    n.op_index = op_index;
    int level = 0;
    for (int q : n.qubits) {
      const auto qi = static_cast<std::size_t>(q);
      const DimIndex in{q, step_[qi]};
      n.in_dims.push_back(in);
      g_.edges_[in].consumer = id;
      level = std::max(level, node(last_[qi]).level);
      const DimIndex out{q, ++step_[qi]};
      n.out_dims.push_back(out);
      g_.edges_[out].producer = id;
      last_[qi] = id;
    }
    n.level = level + 1;
  }

  ContractionGraph finish(int output_id) {
    TensorNode& n = place(output_id, NodeRole::Output);
    int level = 0;
    for (int q = 0; q < g_.num_qubits_; ++q) {
      const auto qi = static_cast<std::size_t>(q);
      const DimIndex in{q, step_[qi]};
      n.in_dims.push_back(in);
      g_.edges_[in].consumer = output_id;
      level = std::max(level, node(last_[qi]).level);
    }
    n.level = level + 1;
    return std::move(g_);
  }

 private:
  TensorNode& node(int id) { return g_.nodes_[static_cast<std::size_t>(id)]; }

  TensorNode& place(int id, NodeRole role) {
    TensorNode& n = node(id);
    n = TensorNode{};
    n.id = id;
    n.role = role;
    g_.order_.push_back(id);
    return n;
  }

  ContractionGraph g_;
  std::vector<int> step_;
  std::vector<int> last_;
};

std::size_t ContractionGraph::num_gate_nodes() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const TensorNode& n) { return n.role == NodeRole::Gate; }));
}

std::size_t ContractionGraph::num_barrier_nodes() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TensorNode& n) {
    return n.role == NodeRole::Barrier;
  }));
}

std::vector<int> ContractionGraph::final_steps() const {
  std::vector<int> steps;
  for (const auto& d : node(output_node()).in_dims) steps.push_back(d.step);
  return steps;
}

ContractionGraph build_graph(const Circuit& circuit) {
  if (const auto diags = validate(circuit); !diags.empty()) {
    throw InvalidCircuit("circuit does not validate: " + diags.front().message);
  }
  const std::size_t n = circuit.ops.size();
  GraphBuilder b(circuit.num_qubits, n + 2);
  b.state(0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& op = circuit.ops[i];
    b.tensor(static_cast<int>(i + 1), NodeRole::Gate, gate_matrix(op.kind, op.params), op.qubits,
             static_cast<int>(i));
  }
  return b.finish(static_cast<int>(n + 1));
}

Cut Cut::at_start(int num_qubits) {
  Cut c;
  for (int q = 0; q < num_qubits; ++q) c.steps[q] = 0;
  return c;
}

ContractionGraph insert_barriers(const ContractionGraph& graph, const Cut& cut) {
  const int d = graph.num_qubits();
  const auto final_steps = graph.final_steps();
  for (const auto& [q, s] : cut.steps) {
    if (q < 0 || q >= d) throw InvalidCut("cut references qubit " + std::to_string(q));
    if (s < 0 || s > final_steps[static_cast<std::size_t>(q)]) {
      throw InvalidCut("cut step " + std::to_string(s) + " does not exist on qubit line " +
                       std::to_string(q));
    }
  }

  std::map<int, int> barrier_id;
  int next_id = static_cast<int>(graph.nodes().size());
  for (const auto& [q, s] : cut.steps) barrier_id[q] = next_id++;

  GraphBuilder b(d, static_cast<std::size_t>(next_id));
  const auto emit_barriers_after = [&](const std::vector<DimIndex>& out_dims) {
    for (const auto& dim : out_dims) {
      const auto it = cut.steps.find(dim.qubit);
      if (it != cut.steps.end() && it->second == dim.step) {
        b.tensor(barrier_id[dim.qubit], NodeRole::Barrier, gate_matrix(GateKind::I), {dim.qubit}, -1);
      }
    }
  };
  for (int id : graph.order()) {
    const auto& n = graph.node(id);
    switch (n.role) {
      case NodeRole::StateVector:
        b.state(id);
        break;
      case NodeRole::Output:
        return b.finish(id);
      default:
        b.tensor(id, n.role, n.gate, n.qubits, n.op_index);
        break;
    }
    emit_barriers_after(n.out_dims);
  }
  throw std::logic_error("contraction graph has no Output node");
}

ContractionGraph remove_barriers(const ContractionGraph& graph) {
  std::vector<int> kept;
  for (int id : graph.order()) {
    if (graph.node(id).role != NodeRole::Barrier) kept.push_back(id);
  }
  GraphBuilder b(graph.num_qubits(), kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& n = graph.node(kept[i]);
    const int id = static_cast<int>(i);
    if (n.role == NodeRole::StateVector) {
      b.state(id);
    } else if (n.role == NodeRole::Output) {
      return b.finish(id);
    } else {
      b.tensor(id, n.role, n.gate, n.qubits, n.op_index);
    }
  }
  throw std::logic_error("contraction graph has no Output node");
}

int edge_weight(const ContractionGraph& graph, int u, int v) {
  const auto& nu = graph.node(u);
  const auto touches = [&](const DimIndex& dim) {
    const auto& e = graph.edges().at(dim);
    return (e.producer == u && e.consumer == v) || (e.producer == v && e.consumer == u);
  };
  const bool adjacent = std::any_of(nu.in_dims.begin(), nu.in_dims.end(), touches) ||
                        std::any_of(nu.out_dims.begin(), nu.out_dims.end(), touches);
  if (!adjacent) {
    throw NotAdjacent("nodes " + std::to_string(u) + " and " + std::to_string(v) +
                      " share no dimension");
  }
  return std::abs(nu.level - graph.node(v).level);
}

namespace {

nlohmann::json dims_json(const std::vector<DimIndex>& dims) {
  auto a = nlohmann::json::array();
  for (const auto& d : dims) a.push_back({d.qubit, d.step});
  return a;
}

std::string node_label(const TensorNode& n) {
  switch (n.role) {
    case NodeRole::StateVector:
      return "psi";
    case NodeRole::Output:
      return "out";
    case NodeRole::Barrier:
      return "I";
    case NodeRole::Gate:
      return std::string(gate_name(n.gate->kind));
  }
  return "?";
}

}  // namespace

nlohmann::json graph_to_json(const ContractionGraph& graph) {
  nlohmann::json j;
  j["d"] = graph.num_qubits();
  auto nodes = nlohmann::json::array();
  for (const auto& n : graph.nodes()) {
    nlohmann::json o{{"id", n.id},
                     {"role", role_name(n.role)},
                     {"l", n.level},
                     {"qubits", n.qubits},
                     {"in_dims", dims_json(n.in_dims)},
                     {"out_dims", dims_json(n.out_dims)}};
    if (n.role == NodeRole::Gate) {
      o["gate"] = gate_name(n.gate->kind);
      o["params"] = n.gate->params;
      o["op_index"] = n.op_index;
    }
    nodes.push_back(std::move(o));
  }
  j["nodes"] = std::move(nodes);
  auto edges = nlohmann::json::array();
  for (const auto& [dim, e] : graph.edges()) {
    edges.push_back(
        {{"qubit", dim.qubit}, {"step", dim.step}, {"producer", e.producer}, {"consumer", e.consumer}});
  }
  j["edges"] = std::move(edges);
  return j;
}

std::string graph_to_dot(const ContractionGraph& graph) {
  std::ostringstream os;
  os << "digraph contraction {\n  rankdir=LR;\n";
  for (int id : graph.order()) {
    const auto& n = graph.node(id);
    os << "  n" << id << " [label=\"" << node_label(n);
    if (!n.qubits.empty()) {
      os << '(';
      for (std::size_t k = 0; k < n.qubits.size(); ++k) os << (k ? "," : "") << n.qubits[k];
      os << ')';
    }
    os << "\\nl=" << n.level << '"';
    if (n.role == NodeRole::Barrier) os << " style=filled fillcolor=gray";
    if (n.role == NodeRole::Output) os << " shape=point";
    os << "];\n";
  }
  for (const auto& [dim, e] : graph.edges()) {
    os << "  n" << e.producer << " -> n" << e.consumer << " [label=\"i^" << dim.step << "_"
       << dim.qubit << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace qpart
