#include "qpart/partitioner.hpp"

#include <algorithm>
#include <optional>
#include <tuple>

namespace qpart {

MemoryHierarchy MemoryHierarchy::from_budgets(std::span<const int> local_qubits) {
  static constexpr std::string_view kNames[] = {"distributed", "shared", "register"};
  MemoryHierarchy h;
  for (std::size_t k = 0; k < local_qubits.size(); ++k) {
    h.levels.push_back(MemoryLevel{
        k < std::size(kNames) ? std::string(kNames[k]) : "level" + std::to_string(k), local_qubits[k]});
  }
  return h;
}

std::vector<int> MemoryHierarchy::budgets() const {
  std::vector<int> out;
  for (const auto& l : levels) out.push_back(l.local_qubits);
  return out;
}

void MemoryHierarchy::validate(int num_qubits) const {
  if (levels.empty()) throw InvalidHierarchy("memory hierarchy has no levels");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const int l = levels[k].local_qubits;
    if (l <= 0 || l > num_qubits) {
      throw InvalidHierarchy("level " + std::to_string(k) + " budget " + std::to_string(l) +
                             " outside [1, " + std::to_string(num_qubits) + "]");
    }
    if (k > 0 && l > levels[k - 1].local_qubits) {
      throw InvalidHierarchy("level " + std::to_string(k) + " budget exceeds the level above");
    }
  }
}

bool Partition::is_passthrough(int gate) const {
  return std::find(passthrough.begin(), passthrough.end(), gate) != passthrough.end();
}

std::vector<const Partition*> PartitionTree::leaves() const {
  std::vector<const Partition*> out;
  const auto visit = [&](const auto& self, const Partition& p) -> void {
    if (p.children.empty()) {
      out.push_back(&p);
      return;
    }
    for (const auto& c : p.children) self(self, c);
  };
  for (const auto& c : children) visit(visit, c);
  return out;
}

std::vector<int> required_slots(const GateTensor& gate) {
  std::vector<int> out;
  if (gate.is_diagonal) return out;
  for (int s = 0; s < gate.num_qubits; ++s) {
    if (!gate.is_control_slot(s)) out.push_back(s);
  }
  return out;
}

bool can_pass_through(const GateTensor& gate, std::span<const int> nonlocal_slots) {
  if (gate.is_diagonal) return true;
  return std::all_of(nonlocal_slots.begin(), nonlocal_slots.end(),
                     [&](int s) { return gate.is_control_slot(s); });
}

namespace {

class ForwardPass {
 public:
  ForwardPass(int num_qubits, std::span<const PartitionGate> gates)
      : num_qubits_(num_qubits), gates_(gates) {}

  /// Partitions `pending` (gate ids in dependency order) choosing lines among
  /// `candidates`. `first_scores`, when given, holds cc by gate id for the
  /// first frontier.
  std::vector<Partition> run(std::vector<int> pending, const std::vector<int>& candidates, int budget,
                             int level, const std::vector<double>* first_scores) const {
    const int width = std::min<int>(budget, static_cast<int>(candidates.size()));
    for (int id : pending) {
      const auto req = required_slots(gate(id).tensor);
      if (static_cast<int>(req.size()) > width) {
        throw BudgetTooSmall("gate " + std::to_string(id) + " (" +
                             std::string(gate_name(gate(id).tensor.kind)) + ") needs " +
                             std::to_string(req.size()) + " resident qubit(s) but level " +
                             std::to_string(level) + " holds " + std::to_string(width));
      }
    }

    std::vector<Partition> out;
    std::vector<int> prev_local;
    while (!pending.empty()) {
      const auto scores = (out.empty() && first_scores) ? pick(*first_scores, pending)
                                                        : suffix_scores(pending);
      const auto local = select_lines(pending, scores, candidates, width, prev_local);
      out.push_back(absorb(pending, local, level));
      prev_local = local;
    }
    return out;
  }

 private:
  const PartitionGate& gate(int id) const { return gates_[static_cast<std::size_t>(id)]; }

  static std::vector<double> pick(const std::vector<double>& by_id, const std::vector<int>& pending) {
    std::vector<double> out;
    out.reserve(pending.size());
    for (int id : pending) out.push_back(by_id.at(static_cast<std::size_t>(id)));
    return out;
  }

  /// cc of each pending gate on the suffix graph with a fresh barrier row.
  std::vector<double> suffix_scores(const std::vector<int>& pending) const {
    std::vector<std::vector<int>> qubits;
    qubits.reserve(pending.size());
    for (int id : pending) qubits.push_back(gate(id).qubits);
    const auto g = suffix_reach_graph(num_qubits_, qubits, pending);
    const auto cc = closeness_scores(g);
    const std::size_t first_gate = 1 + static_cast<std::size_t>(num_qubits_);
    return {cc.begin() + static_cast<std::ptrdiff_t>(first_gate), cc.end()};
  }

  std::vector<int> select_lines(const std::vector<int>& pending, const std::vector<double>& scores,
                                const std::vector<int>& candidates, int width,
                                const std::vector<int>& prev_local) const {
    const auto d = static_cast<std::size_t>(num_qubits_);
    std::vector<double> demand(d, -1.0), touch(d, -1.0);
    for (std::size_t k = 0; k < pending.size(); ++k) {
      const auto& g = gate(pending[k]);
      const auto req = required_slots(g.tensor);
      for (int s = 0; s < g.tensor.num_qubits; ++s) {
        const auto q = static_cast<std::size_t>(g.qubits[static_cast<std::size_t>(s)]);
        touch[q] = std::max(touch[q], scores[k]);
        if (std::find(req.begin(), req.end(), s) != req.end()) demand[q] = std::max(demand[q], scores[k]);
      }
    }

    std::vector<char> chosen(d, 0);
    std::vector<int> local;
    const auto& head = gate(pending.front());
    for (int s : required_slots(head.tensor)) {
      const int q = head.qubits[static_cast<std::size_t>(s)];
      if (std::find(candidates.begin(), candidates.end(), q) == candidates.end()) {
        throw std::logic_error("required line " + std::to_string(q) + " is not a candidate");
      }
      chosen[static_cast<std::size_t>(q)] = 1;
      local.push_back(q);
    }

    std::vector<int> rest;
    for (int q : candidates) {
      if (!chosen[static_cast<std::size_t>(q)]) rest.push_back(q);
    }
    const auto was_local = [&](int q) {
      return std::find(prev_local.begin(), prev_local.end(), q) != prev_local.end();
    };
    std::sort(rest.begin(), rest.end(), [&](int a, int b) {
      const auto ai = static_cast<std::size_t>(a), bi = static_cast<std::size_t>(b);
      return std::make_tuple(-demand[ai], -touch[ai], !was_local(a), a) <
             std::make_tuple(-demand[bi], -touch[bi], !was_local(b), b);
    });
    for (int q : rest) {
      if (static_cast<int>(local.size()) >= width) break;
      local.push_back(q);
    }
    std::sort(local.begin(), local.end());
    return local;
  }

  /// Moves every dependency-ready gate that is local or passes through from
  /// `pending` into a new partition.
  Partition absorb(std::vector<int>& pending, const std::vector<int>& local, int level) const {
    Partition p;
    p.level = level;
    p.local_dims = local;
    std::vector<char> resident(static_cast<std::size_t>(num_qubits_), 0);
    for (int q : local) resident[static_cast<std::size_t>(q)] = 1;
    for (int q = 0; q < num_qubits_; ++q) {
      if (!resident[static_cast<std::size_t>(q)]) p.global_dims.push_back(q);
    }

    std::vector<char> blocked(static_cast<std::size_t>(num_qubits_), 0);
    std::vector<int> remaining;
    std::vector<int> nonlocal;
    for (int id : pending) {
      const auto& g = gate(id);
      const auto block = [&] {
        for (int q : g.qubits) blocked[static_cast<std::size_t>(q)] = 1;
        remaining.push_back(id);
      };
      if (std::any_of(g.qubits.begin(), g.qubits.end(),
                      [&](int q) { return blocked[static_cast<std::size_t>(q)] != 0; })) {
        block();
        continue;
      }
      nonlocal.clear();
      for (int s = 0; s < g.tensor.num_qubits; ++s) {
        if (!resident[static_cast<std::size_t>(g.qubits[static_cast<std::size_t>(s)])]) nonlocal.push_back(s);
      }
      if (nonlocal.empty()) {
        p.gates.push_back(id);
      } else if (can_pass_through(g.tensor, nonlocal)) {
        p.gates.push_back(id);
        p.passthrough.push_back(id);
      } else {
        block();
      }
    }
    pending = std::move(remaining);
    return p;
  }

  int num_qubits_;
  std::span<const PartitionGate> gates_;
};

std::vector<PartitionGate> collect_gates(const ContractionGraph& graph) {
  std::vector<const TensorNode*> nodes;
  for (int id : graph.order()) {
    if (graph.node(id).role == NodeRole::Gate) nodes.push_back(&graph.node(id));
  }
  std::vector<PartitionGate> gates(nodes.size());
  for (const auto* n : nodes) {
    const auto k = static_cast<std::size_t>(n->op_index);
    if (n->op_index < 0 || k >= gates.size()) throw std::logic_error("gate node without a valid op index");
    gates[k] = PartitionGate{*n->gate, n->qubits};
  }
  return gates;
}

std::vector<int> gate_order(const ContractionGraph& graph) {
  std::vector<int> out;
  for (int id : graph.order()) {
    if (graph.node(id).role == NodeRole::Gate) out.push_back(graph.node(id).op_index);
  }
  return out;
}

std::vector<double> scores_by_gate(const CentralityTable& table, const ContractionGraph& graph,
                                   std::size_t num_gates) {
  std::vector<double> out(num_gates, 0.0);
  for (const auto& n : graph.nodes()) {
    if (n.role == NodeRole::Gate) {
      const auto it = table.entries.find(n.id);
      if (it != table.entries.end()) out[static_cast<std::size_t>(n.op_index)] = it->second.cc;
    }
  }
  return out;
}

std::vector<int> all_lines(int d) {
  std::vector<int> out(static_cast<std::size_t>(d));
  for (int q = 0; q < d; ++q) out[static_cast<std::size_t>(q)] = q;
  return out;
}

void refine(const ForwardPass& pass, Partition& parent, const MemoryHierarchy& h) {
  const auto next = static_cast<std::size_t>(parent.level + 1);
  if (next >= h.levels.size()) return;
  parent.children =
      pass.run(parent.gates, parent.local_dims, h.levels[next].local_qubits, parent.level + 1, nullptr);
  for (auto& c : parent.children) refine(pass, c, h);
}

nlohmann::json partition_json(const Partition& p) {
  nlohmann::json j{{"level", p.level},
                   {"local_dims", p.local_dims},
                   {"global_dims", p.global_dims},
                   {"gates", p.gates},
                   {"passthrough", p.passthrough}};
  auto children = nlohmann::json::array();
  for (const auto& c : p.children) children.push_back(partition_json(c));
  j["children"] = std::move(children);
  return j;
}

}  // namespace

std::vector<Partition> forward_pass(const ContractionGraph& graph, const CentralityTable& centrality,
                                    int local_budget) {
  const auto gates = collect_gates(graph);
  const auto scores = scores_by_gate(centrality, graph, gates.size());
  const ForwardPass pass(graph.num_qubits(), gates);
  return pass.run(gate_order(graph), all_lines(graph.num_qubits()), local_budget, 0, &scores);
}

PartitionTree partition(const ContractionGraph& graph, const MemoryHierarchy& hierarchy) {
  PartitionTree tree;
  tree.num_qubits = graph.num_qubits();
  tree.hierarchy = hierarchy;
  tree.gates = collect_gates(graph);
  if (tree.num_qubits > 0) hierarchy.validate(tree.num_qubits);
  if (tree.gates.empty()) return tree;

  const auto barriered = insert_barriers(graph, Cut::at_start(graph.num_qubits()));
  const auto rg = reach_graph(barriered);
  const auto cc = closeness_scores(rg);
  std::vector<double> first(tree.gates.size(), 0.0);
  for (std::size_t v = 0; v < rg.size(); ++v) {
    const auto& n = barriered.node(rg.ids[v]);
    if (n.role == NodeRole::Gate) first[static_cast<std::size_t>(n.op_index)] = cc[v];
  }

  const ForwardPass pass(tree.num_qubits, tree.gates);
  tree.children = pass.run(gate_order(graph), all_lines(tree.num_qubits),
                           hierarchy.levels.front().local_qubits, 0, &first);
  for (auto& p : tree.children) refine(pass, p, hierarchy);
  return tree;
}

nlohmann::json tree_to_json(const PartitionTree& tree) {
  nlohmann::json j;
  j["d"] = tree.num_qubits;
  auto levels = nlohmann::json::array();
  for (const auto& l : tree.hierarchy.levels) {
    levels.push_back({{"name", l.name}, {"local_qubits", l.local_qubits}});
  }
  j["hierarchy"] = std::move(levels);
  auto gates = nlohmann::json::array();
  for (std::size_t i = 0; i < tree.gates.size(); ++i) {
    const auto& g = tree.gates[i];
    gates.push_back({{"id", i},
                     {"gate", gate_name(g.tensor.kind)},
                     {"params", g.tensor.params},
                     {"qubits", g.qubits}});
  }
  j["gates"] = std::move(gates);
  auto parts = nlohmann::json::array();
  for (const auto& p : tree.children) parts.push_back(partition_json(p));
  j["partitions"] = std::move(parts);
  j["num_leaves"] = tree.leaves().size();
  return j;
}

}  // namespace qpart
