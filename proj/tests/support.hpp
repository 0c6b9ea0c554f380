#pragma once

#include "qpart/centrality.hpp"
#include "qpart/executor.hpp"
#include "qpart/gates.hpp"
#include "qpart/graph.hpp"
#include "qpart/partitioner.hpp"
#include "qpart/qasm.hpp"

#include <algorithm>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace qpart::test {

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_angle(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng);
}

inline std::vector<int> distinct_qubits(std::mt19937_64& rng, int d, int k) {
  std::vector<int> all(static_cast<std::size_t>(d));
  for (int q = 0; q < d; ++q) all[static_cast<std::size_t>(q)] = q;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(k));
  return all;
}

inline std::vector<GateKind> all_gate_kinds() {
  return {GateKind::H,  GateKind::X,  GateKind::Y,  GateKind::Z,  GateKind::S,  GateKind::Sdg, GateKind::T,
          GateKind::Tdg, GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::P,  GateKind::U,   GateKind::CX,
          GateKind::CZ, GateKind::CP, GateKind::SWAP, GateKind::CCX};
}

inline GateApp random_gate(std::mt19937_64& rng, GateKind kind, std::vector<int> qubits) {
  GateApp g;
  g.kind = kind;
  g.qubits = std::move(qubits);
  for (int i = 0; i < gate_num_params(kind); ++i) g.params.push_back(uniform_angle(rng));
  return g;
}

/// Uniform over the gate set restricted to arity <= d.
inline Circuit random_circuit(std::mt19937_64& rng, int d, int num_gates) {
  Circuit c;
  c.num_qubits = d;
  std::vector<GateKind> kinds;
  for (auto k : all_gate_kinds()) {
    if (gate_arity(k) <= d) kinds.push_back(k);
  }
  for (int i = 0; i < num_gates && d > 0; ++i) {
    const auto k = kinds[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(kinds.size()) - 1))];
    c.ops.push_back(random_gate(rng, k, distinct_qubits(rng, d, gate_arity(k))));
  }
  return c;
}

/// Diagonal gates anywhere plus cx/ccx whose targets stay inside `targets`.
inline Circuit passthrough_circuit(std::mt19937_64& rng, int d, int num_gates, const std::vector<int>& targets) {
  Circuit c;
  c.num_qubits = d;
  const std::vector<GateKind> diag{GateKind::RZ, GateKind::P, GateKind::CZ, GateKind::CP};
  for (int i = 0; i < num_gates; ++i) {
    const int pick = uniform_int(rng, 0, 5);
    if (pick < 4) {
      const auto k = diag[static_cast<std::size_t>(pick)];
      c.ops.push_back(random_gate(rng, k, distinct_qubits(rng, d, gate_arity(k))));
      continue;
    }
    const int t = targets[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(targets.size()) - 1))];
    std::vector<int> others;
    for (int q = 0; q < d; ++q) {
      if (q != t) others.push_back(q);
    }
    std::shuffle(others.begin(), others.end(), rng);
    if (pick == 4 || d < 3) {
      c.ops.push_back(random_gate(rng, GateKind::CX, {others[0], t}));
    } else {
      c.ops.push_back(random_gate(rng, GateKind::CCX, {others[0], others[1], t}));
    }
  }
  return c;
}

/// Random layered DAG: every edge goes to a strictly higher level.
inline ReachGraph random_layered_graph(std::mt19937_64& rng, int max_nodes) {
  ReachGraph g;
  const int n = uniform_int(rng, 0, max_nodes);
  int level = 0;
  for (int i = 0; i < n; ++i) {
    if (uniform_int(rng, 0, 2) == 0) level += uniform_int(rng, 1, 3);
    g.add_vertex(1000 + 7 * i, level);
  }
  for (int v = 0; v < n; ++v) {
    const int edges = uniform_int(rng, 0, 3);
    for (int e = 0; e < edges; ++e) {
      const int w = uniform_int(rng, 0, n - 1);
      if (g.level[static_cast<std::size_t>(w)] > g.level[static_cast<std::size_t>(v)]) g.add_edge(v, w);
    }
  }
  return g;
}

/// Most resident lines any single gate of `c` needs.
inline int max_required(const Circuit& c) {
  std::size_t m = 0;
  for (const auto& op : c.ops) m = std::max(m, required_slots(gate_matrix(op.kind, op.params)).size());
  return static_cast<int>(m);
}

inline void check_partition(const PartitionTree& tree, const Partition& p, std::vector<std::string>& errors) {
  const auto budget = tree.hierarchy.levels.at(static_cast<std::size_t>(p.level)).local_qubits;
  if (static_cast<int>(p.local_dims.size()) > budget) {
    errors.push_back("level " + std::to_string(p.level) + " partition holds " + std::to_string(p.local_dims.size()) +
                     " > " + std::to_string(budget) + " lines");
  }
  const std::set<int> local(p.local_dims.begin(), p.local_dims.end());
  for (int id : p.gates) {
    const auto& g = tree.gates.at(static_cast<std::size_t>(id));
    std::vector<int> nonlocal;
    for (std::size_t s = 0; s < g.qubits.size(); ++s) {
      if (!local.count(g.qubits[s])) nonlocal.push_back(static_cast<int>(s));
    }
    const bool listed = std::find(p.passthrough.begin(), p.passthrough.end(), id) != p.passthrough.end();
    if (nonlocal.empty() && listed) errors.push_back("local gate " + std::to_string(id) + " marked passthrough");
    if (!nonlocal.empty() && (!listed || !can_pass_through(g.tensor, nonlocal))) {
      errors.push_back("gate " + std::to_string(id) + " touches a global line without passing through");
    }
  }
  if (!p.children.empty()) {
    std::vector<int> concat;
    for (const auto& c : p.children) {
      if (c.level != p.level + 1) errors.push_back("child level mismatch");
      for (int q : c.local_dims) {
        if (!local.count(q)) errors.push_back("child keeps a line its parent does not");
      }
      concat.insert(concat.end(), c.gates.begin(), c.gates.end());
      check_partition(tree, c, errors);
    }
    auto expected = p.gates;
    std::sort(concat.begin(), concat.end());
    std::sort(expected.begin(), expected.end());
    if (concat != expected) errors.push_back("children do not cover the parent's gates");
  } else if (static_cast<std::size_t>(p.level) + 1 != tree.depth()) {
    errors.push_back("leaf above the deepest level");
  }
}

/// Budget, residency, coverage and topological-order checks. Empty when the
/// tree is sound.
inline std::vector<std::string> tree_violations(const PartitionTree& tree, const Circuit& c) {
  std::vector<std::string> errors;
  for (const auto& p : tree.children) check_partition(tree, p, errors);
  std::vector<int> seen;
  for (const auto* leaf : tree.leaves()) seen.insert(seen.end(), leaf->gates.begin(), leaf->gates.end());
  std::vector<int> sorted = seen;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != static_cast<int>(i)) {
      errors.push_back("leaf gates are not a permutation of the circuit");
      break;
    }
  }
  if (sorted.size() != c.ops.size()) errors.push_back("leaf gate count differs from circuit");
  // Per-line program order is the whole dependency relation.
  std::vector<int> last(static_cast<std::size_t>(c.num_qubits), -1);
  for (int id : seen) {
    if (id < 0 || static_cast<std::size_t>(id) >= c.ops.size()) continue;
    for (int q : c.ops[static_cast<std::size_t>(id)].qubits) {
      if (last[static_cast<std::size_t>(q)] > id) errors.push_back("gate " + std::to_string(id) + " runs too early");
      last[static_cast<std::size_t>(q)] = id;
    }
  }
  return errors;
}

inline OracleState random_state(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n;
  OracleState s(static_cast<Eigen::Index>(std::uint64_t{1} << d));
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = Complex{n(rng), n(rng)};
  return s / s.norm();
}

}  // namespace qpart::test
