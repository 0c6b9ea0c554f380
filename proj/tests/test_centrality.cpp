#include "qpart/centrality.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace qpart;

namespace {

ReachGraph chain(int n) {
  ReachGraph g;
  for (int i = 0; i < n; ++i) g.add_vertex(i, i);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

int node_for_op(const ContractionGraph& g, int op) {
  for (const auto& n : g.nodes()) {
    if (n.role == NodeRole::Gate && n.op_index == op) return n.id;
  }
  return -1;
}

ReachGraph random_circuit_graph(std::mt19937_64& rng) {
  const int d = test::uniform_int(rng, 1, 10);
  const auto c = test::random_circuit(rng, d, test::uniform_int(rng, 0, 120));
  auto g = build_graph(c);
  if (test::uniform_int(rng, 0, 1)) g = insert_barriers(g, Cut::at_start(d));
  return reach_graph(g);
}

}  // namespace

TEST(Centrality, ChainReach) {
  const auto g = chain(3);
  const auto r = compute_reach(g);
  EXPECT_EQ(r[0].rn, (std::map<int, std::int64_t>{{1, 1}, {2, 2}}));
  EXPECT_EQ(r[0].dist, 3);
  EXPECT_TRUE(r[2].rn.empty());
  EXPECT_EQ(r[2].dist, 0);
}

TEST(Centrality, ChainCloseness) {
  const auto t = closeness(chain(3));
  EXPECT_EQ(t.total_nodes, 3u);
  EXPECT_NEAR(t.cc(0), 4.0 / 9.0, 1e-15);
  EXPECT_EQ(t.cc(2), 0.0);
}

TEST(Centrality, ChainDecreasesTowardSink) {
  const auto t = closeness(chain(8));
  for (int i = 0; i + 1 < 8; ++i) EXPECT_GT(t.cc(i), t.cc(i + 1));
}

TEST(Centrality, IsolatedNode) {
  ReachGraph g;
  g.add_vertex(42, 0);
  const auto t = closeness(g);
  EXPECT_EQ(t.cc(42), 0.0);
}

TEST(Centrality, EmptyGraph) {
  const ReachGraph g;
  EXPECT_TRUE(compute_reach(g).empty());
  EXPECT_TRUE(compute_reach_bruteforce(g).empty());
  EXPECT_TRUE(closeness(g).entries.empty());
}

TEST(Centrality, DisconnectedComponents) {
  ReachGraph g;
  for (int i = 0; i < 4; ++i) g.add_vertex(i, i % 2);
  g.add_edge(0, 1);
  g.add_edge(2, 3);
  const auto r = compute_reach_bruteforce(g);
  EXPECT_EQ(r[0].rn, (std::map<int, std::int64_t>{{1, 1}}));
  EXPECT_EQ(r[2].rn, (std::map<int, std::int64_t>{{3, 1}}));
  EXPECT_EQ(compute_reach(g), r);
}

TEST(Centrality, CycleDetected) {
  ReachGraph g;
  g.add_vertex(0, 0);
  g.add_vertex(1, 1);
  g.add_edge(0, 1);
  g.add_edge(1, 0);
  EXPECT_THROW(compute_reach(g), CycleDetected);
}

TEST(Centrality, Ghz3Neighbours) {
  const auto g = build_graph(parse_qasm("qreg q[3]; h q[0]; cx q[0],q[1]; cx q[1],q[2];"));
  const int h = node_for_op(g, 0), cx01 = node_for_op(g, 1), cx12 = node_for_op(g, 2);
  auto nd = downstream_neighbors(g, g.state_node());
  std::sort(nd.begin(), nd.end());
  std::vector<int> expected{h, cx01, cx12};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(nd, expected);
  EXPECT_EQ(downstream_neighbors(g, h), std::vector<int>{cx01});
  EXPECT_TRUE(downstream_neighbors(g, cx12).empty());
}

TEST(Centrality, Ghz3TableMatchesOracle) {
  const auto g = reach_graph(build_graph(parse_qasm("qreg q[3]; h q[0]; cx q[0],q[1]; cx q[1],q[2];")));
  EXPECT_EQ(g.size(), 4u);
  EXPECT_EQ(compute_reach(g), compute_reach_bruteforce(g));
}

// Exact equality of the merge against Dijkstra, and the closeness formula,
// on random circuit graphs and on random layered DAGs.
TEST(Centrality, ReachMatchesBruteForce) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto g = trial % 2 ? random_circuit_graph(rng) : test::random_layered_graph(rng, 500);
    ASSERT_LE(g.size(), 500u);
    const auto fast = compute_reach(g);
    const auto slow = compute_reach_bruteforce(g);
    ASSERT_EQ(fast, slow) << "trial " << trial;

    const auto table = closeness(g);
    const auto scores = closeness_scores(g);
    for (std::size_t v = 0; v < g.size(); ++v) {
      std::int64_t dist = 0;
      for (const auto& [w, dv] : slow[v].rn) dist += dv;
      ASSERT_EQ(dist, slow[v].dist);
      const double k = static_cast<double>(slow[v].rn.size());
      const double expected = k == 0 ? 0.0 : (k / static_cast<double>(dist)) * (k / static_cast<double>(g.size()));
      EXPECT_NEAR(table.cc(g.ids[v]), expected, 1e-12);
      EXPECT_NEAR(scores[v], expected, 1e-12);
    }
  }
}

TEST(Centrality, RelabelInvariance) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = test::random_layered_graph(rng, 80);
    std::vector<int> perm(g.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    std::shuffle(perm.begin(), perm.end(), rng);
    // Vertex i of g becomes vertex perm[i] of h with a fresh id.
    ReachGraph h;
    std::vector<int> inverse(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) inverse[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
    for (std::size_t j = 0; j < g.size(); ++j) {
      h.add_vertex(5000 - static_cast<int>(j), g.level[static_cast<std::size_t>(inverse[j])]);
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (int w : g.downstream[i]) h.add_edge(perm[i], perm[static_cast<std::size_t>(w)]);
    }
    const auto a = closeness(g), b = closeness(h);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_EQ(a.cc(g.ids[i]), b.cc(h.ids[static_cast<std::size_t>(perm[i])]));
    }
  }
}

TEST(Centrality, NewSinkNeverShrinksReach) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = test::random_layered_graph(rng, 60);
    if (g.size() == 0) continue;
    const auto before = compute_reach(g);
    const int v = test::uniform_int(rng, 0, static_cast<int>(g.size()) - 1);
    const int sink = g.add_vertex(-7, g.level[static_cast<std::size_t>(v)] + 1);
    g.add_edge(v, sink);
    const auto after = compute_reach(g);
    EXPECT_GE(after[static_cast<std::size_t>(v)].size(), before[static_cast<std::size_t>(v)].size() + 1);
  }
}

TEST(Centrality, SuffixGraphMatchesBarrierGraph) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = test::uniform_int(rng, 1, 7);
    const auto c = test::random_circuit(rng, d, test::uniform_int(rng, 0, 40));
    std::vector<std::vector<int>> qubits;
    std::vector<int> ids;
    for (std::size_t i = 0; i < c.ops.size(); ++i) {
      qubits.push_back(c.ops[i].qubits);
      ids.push_back(static_cast<int>(i));
    }
    const auto suffix = suffix_reach_graph(d, qubits, ids);
    const auto full = insert_barriers(build_graph(c), Cut::at_start(d));
    const auto reference = reach_graph(full);
    ASSERT_EQ(suffix.size(), reference.size());

    const auto ours = closeness(suffix);
    const auto theirs = closeness(reference);
    for (const auto& n : full.nodes()) {
      if (n.role == NodeRole::Gate) {
        EXPECT_NEAR(ours.cc(n.op_index), theirs.cc(n.id), 1e-15);
      } else if (n.role == NodeRole::Barrier) {
        EXPECT_NEAR(ours.cc(-2 - n.qubits[0]), theirs.cc(n.id), 1e-15);
      } else if (n.role == NodeRole::StateVector) {
        EXPECT_NEAR(ours.cc(-1), theirs.cc(n.id), 1e-15);
      }
    }
  }
}

TEST(Centrality, CountsExcludeOutput) {
  const auto g = build_graph(parse_qasm("qreg q[2]; h q[0]; cx q[0],q[1];"));
  const auto t = closeness(g);
  EXPECT_EQ(t.total_nodes, g.num_tensor_nodes());
  EXPECT_EQ(t.entries.count(g.output_node()), 0u);
}

TEST(Centrality, JsonKeyedById) {
  const auto t = closeness(chain(3));
  const auto j = centrality_to_json(t);
  EXPECT_TRUE(j.dump().find("\"0\"") != std::string::npos);
}
