#include "qpart/plan.hpp"

#include "qpart/circuits.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace qpart;

namespace {

ExecutionPlan plan_for(const Circuit& c, std::vector<int> budgets) {
  return lower(partition(build_graph(c), MemoryHierarchy::from_budgets(budgets)));
}

Circuit ghz3() { return parse_qasm("qreg q[3]; h q[0]; cx q[0],q[1]; cx q[1],q[2];"); }

std::vector<TaskKind> kinds(const ExecutionPlan& p) {
  std::vector<TaskKind> out;
  for (const auto& t : p.tasks) out.push_back(t.kind());
  return out;
}

/// Alloc, one remap to `next_local`, Free.
ExecutionPlan remap_plan(const Layout& start, const std::vector<int>& next_local) {
  ExecutionPlan plan;
  plan.num_qubits = start.num_qubits;
  plan.num_global = start.num_global;
  plan.phases.push_back(start);
  const auto r = infer_reshape(start, next_local);
  plan.phases.push_back(r.next);
  std::vector<int> block_bits;
  for (const auto& s : r.swaps) block_bits.push_back(s[1]);
  plan.tasks.push_back(Task{0, {}, AllocPayload{0}});
  plan.tasks.push_back(Task{1, {0}, PackPayload{0, block_bits}});
  plan.tasks.push_back(Task{2, {1}, ExchangePayload{0, 1, r.swaps, r.block_size()}});
  plan.tasks.push_back(Task{3, {2}, UnpackPayload{1, block_bits}});
  plan.tasks.push_back(Task{4, {3}, FreePayload{}});
  return plan;
}

}  // namespace

TEST(Plan, Ghz3TaskList) {
  const auto plan = plan_for(ghz3(), {2});
  EXPECT_EQ(kinds(plan), (std::vector<TaskKind>{TaskKind::Alloc, TaskKind::ApplyFused, TaskKind::Pack,
                                                 TaskKind::Exchange, TaskKind::Unpack, TaskKind::ApplyFused,
                                                 TaskKind::Free}));
  EXPECT_EQ(plan.count(TaskKind::Exchange), 1u);
  EXPECT_EQ(plan.num_ranks(), 2);
  const auto& first = std::get<FusedKernel>(plan.tasks[1].payload);
  ASSERT_EQ(first.ops.size(), 2u);
  EXPECT_EQ(first.ops[0].kind, GateKind::H);
  EXPECT_EQ(first.ops[1].kind, GateKind::CX);
  const auto& second = std::get<FusedKernel>(plan.tasks[5].payload);
  ASSERT_EQ(second.ops.size(), 1u);
  EXPECT_EQ(second.ops[0].qubits, (std::vector<int>{1, 2}));
  for (std::size_t i = 1; i < plan.tasks.size(); ++i) {
    EXPECT_EQ(plan.tasks[i].deps, std::vector<int>{static_cast<int>(i) - 1});
  }
  EXPECT_NO_THROW(validate_plan(plan));
}

TEST(Plan, SingleLeafHasNoExchange) {
  const auto plan = plan_for(generate_circuit("qft", 5), {5});
  EXPECT_EQ(plan.count(TaskKind::Exchange), 0u);
  EXPECT_EQ(plan.count(TaskKind::ApplyFused), 1u);
}

TEST(Plan, ExchangeCountMatchesFrontierChanges) {
  for (const auto& fam : circuit_families()) {
    const auto c = generate_circuit(fam, 6, 3);
    const auto tree = partition(build_graph(c), MemoryHierarchy::from_budgets(std::vector<int>{4}));
    std::size_t changes = 0;
    for (std::size_t i = 1; i < tree.children.size(); ++i) {
      if (tree.children[i].local_dims != tree.children[i - 1].local_dims) ++changes;
    }
    for (const auto& p : tree.children) EXPECT_EQ(p.local_dims.size(), 4u) << fam;
    EXPECT_EQ(lower(tree).count(TaskKind::Exchange), changes) << fam;
  }
}

TEST(Plan, CanonicalLayout) {
  const std::vector<int> local{0, 1};
  const auto l = Layout::canonical(3, local);
  EXPECT_EQ(l.bit_of_qubit, (std::vector<int>{1, 0, 2}));
  EXPECT_EQ(l.local_qubits(), local);
  EXPECT_TRUE(l.is_global(2));
  EXPECT_EQ(l.qubit_at(2), 2);
  // With no global qubits the order is the dense qubit-0-first order.
  const std::vector<int> all{0, 1, 2};
  EXPECT_EQ(Layout::canonical(3, all).bit_of_qubit, (std::vector<int>{2, 1, 0}));
}

TEST(Plan, InferReshapeIdentity) {
  const std::vector<int> local{0, 1};
  const auto l = Layout::canonical(3, local);
  const auto r = infer_reshape(l, local);
  EXPECT_TRUE(r.swaps.empty());
  EXPECT_EQ(r.next, l);
}

TEST(Plan, InferReshapeGhz3) {
  const std::vector<int> local{0, 1}, next{1, 2};
  const auto l = Layout::canonical(3, local);
  const auto r = infer_reshape(l, next);
  ASSERT_EQ(r.swaps.size(), 1u);
  // Qubit 2 (global bit 2) trades with qubit 0 (local bit 1).
  EXPECT_EQ(r.swaps[0], (std::array<int, 2>{2, 1}));
  EXPECT_EQ(r.next.bit_of_qubit, (std::vector<int>{2, 0, 1}));
  EXPECT_EQ(r.block_size(), 2u);  // half of each 4-amplitude rank block
  const auto t = block_transfers(r.swaps, 2, 1);
  std::size_t cross = 0;
  for (const auto& x : t) cross += x.src_rank != x.dst_rank;
  EXPECT_EQ(cross, 2u);
}

TEST(Plan, AllToAllWhenBothGlobalsSwap) {
  const std::vector<int> local{0, 1}, next{2, 3};
  const auto l = Layout::canonical(4, local);
  const auto r = infer_reshape(l, next);
  ASSERT_EQ(r.swaps.size(), 2u);
  EXPECT_EQ(r.block_size(), 1u);
  const auto t = block_transfers(r.swaps, 2, 2);
  std::map<int, std::set<int>> dests;
  for (const auto& x : t) dests[x.src_rank].insert(x.dst_rank);
  for (int rank = 0; rank < 4; ++rank) EXPECT_EQ(dests[rank].size(), 4u);
  // Every (dst, block) slot is filled exactly once.
  std::set<std::pair<int, std::uint64_t>> slots;
  for (const auto& x : t) EXPECT_TRUE(slots.insert({x.dst_rank, x.dst_block}).second);
}

// A remap alone must not change the represented state.
TEST(Plan, RemapPreservesDenseState) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = test::uniform_int(rng, 2, 8);
    const int g = test::uniform_int(rng, 1, d - 1);
    auto start = test::distinct_qubits(rng, d, d - g);
    std::sort(start.begin(), start.end());
    auto next = test::distinct_qubits(rng, d, d - g);
    std::sort(next.begin(), next.end());
    const auto layout = Layout::canonical(d, start);
    const auto plan = remap_plan(layout, next);
    ASSERT_NO_THROW(validate_plan(plan));
    RunOptions opts;
    opts.initial_state = test::random_state(rng, d);
    const auto result = run_plan(plan, opts);
    EXPECT_EQ(result.state.layout.local_qubits(), next);
    EXPECT_EQ((gather(result.state) - *opts.initial_state).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Plan, FuseLocalKernel) {
  const auto plan = plan_for(ghz3(), {2});
  const auto& k = std::get<FusedKernel>(plan.tasks[1].payload);
  for (const auto& op : k.ops) EXPECT_EQ(op.mode, FusedMode::Local);
  EXPECT_EQ(k.tile_bits.size(), 2u);
}

TEST(Plan, FuseGlobalControl) {
  // Qubit 2 stays global while cx(2,0) runs.
  const auto c = parse_qasm("qreg q[3]; h q[0]; cx q[2],q[0];");
  const auto plan = plan_for(c, {1});
  ASSERT_EQ(plan.count(TaskKind::Exchange), 0u);
  const auto& k = std::get<FusedKernel>(plan.tasks[1].payload);
  ASSERT_EQ(k.ops.size(), 2u);
  EXPECT_EQ(k.ops[1].mode, FusedMode::RankControlled);
  EXPECT_EQ(k.ops[1].rank_mask, 1u);
  EXPECT_EQ(k.ops[1].rank_value, 1u);
}

TEST(Plan, FuseGlobalPhase) {
  const double alpha = 0.9;
  const auto c = parse_qasm("qreg q[3]; h q[0]; p(0.9) q[2];");
  const auto plan = plan_for(c, {1});
  const auto& k = std::get<FusedKernel>(plan.tasks[1].payload);
  ASSERT_EQ(k.ops.size(), 2u);
  EXPECT_EQ(k.ops[1].mode, FusedMode::RankDiagonal);
  ASSERT_EQ(k.ops[1].phase_table.size(), 2u);
  EXPECT_EQ(k.ops[1].phase_table[0], std::vector<Complex>{Complex(1.0, 0.0)});
  EXPECT_NEAR(std::abs(k.ops[1].phase_table[1][0] - std::exp(Complex(0.0, -alpha))), 0.0, 1e-15);
}

TEST(Plan, JsonRoundTripIsByteIdentical) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = test::uniform_int(rng, 3, 8);
    const auto c = test::random_circuit(rng, d, test::uniform_int(rng, 1, 40));
    const int need = std::max(1, test::max_required(c));
    const int l0 = test::uniform_int(rng, std::max(need, 1), d);
    const auto plan = plan_for(c, {l0, std::max(need, l0 - 1)});
    const auto text = plan_to_json(plan).dump();
    const auto back = plan_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(back, plan);
    EXPECT_EQ(plan_to_json(back).dump(), text);
  }
}

TEST(Plan, JsonSchemaFields) {
  const auto j = plan_to_json(plan_for(ghz3(), {2}));
  EXPECT_EQ(j.at("version").get<int>(), 1);
  EXPECT_EQ(j.at("d").get<int>(), 3);
  EXPECT_EQ(j.at("g").get<int>(), 1);
  EXPECT_EQ(j.at("layout_phases").size(), 2u);
  const auto& t = j.at("tasks").at(3);
  EXPECT_EQ(t.at("kind").get<std::string>(), "Exchange");
  EXPECT_TRUE(t.contains("id") && t.contains("deps") && t.contains("payload"));
}

TEST(Plan, StructuralInvariantsOnRandomPlans) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = test::uniform_int(rng, 2, 9);
    const auto c = test::random_circuit(rng, d, test::uniform_int(rng, 0, 50));
    const int need = std::max(1, test::max_required(c));
    const auto plan = plan_for(c, {test::uniform_int(rng, need, d)});
    ASSERT_NO_THROW(validate_plan(plan));
    for (const auto& layout : plan.phases) {
      std::vector<int> bits = layout.bit_of_qubit;
      std::sort(bits.begin(), bits.end());
      for (int i = 0; i < d; ++i) EXPECT_EQ(bits[static_cast<std::size_t>(i)], i);
    }
    // Leaf gate order is preserved across the ApplyFused sequence.
    std::vector<int> fused;
    for (const auto& t : plan.tasks) {
      if (t.kind() != TaskKind::ApplyFused) continue;
      for (const auto& op : std::get<FusedKernel>(t.payload).ops) fused.push_back(op.gate);
    }
    EXPECT_EQ(fused.size(), c.ops.size());
  }
}

TEST(Plan, ValidateRejectsBrokenPlans) {
  auto plan = plan_for(ghz3(), {2});
  auto bad_dep = plan;
  bad_dep.tasks[1].deps = {5};
  EXPECT_THROW(validate_plan(bad_dep), PlanInvalid);
  auto no_pack = plan;
  no_pack.tasks.erase(no_pack.tasks.begin() + 2);
  for (std::size_t i = 0; i < no_pack.tasks.size(); ++i) no_pack.tasks[i].id = static_cast<int>(i);
  EXPECT_THROW(validate_plan(no_pack), PlanInvalid);
  auto bad_layout = plan;
  bad_layout.phases[0].bit_of_qubit = {0, 0, 1};
  EXPECT_THROW(validate_plan(bad_layout), PlanInvalid);
  auto bad_block = plan;
  std::get<ExchangePayload>(bad_block.tasks[3].payload).block_size = 4;
  EXPECT_THROW(validate_plan(bad_block), PlanInvalid);
}
