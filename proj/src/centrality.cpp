#include "qpart/centrality.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <limits>
#include <queue>

namespace qpart {

int ReachGraph::add_vertex(int id, int lvl) {
  ids.push_back(id);
  level.push_back(lvl);
  downstream.emplace_back();
  return static_cast<int>(level.size()) - 1;
}

void ReachGraph::add_edge(int from, int to) {
  auto& out = downstream[static_cast<std::size_t>(from)];
  const auto it = std::lower_bound(out.begin(), out.end(), to);
  if (it == out.end() || *it != to) out.insert(it, to);
}

std::vector<int> downstream_neighbors(const ContractionGraph& graph, int v) {
  std::vector<int> out;
  for (const auto& dim : graph.node(v).out_dims) {
    const int c = graph.edges().at(dim).consumer;
    if (graph.node(c).role != NodeRole::Output) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ReachGraph reach_graph(const ContractionGraph& graph) {
  ReachGraph g;
  std::map<int, int> index;
  for (int id : graph.order()) {
    const auto& n = graph.node(id);
    if (n.role != NodeRole::Output) index[id] = g.add_vertex(id, n.level);
  }
  for (const auto& [id, vi] : index) {
    for (int w : downstream_neighbors(graph, id)) g.add_edge(vi, index.at(w));
  }
  return g;
}

ReachGraph suffix_reach_graph(int num_qubits, std::span<const std::vector<int>> gate_qubits,
                              std::span<const int> gate_ids) {
  ReachGraph g;
  const int sv = g.add_vertex(-1, 0);
  std::vector<int> last(static_cast<std::size_t>(num_qubits));
  for (int q = 0; q < num_qubits; ++q) {
    last[static_cast<std::size_t>(q)] = g.add_vertex(-2 - q, 1);
    g.add_edge(sv, last[static_cast<std::size_t>(q)]);
  }
  for (std::size_t k = 0; k < gate_qubits.size(); ++k) {
    int lvl = 0;
    for (int q : gate_qubits[k]) lvl = std::max(lvl, g.level[static_cast<std::size_t>(last[static_cast<std::size_t>(q)])]);
    const int v = g.add_vertex(gate_ids[k], lvl + 1);
    for (int q : gate_qubits[k]) {
      g.add_edge(last[static_cast<std::size_t>(q)], v);
      last[static_cast<std::size_t>(q)] = v;
    }
  }
  return g;
}

namespace {

/// Vertices such that every downstream edge points to a later entry.
std::vector<int> topological_order(const ReachGraph& g) {
  const std::size_t n = g.size();
  std::vector<int> indegree(n, 0);
  for (const auto& out : g.downstream) {
    for (int w : out) ++indegree[static_cast<std::size_t>(w)];
  }
  std::vector<int> order;
  order.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) order.push_back(static_cast<int>(v));
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (int w : g.downstream[static_cast<std::size_t>(order[head])]) {
      if (--indegree[static_cast<std::size_t>(w)] == 0) order.push_back(w);
    }
  }
  if (order.size() != n) throw CycleDetected("reach graph contains a cycle");
  return order;
}

std::int64_t weight(const ReachGraph& g, int u, int v) {
  return std::abs(g.level[static_cast<std::size_t>(u)] - g.level[static_cast<std::size_t>(v)]);
}

}  // namespace

std::vector<ReachInfo> compute_reach(const ReachGraph& g) {
  const auto order = topological_order(g);
  // Keyed by vertex index while merging, translated to ids at the end.
  std::vector<std::map<int, std::int64_t>> rn(g.size());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    auto& merged = rn[static_cast<std::size_t>(v)];
    const auto relax = [&](int target, std::int64_t d) {
      const auto [pos, inserted] = merged.try_emplace(target, d);
      if (!inserted && d < pos->second) pos->second = d;
    };
    for (int w : g.downstream[static_cast<std::size_t>(v)]) {
      const std::int64_t hop = weight(g, v, w);
      relax(w, hop);
      for (const auto& [x, dx] : rn[static_cast<std::size_t>(w)]) relax(x, hop + dx);
    }
  }
  std::vector<ReachInfo> out(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    for (const auto& [x, dx] : rn[v]) {
      out[v].rn.emplace(g.ids[static_cast<std::size_t>(x)], dx);
      out[v].dist += dx;
    }
  }
  return out;
}

std::vector<ReachInfo> compute_reach_bruteforce(const ReachGraph& g) {
  constexpr auto kInf = std::numeric_limits<std::int64_t>::max();
  std::vector<ReachInfo> out(g.size());
  using Item = std::pair<std::int64_t, int>;
  for (std::size_t src = 0; src < g.size(); ++src) {
    std::vector<std::int64_t> best(g.size(), kInf);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    best[src] = 0;
    pq.emplace(0, static_cast<int>(src));
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (d != best[static_cast<std::size_t>(u)]) continue;
      for (int w : g.downstream[static_cast<std::size_t>(u)]) {
        const std::int64_t nd = d + weight(g, u, w);
        if (nd < best[static_cast<std::size_t>(w)]) {
          best[static_cast<std::size_t>(w)] = nd;
          pq.emplace(nd, w);
        }
      }
    }
    for (std::size_t x = 0; x < g.size(); ++x) {
      if (x != src && best[x] != kInf) {
        out[src].rn.emplace(g.ids[x], best[x]);
        out[src].dist += best[x];
      }
    }
  }
  return out;
}

double closeness_value(std::size_t reach_size, std::int64_t dist, std::size_t total_nodes) {
  if (reach_size == 0 || dist <= 0 || total_nodes == 0) return 0.0;
  const double r = static_cast<double>(reach_size);
  return (r / static_cast<double>(dist)) * (r / static_cast<double>(total_nodes));
}

CentralityTable closeness(const ReachGraph& g) {
  auto reach = compute_reach(g);
  CentralityTable t;
  t.total_nodes = g.size();
  for (std::size_t v = 0; v < g.size(); ++v) {
    CentralityEntry e;
    e.cc = closeness_value(reach[v].size(), reach[v].dist, t.total_nodes);
    e.reach = std::move(reach[v]);
    t.entries.emplace(g.ids[v], std::move(e));
  }
  return t;
}

CentralityTable closeness(const ContractionGraph& graph) { return closeness(reach_graph(graph)); }

std::vector<double> closeness_scores(const ReachGraph& g) {
  const std::size_t n = g.size();
  for (std::size_t v = 0; v < n; ++v) {
    for (int w : g.downstream[v]) {
      if (g.level[static_cast<std::size_t>(w)] <= g.level[v]) {
        const auto reach = compute_reach(g);
        std::vector<double> cc(n);
        for (std::size_t u = 0; u < n; ++u) cc[u] = closeness_value(reach[u].size(), reach[u].dist, n);
        return cc;
      }
    }
  }

  // Levels strictly increase along edges, so descending level is a reverse
  // topological order and distances telescope.
  std::vector<int> order(n);
  for (std::size_t v = 0; v < n; ++v) order[v] = static_cast<int>(v);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return g.level[static_cast<std::size_t>(a)] > g.level[static_cast<std::size_t>(b)];
  });

  const std::size_t words = (n + 63) / 64;
  std::vector<std::uint64_t> bits(n * words, 0);
  std::vector<double> cc(n, 0.0);
  for (int v : order) {
    const auto vi = static_cast<std::size_t>(v);
    std::uint64_t* mine = &bits[vi * words];
    for (int w : g.downstream[vi]) {
      const auto wi = static_cast<std::size_t>(w);
      const std::uint64_t* theirs = &bits[wi * words];
      for (std::size_t k = 0; k < words; ++k) mine[k] |= theirs[k];
      mine[wi / 64] |= std::uint64_t{1} << (wi % 64);
    }
    std::size_t count = 0;
    std::int64_t level_sum = 0;
    for (std::size_t k = 0; k < words; ++k) {
      for (std::uint64_t word = mine[k]; word != 0; word &= word - 1) {
        const std::size_t x = k * 64 + static_cast<std::size_t>(std::countr_zero(word));
        level_sum += g.level[x];
        ++count;
      }
    }
    const std::int64_t dist = level_sum - static_cast<std::int64_t>(count) * g.level[vi];
    cc[vi] = closeness_value(count, dist, n);
  }
  return cc;
}

nlohmann::json centrality_to_json(const CentralityTable& table) {
  nlohmann::json j;
  j["N"] = table.total_nodes;
  nlohmann::json nodes = nlohmann::json::object();
  for (const auto& [id, e] : table.entries) {
    nlohmann::json rn = nlohmann::json::object();
    for (const auto& [x, dx] : e.reach.rn) rn[std::to_string(x)] = dx;
    nodes[std::to_string(id)] = {{"rn", std::move(rn)},
                                 {"size", e.reach.size()},
                                 {"dist", e.reach.dist},
                                 {"cc", e.cc}};
  }
  j["nodes"] = std::move(nodes);
  return j;
}

}  // namespace qpart
