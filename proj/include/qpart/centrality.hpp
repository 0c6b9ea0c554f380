#pragma once

#include "qpart/graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace qpart {

/// Directed view of a contraction graph used for centrality: vertex i has
/// critical-path length `level[i]`, and `downstream[i]` lists vertices sharing
/// an edge with i at a higher level. Edge weight is |level[u] - level[v]|.
struct ReachGraph {
  std::vector<int> ids;                      // caller-visible id of each vertex
  std::vector<int> level;
  std::vector<std::vector<int>> downstream;  // vertex indices, ascending

  std::size_t size() const { return level.size(); }
  int add_vertex(int id, int lvl);
  void add_edge(int from, int to);
};

/// All tensor nodes of `graph` (Output excluded).
ReachGraph reach_graph(const ContractionGraph& graph);

/// Reach graph of `gates` applied in order to a fresh state vector with one
/// barrier per qubit line in front of the first gate on that line. Vertex ids:
/// state vector = -1, barrier of line q = -2 - q, gate k = gate_ids[k].
ReachGraph suffix_reach_graph(int num_qubits, std::span<const std::vector<int>> gate_qubits,
                              std::span<const int> gate_ids);

class CycleDetected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReachInfo {
  std::map<int, std::int64_t> rn;  // reachable id -> shortest distance
  std::int64_t dist = 0;

  std::size_t size() const { return rn.size(); }
  friend bool operator==(const ReachInfo&, const ReachInfo&) = default;
};

/// Downstream neighbours of node `v`: nodes consuming one of v's output dims
/// (the synthetic Output node is not a tensor and is excluded).
std::vector<int> downstream_neighbors(const ContractionGraph& graph, int v);

/// Backward traversal merging the neighbours' distance maps (min per target).
/// Result is indexed like `g`; map keys are `g.ids`.
std::vector<ReachInfo> compute_reach(const ReachGraph& g);

/// Independent oracle: Dijkstra from every vertex over downstream edges.
std::vector<ReachInfo> compute_reach_bruteforce(const ReachGraph& g);

/// cc = (|RN|/dist) * (|RN|/N), 0 for an empty reachable set.
double closeness_value(std::size_t reach_size, std::int64_t dist, std::size_t total_nodes);

struct CentralityEntry {
  ReachInfo reach;
  double cc = 0.0;
};

struct CentralityTable {
  std::size_t total_nodes = 0;
  std::map<int, CentralityEntry> entries;  // keyed by node id

  double cc(int id) const { return entries.at(id).cc; }
};

CentralityTable closeness(const ReachGraph& g);
CentralityTable closeness(const ContractionGraph& graph);

/// Closeness of every vertex, indexed like `g`, without materialising the
/// distance maps. Requires every downstream edge to strictly increase level,
/// in which case all u->x paths weigh level[x] - level[u]; falls back to
/// compute_reach otherwise.
std::vector<double> closeness_scores(const ReachGraph& g);

nlohmann::json centrality_to_json(const CentralityTable& table);

}  // namespace qpart
