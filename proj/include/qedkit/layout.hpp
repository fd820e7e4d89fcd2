#pragma once

// Coupling graphs (heavy-hex and user-supplied), shortest paths, layered
// entangling schedules, and type-0 parity-check flag placement.

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qedkit {

struct LayoutError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class CouplingGraph {
 public:
  CouplingGraph() = default;
  explicit CouplingGraph(int n) : adj_(static_cast<size_t>(n)) {}

  int n_nodes() const { return static_cast<int>(adj_.size()); }

  void add_edge(int a, int b) {
    if (a == b) throw LayoutError("self-loop");
    if (a < 0 || b < 0 || a >= n_nodes() || b >= n_nodes()) throw LayoutError("node out of range");
    if (has_edge(a, b)) return;
    adj_[static_cast<size_t>(a)].push_back(b);
    adj_[static_cast<size_t>(b)].push_back(a);
    std::sort(adj_[static_cast<size_t>(a)].begin(), adj_[static_cast<size_t>(a)].end());
    std::sort(adj_[static_cast<size_t>(b)].begin(), adj_[static_cast<size_t>(b)].end());
  }

  bool has_edge(int a, int b) const {
    const auto& na = adj_.at(static_cast<size_t>(a));
    return std::binary_search(na.begin(), na.end(), b);
  }

  const std::vector<int>& neighbors(int a) const { return adj_.at(static_cast<size_t>(a)); }

  int degree(int a) const { return static_cast<int>(neighbors(a).size()); }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < n_nodes(); ++a)
      for (int b : neighbors(a))
        if (a < b) out.emplace_back(a, b);
    return out;
  }

 private:
  std::vector<std::vector<int>> adj_;
};

// Heavy-hex lattice with `rows` long rows of length 4*cols+3, bridge qubits
// between consecutive long rows at every fourth column (offset by two on
// alternating gaps), and the two opposite corner sites trimmed. Node
// numbering is row-major: long row 0, bridges 0-1, long row 1, bridges 1-2,
// and so on. rows=7, cols=3 reproduces the 127-node Eagle-class layout.
inline CouplingGraph heavy_hex(int rows, int cols) {
  if (rows < 1 || cols < 1) throw LayoutError("heavy_hex: rows and cols must be >= 1");
  const int len = 4 * cols + 3;

  // Row r occupies columns [first_col(r), last_col(r)].
  auto first_col = [&](int r) { return (rows > 1 && r == rows - 1) ? 1 : 0; };
  auto last_col = [&](int r) { return (rows > 1 && r == 0) ? len - 2 : len - 1; };

  std::vector<std::vector<int>> row_ids(static_cast<size_t>(rows));
  std::vector<std::map<int, int>> bridge_ids(static_cast<size_t>(std::max(0, rows - 1)));
  int next = 0;
  for (int r = 0; r < rows; ++r) {
    row_ids[static_cast<size_t>(r)].assign(static_cast<size_t>(len), -1);
    for (int col = first_col(r); col <= last_col(r); ++col)
      row_ids[static_cast<size_t>(r)][static_cast<size_t>(col)] = next++;
    if (r + 1 < rows) {
      int offset = (r % 2 == 0) ? 0 : 2;
      for (int col = offset; col < len; col += 4) bridge_ids[static_cast<size_t>(r)][col] = next++;
    }
  }

  CouplingGraph g(next);
  for (int r = 0; r < rows; ++r) {
    const auto& ids = row_ids[static_cast<size_t>(r)];
    for (int col = first_col(r); col < last_col(r); ++col)
      g.add_edge(ids[static_cast<size_t>(col)], ids[static_cast<size_t>(col + 1)]);
    if (r + 1 < rows) {
      for (const auto& [col, id] : bridge_ids[static_cast<size_t>(r)]) {
        int up = ids[static_cast<size_t>(col)];
        int down = row_ids[static_cast<size_t>(r + 1)][static_cast<size_t>(col)];
        if (up >= 0) g.add_edge(up, id);
        if (down >= 0) g.add_edge(id, down);
      }
    }
  }
  return g;
}

inline CouplingGraph path_graph(int n) {
  CouplingGraph g(n);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

// BFS distances from `src`, restricted to `allowed` when non-null.
inline std::vector<int> bfs_distances(const CouplingGraph& g, int src,
                                      const std::vector<bool>* allowed = nullptr) {
  std::vector<int> dist(static_cast<size_t>(g.n_nodes()), -1);
  std::deque<int> queue{src};
  dist[static_cast<size_t>(src)] = 0;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v : g.neighbors(u)) {
      if (allowed && !(*allowed)[static_cast<size_t>(v)]) continue;
      if (dist[static_cast<size_t>(v)] < 0) {
        dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

// Minimal-length simple path from a to b; among shortest paths, returns the
// lexicographically smallest node sequence.
inline std::vector<int> shortest_path(const CouplingGraph& g, int a, int b) {
  if (a < 0 || b < 0 || a >= g.n_nodes() || b >= g.n_nodes())
    throw LayoutError("shortest_path: node out of range");
  if (a == b) return {a};
  std::vector<int> dist_b = bfs_distances(g, b);
  if (dist_b[static_cast<size_t>(a)] < 0) throw LayoutError("shortest_path: disconnected endpoints");
  std::vector<int> path{a};
  int cur = a;
  while (cur != b) {
    int next = -1;
    for (int v : g.neighbors(cur)) {  // neighbors sorted ascending
      if (dist_b[static_cast<size_t>(v)] == dist_b[static_cast<size_t>(cur)] - 1) {
        next = v;
        break;
      }
    }
    path.push_back(next);
    cur = next;
  }
  return path;
}

// One entangling layer: disjoint (parent -> child) CNOT pairs.
using ScheduleLayer = std::vector<std::pair<int, int>>;

// Layered entangling schedule growing out from `root` to cover `data`.
// Each layer is a set of disjoint CNOTs from entangled onto unentangled data
// nodes. Children with the tallest unentangled region behind them are served
// first, which keeps path-like regions at depth equal to the root's
// eccentricity; high-degree forks can exceed it since a parent feeds one
// child per layer.
inline std::vector<ScheduleLayer> bfs_schedule(const CouplingGraph& g, int root,
                                               const std::vector<int>& data) {
  std::vector<bool> in_data(static_cast<size_t>(g.n_nodes()), false);
  for (int q : data) in_data[static_cast<size_t>(q)] = true;
  if (root < 0 || root >= g.n_nodes() || !in_data[static_cast<size_t>(root)])
    throw LayoutError("bfs_schedule: root must be a data node");
  {
    std::vector<int> d = bfs_distances(g, root, &in_data);
    for (int q : data)
      if (d[static_cast<size_t>(q)] < 0) throw LayoutError("bfs_schedule: disconnected data set");
  }

  std::vector<bool> entangled(static_cast<size_t>(g.n_nodes()), false);
  entangled[static_cast<size_t>(root)] = true;
  size_t remaining = data.size() - 1;
  std::vector<std::vector<std::pair<int, int>>> layers;

  while (remaining > 0) {
    // Height of a candidate = its eccentricity within the unentangled region.
    std::vector<bool> unent(static_cast<size_t>(g.n_nodes()), false);
    for (int q : data)
      if (!entangled[static_cast<size_t>(q)]) unent[static_cast<size_t>(q)] = true;

    std::vector<std::pair<int, int>> candidates;  // (-height, node)
    for (int v : data) {
      if (entangled[static_cast<size_t>(v)]) continue;
      bool frontier = false;
      for (int u : g.neighbors(v))
        if (entangled[static_cast<size_t>(u)] && in_data[static_cast<size_t>(u)]) frontier = true;
      if (!frontier) continue;
      std::vector<int> d = bfs_distances(g, v, &unent);
      int height = 0;
      for (int w : data)
        if (unent[static_cast<size_t>(w)]) height = std::max(height, d[static_cast<size_t>(w)]);
      candidates.emplace_back(-height, v);
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<bool> used(static_cast<size_t>(g.n_nodes()), false);
    ScheduleLayer layer;
    for (auto& [neg_h, v] : candidates) {
      if (used[static_cast<size_t>(v)]) continue;
      int parent = -1;
      for (int u : g.neighbors(v)) {
        if (entangled[static_cast<size_t>(u)] && in_data[static_cast<size_t>(u)] &&
            !used[static_cast<size_t>(u)]) {
          parent = u;
          break;
        }
      }
      if (parent < 0) continue;
      used[static_cast<size_t>(parent)] = true;
      used[static_cast<size_t>(v)] = true;
      layer.emplace_back(parent, v);
    }
    if (layer.empty()) throw LayoutError("bfs_schedule: no progress");  // unreachable
    for (auto& [p, v] : layer) entangled[static_cast<size_t>(v)] = true;
    remaining -= layer.size();
    layers.push_back(std::move(layer));
  }
  return layers;
}

struct FlagPlacement {
  int flag = -1;
  std::pair<int, int> checked{-1, -1};
  int s = 0;                    // SWAP count: 0 or 1
  std::vector<int> swap_route;  // length s; type-1: the data node swapped with the flag

  bool operator==(const FlagPlacement&) const = default;
};

// Maximal set of type-0 placements: spare (non-data) nodes adjacent to at
// least two data nodes, taken greedily in ascending node id. The checked pair
// is the two smallest adjacent data ids.
inline std::vector<FlagPlacement> place_type0_flags(const CouplingGraph& g,
                                                    const std::vector<int>& data) {
  std::vector<bool> in_data(static_cast<size_t>(g.n_nodes()), false);
  for (int q : data) in_data[static_cast<size_t>(q)] = true;
  std::vector<FlagPlacement> out;
  for (int v = 0; v < g.n_nodes(); ++v) {
    if (in_data[static_cast<size_t>(v)]) continue;
    std::vector<int> adj_data;
    for (int u : g.neighbors(v))
      if (in_data[static_cast<size_t>(u)]) adj_data.push_back(u);
    if (adj_data.size() < 2) continue;
    out.push_back({v, {adj_data[0], adj_data[1]}, 0, {}});
  }
  return out;
}

inline nlohmann::json to_json(const CouplingGraph& g,
                              const std::map<int, std::string>& roles = {}) {
  nlohmann::json j;
  j["n_nodes"] = g.n_nodes();
  j["edges"] = nlohmann::json::array();
  for (auto [a, b] : g.edges()) j["edges"].push_back({a, b});
  if (!roles.empty()) {
    nlohmann::json r = nlohmann::json::object();
    for (const auto& [node, role] : roles) r[std::to_string(node)] = role;
    j["roles"] = r;
  }
  return j;
}

inline CouplingGraph graph_from_json(const nlohmann::json& j) {
  CouplingGraph g(j.at("n_nodes").get<int>());
  for (const auto& e : j.at("edges")) g.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
  return g;
}

inline std::string to_dot(const CouplingGraph& g, const std::map<int, std::string>& roles = {}) {
  std::ostringstream out;
  out << "graph coupling {\n  node [shape=circle];\n";
  for (int v = 0; v < g.n_nodes(); ++v) {
    out << "  n" << v;
    auto it = roles.find(v);
    if (it != roles.end()) out << " [label=\"" << v << "\\n" << it->second << "\"]";
    out << ";\n";
  }
  for (auto [a, b] : g.edges()) out << "  n" << a << " -- n" << b << ";\n";
  out << "}\n";
  return out.str();
}

}  // namespace qedkit
