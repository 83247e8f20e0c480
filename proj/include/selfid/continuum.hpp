#pragma once

// Continuum detection. A set of memories forms a continuum when every pair is
// linked by a chain of hops, each no longer than epsilon. On a finite graph
// connectedness and path-connectedness coincide, so one traversal certifies both.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "selfid/spaces.hpp"

namespace selfid {

struct EpsilonGraph {
  double epsilon = 0.0;
  std::vector<MemoryId> node_ids;
  // Sorted neighbour indices; no self loops.
  std::vector<std::vector<std::size_t>> adjacency;

  std::size_t size() const { return node_ids.size(); }

  bool adjacent(std::size_t i, std::size_t j) const {
    const auto& row = adjacency[i];
    return std::binary_search(row.begin(), row.end(), j);
  }

  std::size_t edge_count() const {
    std::size_t e = 0;
    for (const auto& row : adjacency) e += row.size();
    return e / 2;
  }

  std::size_t index_of(const MemoryId& id) const {
    auto it = std::find(node_ids.begin(), node_ids.end(), id);
    if (it == node_ids.end()) throw std::invalid_argument("unknown memory id '" + id + "'");
    return static_cast<std::size_t>(it - node_ids.begin());
  }
};

struct ContinuumReport {
  double epsilon = 0.0;
  // Each component lists ids in input order; components ordered by first member.
  std::vector<std::vector<MemoryId>> components;
  bool is_single_continuum = false;
  std::map<std::pair<MemoryId, MemoryId>, std::vector<MemoryId>> witness_paths;

  std::size_t largest_component_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < components.size(); ++i)
      if (components[i].size() > components[best].size()) best = i;
    return best;
  }
};

inline std::vector<MemoryId> default_node_ids(std::size_t n) {
  std::vector<MemoryId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return ids;
}

inline EpsilonGraph build_epsilon_graph(const DistanceMatrix& d, double epsilon,
                                        std::vector<MemoryId> ids = {}) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const std::size_t n = d.size();
  if (ids.empty()) ids = default_node_ids(n);
  if (ids.size() != n) throw std::invalid_argument("node id count does not match distance matrix");
  EpsilonGraph g{epsilon, std::move(ids), std::vector<std::vector<std::size_t>>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) throw std::invalid_argument("distance matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (d(i, j) != d(j, i)) {
        std::ostringstream os;
        os << "distance matrix is not symmetric at (" << i << ", " << j << ")";
        throw std::invalid_argument(os.str());
      }
      if (d(i, j) <= epsilon) {
        g.adjacency[i].push_back(j);
        g.adjacency[j].push_back(i);
      }
    }
  }
  for (auto& row : g.adjacency) std::sort(row.begin(), row.end());
  return g;
}

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned> rank_;
};

}  // namespace detail

// Component labels per node, numbered by first appearance.
inline std::vector<std::size_t> component_labels(const EpsilonGraph& g) {
  const std::size_t n = g.size();
  detail::DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : g.adjacency[i])
      if (j > i) sets.unite(i, j);
  std::vector<std::size_t> label(n);
  std::map<std::size_t, std::size_t> root_to_label;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = root_to_label.try_emplace(sets.find(i), root_to_label.size());
    label[i] = it->second;
  }
  return label;
}

inline ContinuumReport connected_components(const EpsilonGraph& g) {
  const auto label = component_labels(g);
  ContinuumReport report;
  report.epsilon = g.epsilon;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (label[i] == report.components.size()) report.components.emplace_back();
    report.components[label[i]].push_back(g.node_ids[i]);
  }
  report.is_single_continuum = report.components.size() == 1;
  return report;
}

// Shortest hop-count path from a to b; among shortest paths, the
// lexicographically smallest id sequence. nullopt when b is unreachable.
inline std::optional<std::vector<MemoryId>> witness_path(const EpsilonGraph& g, const MemoryId& a,
                                                         const MemoryId& b) {
  const std::size_t src = g.index_of(a);
  const std::size_t dst = g.index_of(b);
  constexpr std::size_t unreached = std::numeric_limits<std::size_t>::max();

  // Hop distances to the destination, then greedy smallest-id descent from the source.
  std::vector<std::size_t> hops(g.size(), unreached);
  std::deque<std::size_t> queue{dst};
  hops[dst] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v : g.adjacency[u])
      if (hops[v] == unreached) {
        hops[v] = hops[u] + 1;
        queue.push_back(v);
      }
  }
  if (hops[src] == unreached) return std::nullopt;

  std::vector<MemoryId> path{g.node_ids[src]};
  std::size_t cur = src;
  while (cur != dst) {
    std::size_t next = unreached;
    for (std::size_t v : g.adjacency[cur])
      if (hops[v] + 1 == hops[cur] && (next == unreached || g.node_ids[v] < g.node_ids[next]))
        next = v;
    cur = next;
    path.push_back(g.node_ids[cur]);
  }
  return path;
}

inline std::vector<MemoryId> ids_of(std::span<const Memory> memories) {
  std::vector<MemoryId> ids;
  ids.reserve(memories.size());
  for (const auto& m : memories) ids.push_back(m.id);
  return ids;
}

inline ContinuumReport check_condition_1(std::span<const Memory> memories,
                                         const MemoryMetricConfig& cfg, double epsilon) {
  const auto d = pairwise_distance_matrix(memories, cfg);
  return connected_components(build_epsilon_graph(d, epsilon, ids_of(memories)));
}

// Largest edge of a minimum spanning tree: the smallest epsilon under which the
// whole set is one continuum. Zero for a single memory.
inline double minimal_connecting_epsilon(const DistanceMatrix& d) {
  const std::size_t n = d.size();
  if (n <= 1) return 0.0;
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<bool> in_tree(n, false);
  best[0] = 0.0;
  double max_edge = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t u = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!in_tree[i] && (u == n || best[i] < best[u])) u = i;
    in_tree[u] = true;
    max_edge = std::max(max_edge, best[u]);
    for (std::size_t v = 0; v < n; ++v)
      if (!in_tree[v] && d(u, v) < best[v]) best[v] = d(u, v);
  }
  return max_edge;
}

}  // namespace selfid
