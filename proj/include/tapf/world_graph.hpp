#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tapf/error.hpp"
#include "tapf/rng.hpp"

namespace tapf {

using VertexId = std::int32_t;
using Edge = std::pair<VertexId, VertexId>;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

/// Undirected, unweighted, connected graph of traversable locations.
///
/// Immutable after construction. All-pairs hop distances are computed once in
/// the constructor, so `shortest_dist` is a table lookup and the object can be
/// shared freely between search workers.
class WorldGraph {
 public:
  WorldGraph() = default;

  WorldGraph(int vertex_count, const std::vector<Edge>& edges,
             std::vector<int> regions = {}, std::vector<Point2> coordinates = {})
      : n_(vertex_count),
        adjacency_(static_cast<std::size_t>(std::max(vertex_count, 0))),
        regions_(std::move(regions)),
        coordinates_(std::move(coordinates)) {
    if (n_ < 1) throw InputError("world graph needs at least one vertex");
    for (const auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n_ || v >= n_)
        throw InputError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                         ") references a vertex outside [0, " + std::to_string(n_) + ")");
      if (u == v) throw InputError("self-loop at vertex " + std::to_string(u));
      adjacency_[u].push_back(v);
      adjacency_[v].push_back(u);
    }
    for (auto& adj : adjacency_) {
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    if (regions_.empty()) regions_.assign(n_, 0);
    if (static_cast<int>(regions_.size()) != n_)
      throw InputError("region label count does not match vertex count");
    if (!coordinates_.empty() && static_cast<int>(coordinates_.size()) != n_)
      throw InputError("coordinate count does not match vertex count");
    compute_distances();
  }

  int vertex_count() const { return n_; }

  bool valid(VertexId v) const { return v >= 0 && v < n_; }

  void check_vertex(VertexId v) const {
    if (!valid(v)) throw InputError("invalid vertex id " + std::to_string(v));
  }

  /// Sorted neighbour list; never contains `v` itself.
  const std::vector<VertexId>& neighbors(VertexId v) const {
    check_vertex(v);
    return adjacency_[v];
  }

  bool adjacent(VertexId u, VertexId v) const {
    const auto& adj = neighbors(u);
    return std::binary_search(adj.begin(), adj.end(), v);
  }

  int shortest_dist(VertexId u, VertexId v) const {
    check_vertex(u);
    check_vertex(v);
    return dist_[static_cast<std::size_t>(u) * n_ + v];
  }

  int region(VertexId v) const {
    check_vertex(v);
    return regions_[v];
  }
  const std::vector<int>& regions() const { return regions_; }

  bool has_coordinates() const { return !coordinates_.empty(); }
  const std::vector<Point2>& coordinates() const { return coordinates_; }
  const Point2& coordinate(VertexId v) const {
    check_vertex(v);
    return coordinates_.at(v);
  }

  /// Canonical edge list: u < v, lexicographically sorted.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (VertexId u = 0; u < n_; ++u)
      for (VertexId v : adjacency_[u])
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  std::size_t edge_count() const {
    std::size_t degree_sum = 0;
    for (const auto& adj : adjacency_) degree_sum += adj.size();
    return degree_sum / 2;
  }

 private:
  static constexpr int kUnreached = std::numeric_limits<int>::max();

  void compute_distances() {
    dist_.assign(static_cast<std::size_t>(n_) * n_, kUnreached);
    std::deque<VertexId> frontier;
    for (VertexId s = 0; s < n_; ++s) {
      int* row = &dist_[static_cast<std::size_t>(s) * n_];
      row[s] = 0;
      frontier.assign(1, s);
      while (!frontier.empty()) {
        const VertexId u = frontier.front();
        frontier.pop_front();
        for (VertexId w : adjacency_[u]) {
          if (row[w] != kUnreached) continue;
          row[w] = row[u] + 1;
          frontier.push_back(w);
        }
      }
      if (s == 0) {
        for (VertexId v = 0; v < n_; ++v)
          if (row[v] == kUnreached)
            throw InputError("world graph is not connected (vertex " + std::to_string(v) +
                             " unreachable from 0)");
      }
    }
  }

  int n_ = 0;
  std::vector<std::vector<VertexId>> adjacency_;
  std::vector<int> regions_;
  std::vector<Point2> coordinates_;
  std::vector<int> dist_;
};

struct WorldGenOptions {
  /// Total edges per region as a multiple of its spanning-tree edges.
  double edge_density = 1.3;
  /// Bridge edges between each pair of consecutive regions.
  int bridges_per_pair = 1;
};

namespace detail {

inline VertexId uf_find(std::vector<VertexId>& parent, VertexId x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace detail

/// Procedural world: each region is a random sparse graph laid out on a unit
/// grid (spanning tree over 8-neighbour grid edges plus extra random grid
/// edges), regions placed left to right and joined by bridge edges between the
/// rightmost column of one region and the leftmost column of the next.
inline WorldGraph generate_world(int region_count, int nodes_per_region, std::uint64_t seed,
                                 const WorldGenOptions& options = {}) {
  if (region_count < 1 || nodes_per_region < 1)
    throw ConfigError("generate_world needs region_count >= 1 and nodes_per_region >= 1");
  if (options.edge_density < 1.0) throw ConfigError("edge_density must be >= 1");
  if (options.bridges_per_pair < 1) throw ConfigError("bridges_per_pair must be >= 1");

  Rng rng(seed);
  const int n = nodes_per_region;
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int total = region_count * n;

  std::vector<int> regions(total);
  std::vector<Point2> coords(total);
  std::vector<Edge> edges;

  for (int r = 0; r < region_count; ++r) {
    const VertexId base = r * n;
    for (int i = 0; i < n; ++i) {
      regions[base + i] = r;
      coords[base + i] = Point2{static_cast<double>(r * (side + 1) + i % side),
                                static_cast<double>(i / side)};
    }

    std::vector<Edge> candidates;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const int dx = std::abs(i % side - j % side);
        const int dy = std::abs(i / side - j / side);
        if (dx <= 1 && dy <= 1) candidates.emplace_back(base + i, base + j);
      }
    rng.shuffle(candidates.begin(), candidates.end());

    std::vector<VertexId> parent(total);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<Edge> extra;
    int tree_edges = 0;
    for (const auto& e : candidates) {
      const VertexId a = detail::uf_find(parent, e.first);
      const VertexId b = detail::uf_find(parent, e.second);
      if (a != b) {
        parent[a] = b;
        edges.push_back(e);
        ++tree_edges;
      } else {
        extra.push_back(e);
      }
    }
    const auto target = static_cast<std::size_t>(std::lround(options.edge_density * tree_edges));
    const std::size_t wanted = std::min(extra.size(), target - static_cast<std::size_t>(tree_edges));
    edges.insert(edges.end(), extra.begin(), extra.begin() + static_cast<std::ptrdiff_t>(wanted));
  }

  for (int r = 0; r + 1 < region_count; ++r) {
    std::vector<VertexId> right, left;
    const int last_col = std::min(side, n) - 1;
    for (int i = 0; i < n; ++i) {
      if (i % side == last_col) right.push_back(r * n + i);
      if (i % side == 0) left.push_back((r + 1) * n + i);
    }
    std::set<Edge> chosen;
    const auto possible = right.size() * left.size();
    while (chosen.size() < std::min<std::size_t>(options.bridges_per_pair, possible)) {
      const VertexId a = right[rng.uniform(0, static_cast<std::int64_t>(right.size()) - 1)];
      const VertexId b = left[rng.uniform(0, static_cast<std::int64_t>(left.size()) - 1)];
      chosen.emplace(a, b);
    }
    edges.insert(edges.end(), chosen.begin(), chosen.end());
  }

  return WorldGraph(total, edges, std::move(regions), std::move(coords));
}

}  // namespace tapf
