#pragma once

// Network substrate: source graphs with edge observations, their line graphs,
// the two distance notions used by the transform, spanning trees and
// connectivity checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lgl/error.hpp"

namespace lgl {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double euclidean(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline Point midpoint(const Point& a, const Point& b) { return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}; }

/// How distances between line-graph vertices are measured.
enum class MetricMode {
  Coordinate,  // Euclidean distance between edge midpoints
  PathLength,  // shortest path through adjacent-pair distances (l_k + l_l) / 2
};

namespace detail {

inline std::uint64_t pair_key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Source graph

struct Vertex {
  std::int64_t id = 0;
  std::optional<Point> position;
};

/// Undirected edge between vertex indices `u` and `v`.
struct Edge {
  std::int64_t id = 0;
  std::size_t u = 0;
  std::size_t v = 0;
  std::optional<double> length;
  std::optional<double> value;
};

/// Simple undirected graph. Edge lengths default to the Euclidean distance
/// between endpoints when both carry coordinates.
class Graph {
 public:
  std::size_t add_vertex(std::int64_t id, std::optional<Point> position = std::nullopt) {
    if (vertex_index_.contains(id)) {
      throw Error(ErrorCategory::InvalidInput, "duplicate vertex id " + std::to_string(id));
    }
    vertex_index_.emplace(id, vertices_.size());
    vertices_.push_back({id, position});
    return vertices_.size() - 1;
  }

  std::size_t add_edge(std::int64_t id, std::int64_t u_id, std::int64_t v_id,
                       std::optional<double> length = std::nullopt,
                       std::optional<double> value = std::nullopt) {
    if (edge_index_.contains(id)) {
      throw Error(ErrorCategory::InvalidInput, "duplicate edge id " + std::to_string(id));
    }
    const auto u = find_vertex(u_id);
    const auto v = find_vertex(v_id);
    if (!u || !v) {
      throw Error(ErrorCategory::InvalidInput,
                  "edge " + std::to_string(id) + " references unknown vertex " +
                      std::to_string(!u ? u_id : v_id));
    }
    if (*u == *v) throw Error(ErrorCategory::InvalidInput, "edge " + std::to_string(id) + " is a self-loop");
    if (pairs_.contains(detail::pair_key(*u, *v))) {
      throw Error(ErrorCategory::InvalidInput, "edge " + std::to_string(id) + " duplicates an existing vertex pair");
    }
    if (!length && vertices_[*u].position && vertices_[*v].position) {
      length = euclidean(*vertices_[*u].position, *vertices_[*v].position);
    }
    if (length && !(*length > 0.0 && std::isfinite(*length))) {
      throw Error(ErrorCategory::InvalidInput, "edge " + std::to_string(id) + " has non-positive length");
    }
    pairs_.insert(detail::pair_key(*u, *v));
    edge_index_.emplace(id, edges_.size());
    edges_.push_back({id, *u, *v, length, value});
    return edges_.size() - 1;
  }

  std::optional<std::size_t> find_vertex(std::int64_t id) const {
    auto it = vertex_index_.find(id);
    if (it == vertex_index_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  std::optional<Point> edge_midpoint(std::size_t k) const {
    const auto& e = edges_.at(k);
    const auto& a = vertices_[e.u].position;
    const auto& b = vertices_[e.v].position;
    if (!a || !b) return std::nullopt;
    return midpoint(*a, *b);
  }

  bool has_values() const {
    return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.value.has_value(); });
  }

  /// Observation vector in edge order; throws if any edge lacks a value.
  std::vector<double> values() const {
    std::vector<double> out;
    out.reserve(edges_.size());
    for (const auto& e : edges_) {
      if (!e.value) throw Error(ErrorCategory::InvalidInput, "edge " + std::to_string(e.id) + " has no value");
      out.push_back(*e.value);
    }
    return out;
  }

  void set_values(std::span<const double> values) {
    if (values.size() != edges_.size()) throw Error(ErrorCategory::InvalidInput, "value count does not match edge count");
    for (std::size_t k = 0; k < edges_.size(); ++k) edges_[k].value = values[k];
  }

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::unordered_map<std::int64_t, std::size_t> vertex_index_;
  std::unordered_map<std::int64_t, std::size_t> edge_index_;
  std::unordered_set<std::uint64_t> pairs_;
};

// ---------------------------------------------------------------------------
// Connectivity and spanning trees

struct WeightedEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;
};

/// True iff `edges` join `vertices` into a single component. Empty sets count
/// as connected.
inline bool is_connected(std::span<const std::size_t> vertices,
                         std::span<const std::pair<std::size_t, std::size_t>> edges) {
  if (vertices.size() <= 1) return true;
  std::unordered_map<std::size_t, std::vector<std::size_t>> adj;
  for (auto v : vertices) adj[v];
  for (const auto& [a, b] : edges) {
    if (!adj.contains(a) || !adj.contains(b)) {
      throw Error(ErrorCategory::InvalidInput, "edge endpoint outside the vertex subset");
    }
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::unordered_set<std::size_t> seen{vertices.front()};
  std::vector<std::size_t> stack{vertices.front()};
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (auto w : adj[v]) {
      if (seen.insert(w).second) stack.push_back(w);
    }
  }
  return seen.size() == adj.size();
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> rank_;
};

/// Kruskal's algorithm on vertices 0..n-1. Ties are broken lexicographically
/// on (weight, smaller endpoint, larger endpoint), so the result is unique.
/// Returned edges have a < b and are sorted in that same order.
inline std::vector<WeightedEdge> minimum_spanning_tree(std::size_t n, std::vector<WeightedEdge> edges) {
  if (n == 0) throw Error(ErrorCategory::InvalidInput, "minimum spanning tree of an empty vertex set");
  for (auto& e : edges) {
    if (e.a >= n || e.b >= n || e.a == e.b) throw Error(ErrorCategory::InvalidInput, "invalid edge in spanning tree input");
    if (!(std::isfinite(e.weight) && e.weight >= 0.0)) {
      throw Error(ErrorCategory::InvalidInput, "spanning tree weights must be finite and non-negative");
    }
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  DisjointSets sets(n);
  std::vector<WeightedEdge> tree;
  tree.reserve(n - 1);
  for (const auto& e : edges) {
    if (sets.unite(e.a, e.b)) {
      tree.push_back(e);
      if (tree.size() + 1 == n) break;
    }
  }
  if (tree.size() + 1 != n) throw Error(ErrorCategory::InvalidInput, "spanning tree input is disconnected");
  return tree;
}

/// Euclidean minimum spanning tree over a point set (complete graph).
inline std::vector<WeightedEdge> minimum_spanning_tree(std::span<const Point> points) {
  if (points.empty()) throw Error(ErrorCategory::InvalidInput, "minimum spanning tree of an empty point set");
  std::vector<WeightedEdge> all;
  all.reserve(points.size() * (points.size() - 1) / 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) all.push_back({i, j, euclidean(points[i], points[j])});
  }
  return minimum_spanning_tree(points.size(), std::move(all));
}

/// Adjacency list with per-edge weights, vertices 0..n-1.
using WeightedAdjacency = std::vector<std::vector<std::pair<std::size_t, double>>>;

/// Single-source shortest path lengths (Dijkstra). Unreachable entries are +inf.
inline std::vector<double> shortest_paths(const WeightedAdjacency& adj, std::size_t source) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(adj.size(), inf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (const auto& [w, len] : adj[v]) {
      if (d + len < dist[w]) {
        dist[w] = d + len;
        heap.emplace(dist[w], w);
      }
    }
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Line graph

struct LineVertex {
  std::int64_t id = 0;
  std::optional<std::size_t> source_edge;  // unset for user-declared stations
  std::optional<Point> position;
};

struct LineEdge {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  std::optional<double> length;  // base distance, PathLength mode
};

/// Vertices correspond one-to-one with the source graph's edges (or with
/// user-declared stations); two are adjacent iff their source edges share an
/// endpoint. Immutable once built.
class LineGraph {
 public:
  std::size_t add_vertex(std::int64_t id, std::optional<Point> position = std::nullopt,
                         std::optional<std::size_t> source_edge = std::nullopt) {
    if (!ids_.insert(id).second) throw Error(ErrorCategory::InvalidInput, "duplicate line-graph vertex id " + std::to_string(id));
    vertices_.push_back({id, source_edge, position});
    adjacency_.emplace_back();
    return vertices_.size() - 1;
  }

  void add_edge(std::size_t a, std::size_t b, std::optional<double> length = std::nullopt) {
    if (a >= size() || b >= size() || a == b) throw Error(ErrorCategory::InvalidInput, "invalid line-graph edge");
    if (a > b) std::swap(a, b);
    if (length && !(*length > 0.0 && std::isfinite(*length))) {
      throw Error(ErrorCategory::InvalidInput, "line-graph edge length must be positive");
    }
    if (edge_lookup_.contains(detail::pair_key(a, b))) {
      throw Error(ErrorCategory::InvalidInput, "duplicate line-graph edge");
    }
    edge_lookup_.emplace(detail::pair_key(a, b), edges_.size());
    edges_.push_back({a, b, length});
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }

  std::size_t size() const { return vertices_.size(); }
  const std::vector<LineVertex>& vertices() const { return vertices_; }
  const std::vector<LineEdge>& edges() const { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t k) const { return adjacency_.at(k); }

  bool adjacent(std::size_t k, std::size_t l) const { return edge_lookup_.contains(detail::pair_key(k, l)); }

  std::optional<double> base_length(std::size_t k, std::size_t l) const {
    auto it = edge_lookup_.find(detail::pair_key(k, l));
    if (it == edge_lookup_.end()) return std::nullopt;
    return edges_[it->second].length;
  }

  bool has_coordinates() const {
    return std::all_of(vertices_.begin(), vertices_.end(), [](const LineVertex& v) { return v.position.has_value(); });
  }

  bool has_lengths() const {
    return std::all_of(edges_.begin(), edges_.end(), [](const LineEdge& e) { return e.length.has_value(); });
  }

  /// Throws unless every input the given metric needs is present.
  void require_metric(MetricMode mode) const {
    const bool ok = mode == MetricMode::Coordinate ? has_coordinates() : has_lengths();
    if (!ok) {
      throw Error(ErrorCategory::InvalidInput,
                  std::string("metric inputs unavailable: ") +
                      (mode == MetricMode::Coordinate ? "coordinates missing" : "edge lengths missing"));
    }
  }

  WeightedAdjacency weighted_adjacency() const {
    WeightedAdjacency adj(size());
    for (const auto& e : edges_) {
      adj[e.a].emplace_back(e.b, *e.length);
      adj[e.b].emplace_back(e.a, *e.length);
    }
    return adj;
  }

  bool connected() const {
    std::vector<std::size_t> verts(size());
    std::iota(verts.begin(), verts.end(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> es;
    es.reserve(edges_.size());
    for (const auto& e : edges_) es.emplace_back(e.a, e.b);
    return is_connected(verts, es);
  }

 private:
  std::vector<LineVertex> vertices_;
  std::vector<LineEdge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::unordered_map<std::uint64_t, std::size_t> edge_lookup_;
  std::unordered_set<std::int64_t> ids_;
};

/// Line graph of `graph`: vertex k stands for edge k (same id), placed at the
/// edge midpoint when coordinates exist; adjacent pairs get base distance
/// (l_k + l_l) / 2 when lengths exist.
inline LineGraph build_line_graph(const Graph& graph) {
  const auto m = graph.edge_count();
  if (m < 3) throw Error(ErrorCategory::InvalidInput, "graph too small: need at least 3 edges, got " + std::to_string(m));
  {
    std::vector<std::size_t> verts(graph.vertex_count());
    std::iota(verts.begin(), verts.end(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> es;
    for (const auto& e : graph.edges()) es.emplace_back(e.u, e.v);
    if (!is_connected(verts, es)) throw Error(ErrorCategory::InvalidInput, "source graph disconnected");
  }

  LineGraph lg;
  for (std::size_t k = 0; k < m; ++k) lg.add_vertex(graph.edges()[k].id, graph.edge_midpoint(k), k);

  std::vector<std::vector<std::size_t>> incident(graph.vertex_count());
  for (std::size_t k = 0; k < m; ++k) {
    incident[graph.edges()[k].u].push_back(k);
    incident[graph.edges()[k].v].push_back(k);
  }
  // Two distinct simple edges share at most one endpoint, so every pair below
  // is produced exactly once.
  for (const auto& inc : incident) {
    for (std::size_t i = 0; i < inc.size(); ++i) {
      for (std::size_t j = i + 1; j < inc.size(); ++j) {
        const auto& ek = graph.edges()[inc[i]];
        const auto& el = graph.edges()[inc[j]];
        std::optional<double> len;
        if (ek.length && el.length) len = (*ek.length + *el.length) / 2.0;
        lg.add_edge(inc[i], inc[j], len);
      }
    }
  }
  return lg;
}

/// Distance between line-graph vertices k and l under `mode`.
inline double distance(const LineGraph& lg, std::size_t k, std::size_t l, MetricMode mode) {
  if (k >= lg.size() || l >= lg.size() || k == l) throw Error(ErrorCategory::InvalidInput, "distance needs two distinct vertices");
  if (mode == MetricMode::Coordinate) {
    const auto& pk = lg.vertices()[k].position;
    const auto& pl = lg.vertices()[l].position;
    if (!pk || !pl) throw Error(ErrorCategory::InvalidInput, "metric inputs unavailable: coordinates missing");
    return euclidean(*pk, *pl);
  }
  if (auto base = lg.base_length(k, l)) return *base;
  lg.require_metric(MetricMode::PathLength);
  const auto d = shortest_paths(lg.weighted_adjacency(), k)[l];
  if (!std::isfinite(d)) throw Error(ErrorCategory::Degenerate, "disconnected in metric");
  return d;
}

}  // namespace lgl
