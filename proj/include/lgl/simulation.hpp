#pragma once

// Data generation for the simulation protocol: test fields on the unit square,
// random MST networks, edge embeddings, noise, Monte Carlo error metrics and
// the clustered river-flow fixture.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lgl/error.hpp"
#include "lgl/graph.hpp"
#include "lgl/random.hpp"

namespace lgl {

// ---------------------------------------------------------------------------
// Test fields

/// Classical one-dimensional test signals on [0, 1].
namespace signals {

inline constexpr std::array<double, 11> kJumps{0.10, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81};

inline double blocks(double t) {
  constexpr std::array<double, 11> h{4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2};
  double f = 0.0;
  for (std::size_t j = 0; j < kJumps.size(); ++j) f += h[j] * (t - kJumps[j] >= 0.0 ? 1.0 : 0.0);
  return f;
}

inline double bumps(double t) {
  constexpr std::array<double, 11> h{4, 5, 3, 4, 5, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2};
  constexpr std::array<double, 11> w{0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005};
  double f = 0.0;
  for (std::size_t j = 0; j < kJumps.size(); ++j) f += h[j] * std::pow(1.0 + std::abs(t - kJumps[j]) / w[j], -4.0);
  return f;
}

inline double heavisine(double t) {
  auto sgn = [](double x) { return static_cast<double>((x > 0) - (x < 0)); };
  return 4.0 * std::sin(4.0 * std::numbers::pi * t) - sgn(t - 0.3) - sgn(0.72 - t);
}

inline double doppler(double t) {
  return std::sqrt(t * (1.0 - t)) * std::sin(2.0 * std::numbers::pi * 1.05 / (t + 0.05));
}

}  // namespace signals

struct TestField {
  std::string name;
  std::function<double(double, double)> evaluate;
  bool approximation = false;  // true for documented stand-ins of external formulas

  double operator()(double x, double y) const { return evaluate(x, y); }
};

/// Names accepted by `field_by_name`.
inline std::vector<std::string> builtin_field_names() {
  return {"g1", "mfc", "blocks", "doppler", "bumps", "heavisine", "steps"};
}

/// Built-in fields. The one-dimensional signals are evaluated at x and
/// modulated in y by (1 + y / 2). "steps" is piecewise constant with three
/// levels split along x = 0.4 and y = 0.6. "g1" and "mfc" are stand-ins with
/// the described traits: mfc is a smooth surface with two discontinuous
/// sections; g1 has the same kind of jumps at a finer spatial scale.
inline TestField field_by_name(std::string_view name) {
  auto modulated = [](double (*s)(double)) { return [s](double x, double y) { return s(x) * (1.0 + 0.5 * y); }; };
  if (name == "blocks") return {"blocks", modulated(signals::blocks)};
  if (name == "bumps") return {"bumps", modulated(signals::bumps)};
  if (name == "heavisine") return {"heavisine", modulated(signals::heavisine)};
  if (name == "doppler") return {"doppler", modulated(signals::doppler)};
  if (name == "steps") {
    return {"steps", [](double x, double y) { return (x > 0.4 ? 1.0 : 0.0) + (y > 0.6 ? 2.0 : 0.0); }};
  }
  if (name == "mfc") {
    return {"mfc",
            [](double x, double y) {
              const double smooth = std::sin(2.0 * std::numbers::pi * x) * std::cos(std::numbers::pi * y);
              return smooth + (x + y > 1.0 ? 2.0 : 0.0);
            },
            true};
  }
  if (name == "g1") {
    return {"g1",
            [](double x, double y) {
              const double smooth = std::sin(4.0 * std::numbers::pi * x) * std::cos(2.0 * std::numbers::pi * y);
              const double dx = x - 0.3, dy = y - 0.3;
              return smooth + (x + y > 1.0 ? 2.0 : 0.0) - (dx * dx + dy * dy < 0.0225 ? 1.5 : 0.0);
            },
            true};
  }
  std::string options;
  for (const auto& f : builtin_field_names()) options += (options.empty() ? "" : ", ") + f;
  throw Error(ErrorCategory::Config, "unknown test field '" + std::string(name) + "'; expected one of: " + options);
}

// ---------------------------------------------------------------------------
// Networks and embeddings

/// n uniform points on the unit square joined by their Euclidean minimum
/// spanning tree. Vertex and edge ids are 0-based positions.
inline Graph sample_network(std::size_t n, std::uint64_t seed) {
  if (n < 3) throw Error(ErrorCategory::Config, "network needs at least 3 vertices");
  auto rng = make_rng(seed, Stream::Graph);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    p.x = unif(rng);
    p.y = unif(rng);
  }
  Graph g;
  for (std::size_t i = 0; i < n; ++i) g.add_vertex(static_cast<std::int64_t>(i), pts[i]);
  std::int64_t eid = 0;
  for (const auto& e : minimum_spanning_tree(pts)) {
    g.add_edge(eid++, static_cast<std::int64_t>(e.a), static_cast<std::int64_t>(e.b));
  }
  return g;
}

/// Field value at each edge midpoint.
inline std::vector<double> embed_pointwise(const TestField& field, const Graph& graph) {
  std::vector<double> out;
  out.reserve(graph.edge_count());
  for (std::size_t k = 0; k < graph.edge_count(); ++k) {
    auto mid = graph.edge_midpoint(k);
    if (!mid) throw Error(ErrorCategory::InvalidInput, "pointwise embedding needs vertex coordinates");
    out.push_back(field(mid->x, mid->y));
  }
  return out;
}

/// Mean of the field over `samples` equally spaced points along each edge,
/// endpoints included.
inline std::vector<double> embed_edge_average(const TestField& field, const Graph& graph, std::size_t samples = 100) {
  if (samples < 2) throw Error(ErrorCategory::Config, "edge averaging needs at least 2 samples");
  std::vector<double> out;
  out.reserve(graph.edge_count());
  const auto denom = static_cast<double>(samples - 1);
  for (const auto& e : graph.edges()) {
    const auto& a = graph.vertices()[e.u].position;
    const auto& b = graph.vertices()[e.v].position;
    if (!a || !b) throw Error(ErrorCategory::InvalidInput, "edge averaging needs vertex coordinates");
    double sum = 0.0;
    for (std::size_t h = 0; h < samples; ++h) {
      const double t = static_cast<double>(h) / denom;
      sum += field(a->x + t * (b->x - a->x), a->y + t * (b->y - a->y));
    }
    out.push_back(sum / static_cast<double>(samples));
  }
  return out;
}

enum class Embedding { Pointwise, EdgeAverage };

inline std::vector<double> embed(const TestField& field, const Graph& graph, Embedding how, std::size_t samples = 100) {
  return how == Embedding::Pointwise ? embed_pointwise(field, graph) : embed_edge_average(field, graph, samples);
}

// ---------------------------------------------------------------------------
// Noise

inline double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

/// Rescales `values` to unit sample variance.
inline std::vector<double> normalize_unit_variance(std::span<const double> values) {
  const double var = sample_variance(values);
  if (!(var > 0.0)) throw Error(ErrorCategory::Degenerate, "cannot normalize a constant signal");
  const double sd = std::sqrt(var);
  std::vector<double> out(values.begin(), values.end());
  for (auto& x : out) x /= sd;
  return out;
}

inline std::vector<double> add_gaussian_noise(std::span<const double> values, double sigma, std::uint64_t seed) {
  auto rng = make_rng(seed, Stream::Noise);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<double> out(values.begin(), values.end());
  for (auto& x : out) x += noise(rng);
  return out;
}

struct NoisySignal {
  std::vector<double> truth;  // unit sample variance
  std::vector<double> noisy;
  double sigma = 0.0;
};

/// Normalizes the truth to unit variance and adds N(0, (1/snr)^2) noise.
inline NoisySignal add_noise(std::span<const double> values, double snr, std::uint64_t seed) {
  if (!(snr > 0.0)) throw Error(ErrorCategory::Config, "SNR must be positive");
  NoisySignal out;
  out.truth = normalize_unit_variance(values);
  out.sigma = 1.0 / snr;
  out.noisy = add_gaussian_noise(out.truth, out.sigma, seed);
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

/// estimates[q][r][k] for graph q, noise replication r, vertex k; truths[q][k].
struct ResultGrid {
  std::vector<std::vector<double>> truths;
  std::vector<std::vector<std::vector<double>>> estimates;
};

struct MetricsReport {
  double amse = 0.0;
  double variance = 0.0;
  double bias2 = 0.0;
  double mse_sd = 0.0;  // standard deviation of the per-run MSE over all (q, r)
  std::size_t runs = 0;
};

inline MetricsReport compute_metrics(const ResultGrid& grid) {
  const auto Q = grid.truths.size();
  if (Q == 0 || grid.estimates.size() != Q) throw Error(ErrorCategory::InvalidInput, "result grid: missing graphs");
  const auto R = grid.estimates.front().size();
  if (R == 0) throw Error(ErrorCategory::InvalidInput, "result grid: missing replications");
  MetricsReport rep;
  std::vector<double> run_mse;
  double sq = 0.0, var = 0.0, bias = 0.0;
  std::size_t cells = 0, means = 0;
  for (std::size_t q = 0; q < Q; ++q) {
    const auto& truth = grid.truths[q];
    const auto m = truth.size();
    if (grid.estimates[q].size() != R) throw Error(ErrorCategory::InvalidInput, "result grid: missing cells");
    std::vector<double> mean(m, 0.0);
    for (const auto& est : grid.estimates[q]) {
      if (est.size() != m) throw Error(ErrorCategory::InvalidInput, "result grid: missing cells");
      double run = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        run += (est[k] - truth[k]) * (est[k] - truth[k]);
        mean[k] += est[k];
      }
      sq += run;
      run_mse.push_back(run / static_cast<double>(m));
    }
    for (auto& x : mean) x /= static_cast<double>(R);
    for (const auto& est : grid.estimates[q]) {
      for (std::size_t k = 0; k < m; ++k) var += (est[k] - mean[k]) * (est[k] - mean[k]);
    }
    for (std::size_t k = 0; k < m; ++k) bias += (mean[k] - truth[k]) * (mean[k] - truth[k]);
    cells += R * m;
    means += m;
  }
  rep.amse = sq / static_cast<double>(cells);
  rep.variance = var / static_cast<double>(cells);
  rep.bias2 = bias / static_cast<double>(means);
  rep.runs = run_mse.size();
  if (run_mse.size() > 1) rep.mse_sd = std::sqrt(sample_variance(run_mse));
  return rep;
}

// ---------------------------------------------------------------------------
// River-flow fixture

struct FlowFixture {
  Graph graph;                 // 80 vertices, 79 edges, coordinates and lengths
  std::vector<double> values;  // per edge, each in {9, 12, 15, 18}
  std::vector<int> cluster;    // per edge, 0..clusters-1
  std::vector<int> stream;     // per edge: maximal chain between junctions or tips
};

/// How a picked cluster is redrawn: one value per stream, or one per edge.
enum class FlowDraw { PerStream, PerEdge };

struct FlowFixtureOptions {
  std::size_t vertices = 80;
  std::size_t clusters = 7;
  std::size_t raised_edges = 30;  // stop once more than this many edges exceed 9
  double extend_probability = 0.9;
  FlowDraw draw = FlowDraw::PerStream;
};

/// River-like random tree grown upstream from an outlet: each new vertex
/// either extends a current tip or opens a tributary at an interior vertex.
/// Edges are split into contiguous clusters by round-robin breadth-first
/// growth from random seed edges. Every edge starts at 9; whole clusters are
/// then picked at random and redrawn from {12, 15, 18} until more than
/// `raised_edges` edges exceed 9.
inline FlowFixture generate_flow_fixture(std::uint64_t seed, const FlowFixtureOptions& opt = {}) {
  const auto vertices = opt.vertices;
  const auto clusters = opt.clusters;
  if (clusters == 0 || vertices < clusters + 1) throw Error(ErrorCategory::Config, "flow fixture needs more vertices than clusters");
  if (opt.raised_edges >= vertices - 1) throw Error(ErrorCategory::Config, "flow fixture cannot raise that many edges");
  auto rng = make_rng(seed, Stream::Fixture);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.25);

  std::vector<Point> pts{{0.5, 0.0}};
  std::vector<double> heading{std::numbers::pi / 2.0};
  std::vector<std::size_t> parent{0}, degree(vertices, 0);
  for (std::size_t i = 1; i < vertices; ++i) {
    std::vector<std::size_t> tips, inner;
    for (std::size_t j = 1; j < i; ++j) (degree[j] == 1 ? tips : inner).push_back(j);
    if (degree[0] > 0) inner.push_back(0);
    std::size_t p = 0;
    double angle = heading[0];
    if (i > 1 && (inner.empty() || (!tips.empty() && unif(rng) < opt.extend_probability))) {
      p = tips[std::uniform_int_distribution<std::size_t>(0, tips.size() - 1)(rng)];
      angle = heading[p] + jitter(rng);
    } else if (i > 1) {
      p = inner[std::uniform_int_distribution<std::size_t>(0, inner.size() - 1)(rng)];
      angle = heading[p] + (unif(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + 0.5 * unif(rng));
    }
    const double step = 0.03 + 0.04 * unif(rng);
    pts.push_back({pts[p].x + step * std::cos(angle), pts[p].y + step * std::sin(angle)});
    heading.push_back(angle);
    parent.push_back(p);
    ++degree[p];
    ++degree[i];
  }
  FlowFixture fx;
  for (std::size_t i = 0; i < vertices; ++i) fx.graph.add_vertex(static_cast<std::int64_t>(i), pts[i]);
  for (std::size_t i = 1; i < vertices; ++i) {
    fx.graph.add_edge(static_cast<std::int64_t>(i - 1), static_cast<std::int64_t>(parent[i]), static_cast<std::int64_t>(i));
  }

  const auto m = fx.graph.edge_count();
  std::vector<std::vector<std::size_t>> incident(vertices);
  for (std::size_t k = 0; k < m; ++k) {
    incident[fx.graph.edges()[k].u].push_back(k);
    incident[fx.graph.edges()[k].v].push_back(k);
  }

  // Streams: edges joined through vertices of degree 2.
  DisjointSets streams(m);
  for (const auto& inc : incident) {
    if (inc.size() == 2) streams.unite(inc[0], inc[1]);
  }
  fx.stream.assign(m, -1);
  {
    std::vector<int> label(m, -1);
    int next = 0;
    for (std::size_t k = 0; k < m; ++k) {
      auto r = streams.find(k);
      if (label[r] < 0) label[r] = next++;
      fx.stream[k] = label[r];
    }
  }

  fx.cluster.assign(m, -1);
  std::vector<std::size_t> edge_ids(m);
  std::iota(edge_ids.begin(), edge_ids.end(), 0);
  std::shuffle(edge_ids.begin(), edge_ids.end(), rng);
  std::vector<std::vector<std::size_t>> members(clusters);
  for (std::size_t c = 0; c < clusters; ++c) {
    fx.cluster[edge_ids[c]] = static_cast<int>(c);
    members[c].push_back(edge_ids[c]);
  }
  std::size_t claimed = clusters;
  while (claimed < m) {
    bool grew = false;
    for (std::size_t c = 0; c < clusters && claimed < m; ++c) {
      // Claim the lowest-id unclaimed edge touching the cluster.
      std::size_t best = m;
      for (auto k : members[c]) {
        for (auto v : {fx.graph.edges()[k].u, fx.graph.edges()[k].v}) {
          for (auto l : incident[v]) {
            if (fx.cluster[l] < 0) best = std::min(best, l);
          }
        }
      }
      if (best == m) continue;
      fx.cluster[best] = static_cast<int>(c);
      members[c].push_back(best);
      ++claimed;
      grew = true;
    }
    if (!grew) break;
  }

  fx.values.assign(m, 9.0);
  constexpr std::array<double, 3> levels{12.0, 15.0, 18.0};
  std::uniform_int_distribution<std::size_t> pick_cluster(0, clusters - 1);
  std::uniform_int_distribution<std::size_t> pick_level(0, levels.size() - 1);
  auto raised = [&] {
    return static_cast<std::size_t>(std::count_if(fx.values.begin(), fx.values.end(), [](double v) { return v > 9.0; }));
  };
  while (raised() <= opt.raised_edges) {
    const auto& picked = members[pick_cluster(rng)];
    if (opt.draw == FlowDraw::PerEdge) {
      for (auto k : picked) fx.values[k] = levels[pick_level(rng)];
      continue;
    }
    // One draw per stream, shared by the stream's edges inside this cluster.
    std::vector<std::pair<int, double>> drawn;
    for (auto k : picked) {
      auto it = std::find_if(drawn.begin(), drawn.end(), [&](const auto& d) { return d.first == fx.stream[k]; });
      if (it == drawn.end()) {
        drawn.emplace_back(fx.stream[k], levels[pick_level(rng)]);
        it = drawn.end() - 1;
      }
      fx.values[k] = it->second;
    }
  }
  fx.graph.set_values(fx.values);
  return fx;
}

}  // namespace lgl
