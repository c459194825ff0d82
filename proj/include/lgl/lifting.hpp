#pragma once

// Lifting one coefficient at a time on the vertices of a line graph.
//
// Each stage removes the live vertex with the smallest integral, predicts its
// value from its current neighbours, updates the neighbours' integrals and
// scaling coefficients, and relinks the neighbourhood if the removal split it.
// Every stage is archived so the transform can be replayed on other inputs or
// undone exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lgl/error.hpp"
#include "lgl/graph.hpp"
#include "lgl/random.hpp"

namespace lgl {

enum class IntegralScheme {
  Sum,      // sum of distances to the initial neighbours
  Average,  // that sum divided by twice the neighbour count
  Delta,    // all ones
};

enum class PredictionScheme {
  InverseDistance,  // weights proportional to 1 / distance
  MovingAverage,    // uniform weights
};

struct LiftingConfig {
  IntegralScheme integrals = IntegralScheme::Average;
  PredictionScheme prediction = PredictionScheme::InverseDistance;
  MetricMode metric = MetricMode::Coordinate;
  std::size_t stopping_time = 2;  // scaling coefficients left at the end
  std::uint64_t seed = 0;         // drives tie-breaking in the split step
  double integral_scale = 1.0;    // multiplies the initial integrals
};

// ---------------------------------------------------------------------------
// Variant acronyms, e.g. "LG-Aid-c": integral letter (S/A/D), prediction
// (id/nw), metric (c/p).

inline std::string variant_name(const LiftingConfig& cfg) {
  std::string name = "LG-";
  name += cfg.integrals == IntegralScheme::Sum ? 'S' : cfg.integrals == IntegralScheme::Average ? 'A' : 'D';
  name += cfg.prediction == PredictionScheme::InverseDistance ? "id" : "nw";
  name += cfg.metric == MetricMode::Coordinate ? "-c" : "-p";
  return name;
}

inline std::vector<std::string> all_variant_names() {
  std::vector<std::string> out;
  for (auto metric : {MetricMode::Coordinate, MetricMode::PathLength}) {
    for (auto pred : {PredictionScheme::InverseDistance, PredictionScheme::MovingAverage}) {
      for (auto integ : {IntegralScheme::Sum, IntegralScheme::Average, IntegralScheme::Delta}) {
        out.push_back(variant_name({integ, pred, metric}));
      }
    }
  }
  return out;
}

/// Parses a variant acronym; the remaining fields keep the values in `base`.
inline LiftingConfig parse_variant(std::string_view name, LiftingConfig base = {}) {
  for (auto metric : {MetricMode::Coordinate, MetricMode::PathLength}) {
    for (auto pred : {PredictionScheme::InverseDistance, PredictionScheme::MovingAverage}) {
      for (auto integ : {IntegralScheme::Sum, IntegralScheme::Average, IntegralScheme::Delta}) {
        LiftingConfig cfg = base;
        cfg.integrals = integ;
        cfg.prediction = pred;
        cfg.metric = metric;
        if (variant_name(cfg) == name) return cfg;
      }
    }
  }
  std::string options;
  for (const auto& v : all_variant_names()) options += (options.empty() ? "" : ", ") + v;
  throw Error(ErrorCategory::Config, "unknown variant '" + std::string(name) + "'; expected one of: " + options);
}

// ---------------------------------------------------------------------------
// Records

struct LiftingStage {
  std::size_t removed = 0;
  std::vector<std::size_t> neighbors;  // ascending ids
  std::vector<double> prediction;      // a, aligned with neighbors
  std::vector<double> update;          // b, aligned with neighbors
  double scale = 0.0;                  // integral of the removed vertex
  std::vector<std::pair<std::size_t, std::size_t>> added_edges;
  std::vector<std::pair<std::size_t, std::size_t>> removed_edges;
};

struct LiftingRecord {
  std::size_t size = 0;
  LiftingConfig config;
  std::vector<LiftingStage> stages;  // stage m first
  std::vector<double> initial_integrals;
  std::vector<double> final_integrals;
  std::vector<std::size_t> survivors;  // ascending

  std::vector<std::size_t> removal_order() const {
    std::vector<std::size_t> out;
    out.reserve(stages.size());
    for (const auto& s : stages) out.push_back(s.removed);
    return out;
  }
};

/// Transform output. Details are kept in removal order; scaling coefficients
/// by ascending id.
struct CoefficientSet {
  std::vector<std::size_t> detail_ids;
  std::vector<double> details;
  std::vector<double> scales;
  std::vector<std::size_t> scaling_ids;
  std::vector<double> scaling;
  std::vector<int> levels;  // per detail, 0 = finest; empty until assigned

  std::size_t size() const { return details.size() + scaling.size(); }

  /// Details then scaling coefficients, the row order of the forward matrix.
  std::vector<double> flatten() const {
    std::vector<double> out(details);
    out.insert(out.end(), scaling.begin(), scaling.end());
    return out;
  }
};

// ---------------------------------------------------------------------------
// Building blocks

/// Floor applied to inter-vertex distances: 1e-9 times the extent of the line
/// graph (bounding-box diagonal, or the double-sweep path diameter).
inline double distance_floor(const LineGraph& lg, MetricMode mode) {
  double extent = 0.0;
  if (mode == MetricMode::Coordinate) {
    double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
    double xmax = -xmin, ymax = -xmin;
    for (const auto& v : lg.vertices()) {
      xmin = std::min(xmin, v.position->x);
      xmax = std::max(xmax, v.position->x);
      ymin = std::min(ymin, v.position->y);
      ymax = std::max(ymax, v.position->y);
    }
    extent = std::hypot(xmax - xmin, ymax - ymin);
  } else {
    const auto adj = lg.weighted_adjacency();
    auto first = shortest_paths(adj, 0);
    std::size_t far = 0;
    for (std::size_t i = 0; i < first.size(); ++i) {
      if (std::isfinite(first[i]) && first[i] > first[far]) far = i;
    }
    for (double d : shortest_paths(adj, far)) {
      if (std::isfinite(d)) extent = std::max(extent, d);
    }
  }
  if (!(extent > 0.0)) throw Error(ErrorCategory::Degenerate, "degenerate line graph: zero spatial extent");
  return 1e-9 * extent;
}

/// Initial integrals. Sum and Average use the metric distances to each
/// vertex's initial neighbours (floored at `floor`).
inline std::vector<double> init_integrals(const LineGraph& lg, IntegralScheme scheme, MetricMode mode,
                                          double floor = 0.0) {
  const auto m = lg.size();
  std::vector<double> out(m, 1.0);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& nb = lg.neighbors(k);
    if (nb.empty()) throw Error(ErrorCategory::Degenerate, "degenerate line graph: vertex " + std::to_string(lg.vertices()[k].id) + " is isolated");
    if (scheme == IntegralScheme::Delta) continue;
    double sum = 0.0;
    for (auto s : nb) sum += std::max(distance(lg, k, s, mode), floor);
    out[k] = scheme == IntegralScheme::Sum ? sum : sum / (2.0 * static_cast<double>(nb.size()));
    if (!(out[k] > 0.0)) throw Error(ErrorCategory::Degenerate, "degenerate line graph: zero integral");
  }
  return out;
}

/// Prediction weights from the distances to the neighbours; non-negative and
/// summing to one.
inline std::vector<double> predict_weights(std::span<const double> distances, PredictionScheme scheme) {
  if (distances.empty()) throw Error(ErrorCategory::Degenerate, "prediction needs at least one neighbour");
  const auto n = static_cast<double>(distances.size());
  std::vector<double> w(distances.size(), 1.0 / n);
  if (scheme == PredictionScheme::MovingAverage) return w;
  double total = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] > 0.0) || !std::isfinite(distances[i])) throw Error(ErrorCategory::Degenerate, "degenerate distance");
    w[i] = 1.0 / distances[i];
    total += w[i];
  }
  for (auto& x : w) x /= total;
  return w;
}

/// Forward lifting step on a coefficient vector; returns the detail.
inline double apply_stage(std::span<double> c, const LiftingStage& st) {
  double pred = 0.0;
  for (std::size_t i = 0; i < st.neighbors.size(); ++i) pred += st.prediction[i] * c[st.neighbors[i]];
  const double d = c[st.removed] - pred;
  for (std::size_t i = 0; i < st.neighbors.size(); ++i) c[st.neighbors[i]] += st.update[i] * d;
  return d;
}

/// Undoes `apply_stage`, writing the removed coefficient back.
inline void undo_stage(std::span<double> c, const LiftingStage& st, double detail) {
  for (std::size_t i = 0; i < st.neighbors.size(); ++i) c[st.neighbors[i]] -= st.update[i] * detail;
  double pred = 0.0;
  for (std::size_t i = 0; i < st.neighbors.size(); ++i) pred += st.prediction[i] * c[st.neighbors[i]];
  c[st.removed] = detail + pred;
}

// ---------------------------------------------------------------------------
// Engine state

/// Mutable state of one decomposition: live vertices, current adjacency with
/// per-edge distances, integrals and scaling coefficients.
class LiftingState {
 public:
  struct StageResult {
    double detail = 0.0;
    LiftingStage stage;
  };

  LiftingState(const LineGraph& lg, const LiftingConfig& config, std::span<const double> values)
      : config_(config), coords_(lg.size()), c_(values.begin(), values.end()), active_(lg.size(), true),
        adjacency_(lg.size()), live_(lg.size()) {
    const auto m = lg.size();
    if (values.size() != m) throw Error(ErrorCategory::InvalidInput, "expected one value per line-graph vertex");
    for (double v : values) {
      if (!std::isfinite(v)) throw Error(ErrorCategory::InvalidInput, "input values must be finite");
    }
    if (config.stopping_time < 2 || config.stopping_time >= m) {
      throw Error(ErrorCategory::Config, "stopping time must satisfy 2 <= tau < m");
    }
    if (!(config.integral_scale > 0.0)) throw Error(ErrorCategory::Config, "integral scale must be positive");
    lg.require_metric(config.metric);
    if (!lg.connected()) throw Error(ErrorCategory::Degenerate, "degenerate line graph: not connected");

    for (std::size_t k = 0; k < m; ++k) coords_[k] = lg.vertices()[k].position.value_or(Point{});
    for (const auto& e : lg.edges()) {
      adjacency_[e.a].insert(e.b);
      adjacency_[e.b].insert(e.a);
      if (e.length) base_.emplace(detail::pair_key(e.a, e.b), *e.length);
    }
    floor_ = distance_floor(lg, config.metric);
    integrals_ = init_integrals(lg, config.integrals, config.metric, floor_);
    for (auto& x : integrals_) x *= config.integral_scale;
  }

  std::size_t size() const { return c_.size(); }
  std::size_t live_count() const { return live_; }
  bool is_active(std::size_t k) const { return active_.at(k); }
  const std::vector<double>& integrals() const { return integrals_; }
  const std::vector<double>& coefficients() const { return c_; }
  const std::set<std::size_t>& neighbors(std::size_t k) const { return adjacency_.at(k); }
  const LiftingConfig& config() const { return config_; }

  /// Distance between two currently adjacent live vertices (or any pair in
  /// Coordinate mode), floored at the degenerate-distance epsilon.
  double distance(std::size_t k, std::size_t l) const {
    if (config_.metric == MetricMode::Coordinate) return std::max(euclidean(coords_[k], coords_[l]), floor_);
    auto it = base_.find(detail::pair_key(k, l));
    if (it == base_.end()) throw Error(ErrorCategory::Numerical, "no base distance between non-adjacent vertices");
    return std::max(it->second, floor_);
  }

  /// Live vertices whose integral ties for the minimum (relative slack 1e-10,
  /// so rounding noise from rescaled integrals does not split ties).
  std::vector<std::size_t> split_candidates() const {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < size(); ++k) {
      if (active_[k]) lo = std::min(lo, integrals_[k]);
    }
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < size(); ++k) {
      if (active_[k] && integrals_[k] <= lo * (1.0 + kTieSlack)) out.push_back(k);
    }
    return out;
  }

  /// Predict, update and relink around live vertex `k`, then retire it.
  StageResult lift_stage(std::size_t k) {
    if (k >= size() || !active_[k]) throw Error(ErrorCategory::InvalidInput, "vertex " + std::to_string(k) + " is not live");
    if (live_ <= 1) throw Error(ErrorCategory::InvalidInput, "cannot remove the last live vertex");
    const std::size_t stage_index = live_;
    LiftingStage st;
    st.removed = k;
    st.neighbors.assign(adjacency_[k].begin(), adjacency_[k].end());
    if (st.neighbors.empty()) {
      throw Error(ErrorCategory::Degenerate, "isolated vertex at stage " + std::to_string(stage_index));
    }

    std::vector<double> dist;
    dist.reserve(st.neighbors.size());
    for (auto s : st.neighbors) dist.push_back(distance(k, s));
    st.prediction = predict_weights(dist, config_.prediction);

    st.scale = integrals_[k];
    double sq = 0.0;
    for (std::size_t i = 0; i < st.neighbors.size(); ++i) {
      auto& is = integrals_[st.neighbors[i]];
      is += st.prediction[i] * st.scale;
      sq += is * is;
    }
    st.update.resize(st.neighbors.size());
    for (std::size_t i = 0; i < st.neighbors.size(); ++i) st.update[i] = integrals_[st.neighbors[i]] * st.scale / sq;

    StageResult out;
    out.detail = apply_stage(c_, st);

    st.added_edges = relink(st.neighbors);
    for (auto s : st.neighbors) {
      st.removed_edges.emplace_back(std::min(k, s), std::max(k, s));
      adjacency_[s].erase(k);
      base_.erase(detail::pair_key(k, s));
    }
    adjacency_[k].clear();
    active_[k] = false;
    --live_;
    out.stage = std::move(st);
    return out;
  }

  /// Connects a removed vertex's neighbourhood (called before the vertex is
  /// retired) with a minimum
  /// spanning tree when the edges among the neighbours alone leave it split.
  /// Returns the edges that were added.
  std::vector<std::pair<std::size_t, std::size_t>> relink(const std::vector<std::size_t>& nbrs) {
    std::vector<std::pair<std::size_t, std::size_t>> added;
    if (nbrs.size() <= 1) return added;
    std::vector<std::pair<std::size_t, std::size_t>> inner;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
        if (adjacency_[nbrs[i]].contains(nbrs[j])) inner.emplace_back(nbrs[i], nbrs[j]);
      }
    }
    if (is_connected(nbrs, inner)) return added;

    const auto pairwise = neighbourhood_distances(nbrs);
    std::vector<WeightedEdge> candidates;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      for (std::size_t j = i + 1; j < nbrs.size(); ++j) candidates.push_back({i, j, pairwise[i][j]});
    }
    for (const auto& e : minimum_spanning_tree(nbrs.size(), std::move(candidates))) {
      const auto a = nbrs[e.a];
      const auto b = nbrs[e.b];
      if (adjacency_[a].contains(b)) continue;
      adjacency_[a].insert(b);
      adjacency_[b].insert(a);
      // Frozen at link time; later stages treat it as a base distance.
      base_.emplace(detail::pair_key(a, b), e.weight);
      added.emplace_back(std::min(a, b), std::max(a, b));
    }
    return added;
  }

 private:
  static constexpr double kTieSlack = 1e-10;

  // Coordinate mode: Euclidean. PathLength mode: shortest paths through the
  // current live structure, the vertex being removed still included.
  std::vector<std::vector<double>> neighbourhood_distances(const std::vector<std::size_t>& nbrs) const {
    const auto n = nbrs.size();
    std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
    if (config_.metric == MetricMode::Coordinate) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i != j) out[i][j] = distance(nbrs[i], nbrs[j]);
        }
      }
      return out;
    }
    WeightedAdjacency adj(size());
    for (std::size_t v = 0; v < size(); ++v) {
      if (!active_[v]) continue;
      for (auto w : adjacency_[v]) adj[v].emplace_back(w, distance(v, w));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto d = shortest_paths(adj, nbrs[i]);
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        if (!std::isfinite(d[nbrs[j]])) throw Error(ErrorCategory::Degenerate, "disconnected in metric");
        out[i][j] = std::max(d[nbrs[j]], floor_);
      }
    }
    return out;
  }

  LiftingConfig config_;
  std::vector<Point> coords_;
  std::vector<double> c_;
  std::vector<double> integrals_;
  std::vector<bool> active_;
  std::vector<std::set<std::size_t>> adjacency_;
  std::unordered_map<std::uint64_t, double> base_;
  std::size_t live_ = 0;
  double floor_ = 0.0;
};

// ---------------------------------------------------------------------------
// Transforms

namespace detail {

inline std::pair<CoefficientSet, LiftingRecord> run_forward(std::span<const double> values, const LineGraph& lg,
                                                            const LiftingConfig& config,
                                                            const std::vector<std::size_t>* trajectory) {
  LiftingState state(lg, config, values);
  const auto m = lg.size();
  const auto n_stages = m - config.stopping_time;

  LiftingRecord rec;
  rec.size = m;
  rec.config = config;
  rec.initial_integrals = state.integrals();
  rec.stages.reserve(n_stages);

  CoefficientSet coeffs;
  coeffs.detail_ids.reserve(n_stages);
  coeffs.details.reserve(n_stages);

  auto rng = make_rng(config.seed, Stream::TieBreak);
  for (std::size_t j = 0; j < n_stages; ++j) {
    std::size_t k;
    if (trajectory) {
      k = (*trajectory)[j];
    } else {
      auto cand = state.split_candidates();
      if (cand.size() == 1) {
        k = cand.front();
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, cand.size() - 1);
        k = cand[pick(rng)];
      }
    }
    auto res = state.lift_stage(k);
    coeffs.detail_ids.push_back(k);
    coeffs.details.push_back(res.detail);
    coeffs.scales.push_back(res.stage.scale);
    rec.stages.push_back(std::move(res.stage));
  }
  rec.final_integrals = state.integrals();
  for (std::size_t k = 0; k < m; ++k) {
    if (state.is_active(k)) {
      rec.survivors.push_back(k);
      coeffs.scaling_ids.push_back(k);
      coeffs.scaling.push_back(state.coefficients()[k]);
    }
  }
  return {std::move(coeffs), std::move(rec)};
}

}  // namespace detail

/// Full decomposition: split by minimum integral (seeded random tie-break)
/// until `stopping_time` scaling coefficients remain.
inline std::pair<CoefficientSet, LiftingRecord> forward(std::span<const double> values, const LineGraph& lg,
                                                        const LiftingConfig& config) {
  return detail::run_forward(values, lg, config, nullptr);
}

/// Decomposition with a prescribed removal order. `trajectory` holds either
/// the m - tau ids to remove, or a full permutation of which the first m - tau
/// entries are used.
inline std::pair<CoefficientSet, LiftingRecord> forward_with_trajectory(std::span<const double> values,
                                                                        const LineGraph& lg,
                                                                        const LiftingConfig& config,
                                                                        std::span<const std::size_t> trajectory) {
  const auto m = lg.size();
  if (config.stopping_time < 2 || config.stopping_time >= m) throw Error(ErrorCategory::Config, "stopping time must satisfy 2 <= tau < m");
  const auto n_stages = m - config.stopping_time;
  if (trajectory.size() != n_stages && trajectory.size() != m) {
    throw Error(ErrorCategory::InvalidInput, "invalid trajectory: expected " + std::to_string(n_stages) + " or " +
                                                 std::to_string(m) + " ids, got " + std::to_string(trajectory.size()));
  }
  std::vector<bool> seen(m, false);
  for (auto k : trajectory) {
    if (k >= m) throw Error(ErrorCategory::InvalidInput, "invalid trajectory: id " + std::to_string(k) + " out of range");
    if (seen[k]) throw Error(ErrorCategory::InvalidInput, "invalid trajectory: id " + std::to_string(k) + " repeated");
    seen[k] = true;
  }
  std::vector<std::size_t> order(trajectory.begin(), trajectory.begin() + static_cast<std::ptrdiff_t>(n_stages));
  return detail::run_forward(values, lg, config, &order);
}

/// Replays an archived decomposition on new values. Equivalent to
/// forward_with_trajectory along the record's removal order, without
/// recomputing filters.
inline CoefficientSet apply_forward(const LiftingRecord& rec, std::span<const double> values) {
  if (values.size() != rec.size) throw Error(ErrorCategory::InvalidInput, "value count does not match record");
  std::vector<double> c(values.begin(), values.end());
  CoefficientSet out;
  out.detail_ids.reserve(rec.stages.size());
  for (const auto& st : rec.stages) {
    out.detail_ids.push_back(st.removed);
    out.details.push_back(apply_stage(c, st));
    out.scales.push_back(st.scale);
  }
  out.scaling_ids = rec.survivors;
  for (auto k : rec.survivors) out.scaling.push_back(c[k]);
  return out;
}

/// Exact inverse: undo the stages from the last to the first.
inline std::vector<double> inverse(const CoefficientSet& coeffs, const LiftingRecord& rec) {
  if (coeffs.details.size() != rec.stages.size() || coeffs.detail_ids.size() != rec.stages.size() ||
      coeffs.scaling.size() != rec.survivors.size() || coeffs.scaling_ids != rec.survivors) {
    throw Error(ErrorCategory::InvalidInput, "coefficient set does not match lifting record");
  }
  for (std::size_t j = 0; j < rec.stages.size(); ++j) {
    if (coeffs.detail_ids[j] != rec.stages[j].removed) {
      throw Error(ErrorCategory::InvalidInput, "coefficient set does not match lifting record");
    }
  }
  std::vector<double> c(rec.size, 0.0);
  for (std::size_t i = 0; i < rec.survivors.size(); ++i) c[rec.survivors[i]] = coeffs.scaling[i];
  for (std::size_t j = rec.stages.size(); j-- > 0;) undo_stage(c, rec.stages[j], coeffs.details[j]);
  return c;
}

/// Euclidean norm of each dual wavelet (row of the forward matrix), in
/// removal order. A detail computed from iid noise of variance s^2 has
/// standard deviation s times this norm.
inline std::vector<double> detail_norms(const LiftingRecord& rec) {
  const auto m = rec.size;
  // rows[k] is the linear functional currently producing coefficient k.
  std::vector<std::vector<double>> rows(m, std::vector<double>(m, 0.0));
  for (std::size_t k = 0; k < m; ++k) rows[k][k] = 1.0;
  std::vector<double> out;
  out.reserve(rec.stages.size());
  for (const auto& st : rec.stages) {
    auto& wk = rows[st.removed];
    for (std::size_t i = 0; i < st.neighbors.size(); ++i) {
      const auto& ws = rows[st.neighbors[i]];
      for (std::size_t t = 0; t < m; ++t) wk[t] -= st.prediction[i] * ws[t];
    }
    double sq = 0.0;
    for (double x : wk) sq += x * x;
    out.push_back(std::sqrt(sq));
    for (std::size_t i = 0; i < st.neighbors.size(); ++i) {
      auto& ws = rows[st.neighbors[i]];
      for (std::size_t t = 0; t < m; ++t) ws[t] += st.update[i] * wk[t];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Artificial levels

/// max(3, floor(log2 m)).
inline std::size_t default_level_count(std::size_t m) {
  std::size_t lg2 = 0;
  while ((std::size_t{1} << (lg2 + 1)) <= m) ++lg2;
  return std::max<std::size_t>(3, lg2);
}

/// Groups details into `level_count` artificial levels by equally spaced
/// quantiles of their scale values. Level 0 holds the smallest scales
/// (finest); ties go to the earlier removal first.
inline void assign_artificial_levels(CoefficientSet& coeffs, std::size_t level_count) {
  const auto n = coeffs.details.size();
  if (level_count < 3) throw Error(ErrorCategory::Config, "need at least 3 artificial levels");
  if (level_count > n) {
    throw Error(ErrorCategory::Config, "too many artificial levels: " + std::to_string(level_count) + " for " +
                                           std::to_string(n) + " details");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return coeffs.scales[i] < coeffs.scales[j]; });
  coeffs.levels.assign(n, 0);
  for (std::size_t level = 0; level < level_count; ++level) {
    const auto lo = level * n / level_count;
    const auto hi = (level + 1) * n / level_count;
    for (auto p = lo; p < hi; ++p) coeffs.levels[order[p]] = static_cast<int>(level);
  }
}

// ---------------------------------------------------------------------------
// Diagnostics

struct FilterDiagnostics {
  std::size_t stages = 0;
  std::size_t stages_with_small_update = 0;  // every b <= 1/2
  std::size_t taps = 0;
  std::size_t taps_with_small_update = 0;
  double max_prediction_sum_error = 0.0;
  double min_prediction = std::numeric_limits<double>::infinity();
  double min_update = std::numeric_limits<double>::infinity();
  double max_update = 0.0;

  double small_update_fraction() const { return stages ? static_cast<double>(stages_with_small_update) / static_cast<double>(stages) : 1.0; }
};

inline FilterDiagnostics filter_diagnostics(const LiftingRecord& rec) {
  FilterDiagnostics d;
  for (const auto& st : rec.stages) {
    ++d.stages;
    double sum = 0.0;
    bool small = true;
    for (std::size_t i = 0; i < st.neighbors.size(); ++i) {
      sum += st.prediction[i];
      d.min_prediction = std::min(d.min_prediction, st.prediction[i]);
      d.min_update = std::min(d.min_update, st.update[i]);
      d.max_update = std::max(d.max_update, st.update[i]);
      ++d.taps;
      if (st.update[i] <= 0.5) ++d.taps_with_small_update;
      else small = false;
    }
    if (small) ++d.stages_with_small_update;
    d.max_prediction_sum_error = std::max(d.max_prediction_sum_error, std::abs(sum - 1.0));
  }
  return d;
}

}  // namespace lgl
