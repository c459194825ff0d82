#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lgl/lifting.hpp"
#include "lgl/simulation.hpp"

using namespace lgl;

namespace {

// Vertex 0 at the origin with neighbours at distances 2 and 3.
LineGraph elbow() {
  LineGraph lg;
  lg.add_vertex(0, Point{0, 0});
  lg.add_vertex(1, Point{2, 0});
  lg.add_vertex(2, Point{0, 3});
  lg.add_edge(0, 1, 2.0);
  lg.add_edge(0, 2, 3.0);
  return lg;
}

LineGraph random_line_graph(std::size_t n, std::uint64_t seed) { return build_line_graph(sample_network(n, seed)); }

std::vector<double> random_values(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> v(m);
  for (auto& x : v) x = z(rng);
  return v;
}

LiftingConfig config_for(const std::string& name) { return parse_variant(name); }

}  // namespace

TEST(Integrals, DeltaIsAllOnes) {
  auto in = init_integrals(elbow(), IntegralScheme::Delta, MetricMode::Coordinate);
  EXPECT_EQ(in, (std::vector<double>{1.0, 1.0, 1.0}));
}

TEST(Integrals, SumAndAverage) {
  auto lg = elbow();
  auto sum = init_integrals(lg, IntegralScheme::Sum, MetricMode::Coordinate);
  auto avg = init_integrals(lg, IntegralScheme::Average, MetricMode::Coordinate);
  EXPECT_DOUBLE_EQ(sum[0], 5.0);
  EXPECT_DOUBLE_EQ(avg[0], 1.25);
  EXPECT_DOUBLE_EQ(sum[1], 2.0);
  EXPECT_DOUBLE_EQ(avg[2], 1.5);
  auto sum_p = init_integrals(lg, IntegralScheme::Sum, MetricMode::PathLength);
  EXPECT_DOUBLE_EQ(sum_p[0], 5.0);
}

TEST(Prediction, InverseDistanceWeights) {
  std::vector<double> d{1.0, 3.0};
  auto a = predict_weights(d, PredictionScheme::InverseDistance);
  EXPECT_NEAR(a[0], 0.75, 1e-15);
  EXPECT_NEAR(a[1], 0.25, 1e-15);
}

TEST(Prediction, MovingAverageAndSingleNeighbour) {
  std::vector<double> d{1.0, 3.0, 7.0, 0.5};
  for (double w : predict_weights(d, PredictionScheme::MovingAverage)) EXPECT_DOUBLE_EQ(w, 0.25);
  std::vector<double> one{4.2};
  EXPECT_EQ(predict_weights(one, PredictionScheme::InverseDistance), std::vector<double>{1.0});
  std::vector<double> bad{1.0, 0.0};
  EXPECT_THROW(predict_weights(bad, PredictionScheme::InverseDistance), Error);
}

TEST(Stage, DetailOfWorkedExample) {
  LiftingStage st;
  st.removed = 0;
  st.neighbors = {1, 2};
  st.prediction = {0.75, 0.25};
  st.update = {0.0, 0.0};
  std::vector<double> c{10.0, 4.0, 8.0};
  EXPECT_DOUBLE_EQ(apply_stage(c, st), 5.0);
}

TEST(Stage, DeltaFirstStageUpdate) {
  // Neighbour distances 1 and 3 from vertex 0.
  LineGraph lg;
  lg.add_vertex(0, Point{0, 0});
  lg.add_vertex(1, Point{1, 0});
  lg.add_vertex(2, Point{-3, 0});
  lg.add_edge(0, 1);
  lg.add_edge(0, 2);
  LiftingConfig cfg;
  cfg.integrals = IntegralScheme::Delta;
  std::vector<double> v{1.0, 2.0, 3.0};
  LiftingState st(lg, cfg, v);
  auto res = st.lift_stage(0);
  const double denom = 1.75 * 1.75 + 1.25 * 1.25;
  EXPECT_NEAR(res.stage.update[0], 1.75 / denom, 1e-15);
  EXPECT_NEAR(res.stage.update[1], 1.25 / denom, 1e-15);
  EXPECT_NEAR(st.integrals()[1], 1.75, 1e-15);
  EXPECT_NEAR(res.detail, 1.0 - (0.75 * 2.0 + 0.25 * 3.0), 1e-15);
}

TEST(Relink, TriangleIsNoOp) {
  LineGraph lg;
  lg.add_vertex(0, Point{0, 0});
  lg.add_vertex(1, Point{1, 0});
  lg.add_vertex(2, Point{0, 1});
  lg.add_vertex(3, Point{2, 2});
  lg.add_edge(0, 1);
  lg.add_edge(0, 2);
  lg.add_edge(1, 2);
  lg.add_edge(2, 3);
  std::vector<double> v(4, 0.0);
  LiftingState st(lg, {}, v);
  EXPECT_TRUE(st.lift_stage(0).stage.added_edges.empty());
}

TEST(Relink, PathJoinsTwoNeighbours) {
  LineGraph lg;
  for (int i = 0; i < 3; ++i) lg.add_vertex(i, Point{static_cast<double>(i), 0.0});
  lg.add_edge(0, 1);
  lg.add_edge(1, 2);
  std::vector<double> v(3, 0.0);
  LiftingConfig cfg;
  LiftingState st(lg, cfg, v);
  auto res = st.lift_stage(1);
  ASSERT_EQ(res.stage.added_edges.size(), 1u);
  EXPECT_EQ(res.stage.added_edges[0], (std::pair<std::size_t, std::size_t>{0, 2}));
  EXPECT_TRUE(st.neighbors(0).contains(2));
  EXPECT_DOUBLE_EQ(st.distance(0, 2), 2.0);
}

TEST(Relink, StarUsesMinimumSpanningTree) {
  LineGraph lg;
  lg.add_vertex(0, Point{0, 0});
  lg.add_vertex(1, Point{1, 0});
  lg.add_vertex(2, Point{0, 1});
  lg.add_vertex(3, Point{-2, 0});
  for (std::size_t s = 1; s <= 3; ++s) lg.add_edge(0, s);
  std::vector<double> v(4, 0.0);
  LiftingState st(lg, {}, v);
  auto added = st.lift_stage(0).stage.added_edges;
  std::sort(added.begin(), added.end());
  EXPECT_EQ(added, (std::vector<std::pair<std::size_t, std::size_t>>{{1, 2}, {2, 3}}));
}

TEST(Relink, PathLengthFreezesShortestPath) {
  LineGraph lg;
  for (int i = 0; i < 3; ++i) lg.add_vertex(i);
  lg.add_edge(0, 1, 1.5);
  lg.add_edge(1, 2, 2.5);
  LiftingConfig cfg;
  cfg.metric = MetricMode::PathLength;
  std::vector<double> v(3, 0.0);
  LiftingState st(lg, cfg, v);
  st.lift_stage(1);
  EXPECT_DOUBLE_EQ(st.distance(0, 2), 4.0);
}

class AllVariants : public ::testing::TestWithParam<std::string> {};

TEST_P(AllVariants, PerfectReconstruction) {
  auto cfg = config_for(GetParam());
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto lg = random_line_graph(100, seed);
    auto v = random_values(lg.size(), seed + 10);
    cfg.seed = seed;
    auto [coeffs, rec] = forward(v, lg, cfg);
    EXPECT_EQ(coeffs.size(), lg.size());
    EXPECT_EQ(rec.survivors.size(), 2u);
    auto back = inverse(coeffs, rec);
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(back[k], v[k], 1e-8);
  }
}

TEST_P(AllVariants, IntegralScaleInvariance) {
  auto cfg = config_for(GetParam());
  auto lg = random_line_graph(60, 7);
  auto v = random_values(lg.size(), 8);
  auto [c0, r0] = forward(v, lg, cfg);
  for (double scale : {0.5, 2.0, 1000.0}) {
    auto scaled = cfg;
    scaled.integral_scale = scale;
    auto [c1, r1] = forward(v, lg, scaled);
    ASSERT_EQ(r1.removal_order(), r0.removal_order());
    for (std::size_t j = 0; j < c0.details.size(); ++j) {
      EXPECT_NEAR(c1.details[j], c0.details[j], 1e-9 * (1.0 + std::abs(c0.details[j])));
      for (std::size_t i = 0; i < r0.stages[j].update.size(); ++i) {
        EXPECT_NEAR(r1.stages[j].prediction[i], r0.stages[j].prediction[i], 1e-12);
        EXPECT_NEAR(r1.stages[j].update[i], r0.stages[j].update[i], 1e-9);
      }
    }
  }
}

TEST_P(AllVariants, ConstantSignalHasZeroDetails) {
  auto cfg = config_for(GetParam());
  auto lg = random_line_graph(80, 4);
  std::vector<double> v(lg.size(), 3.5);
  auto [coeffs, rec] = forward(v, lg, cfg);
  for (double d : coeffs.details) EXPECT_NEAR(d, 0.0, 1e-10);
  auto diag = filter_diagnostics(rec);
  EXPECT_LT(diag.max_prediction_sum_error, 1e-12);
  EXPECT_GE(diag.min_prediction, 0.0);
  EXPECT_GT(diag.min_update, 0.0);
}

TEST_P(AllVariants, SplitPicksMinimumIntegral) {
  auto cfg = config_for(GetParam());
  auto lg = random_line_graph(50, 5);
  auto v = random_values(lg.size(), 6);
  LiftingState st(lg, cfg, v);
  while (st.live_count() > cfg.stopping_time) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < st.size(); ++k) {
      if (st.is_active(k)) lo = std::min(lo, st.integrals()[k]);
    }
    auto cand = st.split_candidates();
    ASSERT_FALSE(cand.empty());
    for (auto k : cand) EXPECT_LE(st.integrals()[k], lo * (1.0 + 1e-10));
    st.lift_stage(cand.front());
  }
}

TEST_P(AllVariants, ReplayMatchesForward) {
  auto cfg = config_for(GetParam());
  auto lg = random_line_graph(70, 9);
  auto x = random_values(lg.size(), 1);
  auto y = random_values(lg.size(), 2);
  auto [cx, rec] = forward(x, lg, cfg);
  auto order = rec.removal_order();
  auto [cy, ry] = forward_with_trajectory(y, lg, cfg, order);
  auto replay = apply_forward(rec, y);
  for (std::size_t j = 0; j < cy.details.size(); ++j) EXPECT_NEAR(replay.details[j], cy.details[j], 1e-12);
  // Linear in the values for a fixed trajectory.
  std::vector<double> z(x.size());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = 2.0 * x[k] - 0.5 * y[k];
  auto cz = apply_forward(rec, z);
  auto fz = cz.flatten(), fx = cx.flatten(), fy = cy.flatten();
  for (std::size_t j = 0; j < fz.size(); ++j) EXPECT_NEAR(fz[j], 2.0 * fx[j] - 0.5 * fy[j], 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Lifting, AllVariants, ::testing::ValuesIn(all_variant_names()),
                         [](const auto& info) {
                           std::string s = info.param;
                           std::replace(s.begin(), s.end(), '-', '_');
                           return s;
                         });

TEST(Trajectory, SameTrajectorySameCoefficients) {
  auto lg = random_line_graph(40, 11);
  auto v = random_values(lg.size(), 12);
  std::vector<std::size_t> perm(lg.size());
  std::iota(perm.rbegin(), perm.rend(), 0);
  LiftingConfig cfg;
  auto [a, ra] = forward_with_trajectory(v, lg, cfg, perm);
  auto [b, rb] = forward_with_trajectory(v, lg, cfg, std::span(perm).first(lg.size() - 2));
  EXPECT_EQ(a.details, b.details);
  EXPECT_EQ(ra.removal_order(), std::vector<std::size_t>(perm.begin(), perm.end() - 2));
  std::vector<std::size_t> other(perm);
  std::swap(other[0], other[1]);
  auto [c, rc] = forward_with_trajectory(v, lg, cfg, other);
  EXPECT_NE(a.details, c.details);
}

TEST(Trajectory, RejectsBadTrajectories) {
  auto lg = random_line_graph(20, 3);
  std::vector<double> v(lg.size(), 0.0);
  std::vector<std::size_t> rep(lg.size() - 2, 0);
  EXPECT_THROW(forward_with_trajectory(v, lg, {}, rep), Error);
  std::vector<std::size_t> short_one{0, 1};
  EXPECT_THROW(forward_with_trajectory(v, lg, {}, short_one), Error);
  std::vector<std::size_t> oob(lg.size() - 2);
  std::iota(oob.begin(), oob.end(), 0);
  oob.back() = lg.size() + 5;
  EXPECT_THROW(forward_with_trajectory(v, lg, {}, oob), Error);
}

TEST(Canonical, DetailRoundTrip) {
  auto lg = random_line_graph(30, 21);
  std::vector<double> v(lg.size(), 0.0);
  auto [coeffs, rec] = forward(v, lg, {});
  for (std::size_t j = 0; j < coeffs.details.size(); j += 7) {
    auto unit = coeffs;
    std::fill(unit.details.begin(), unit.details.end(), 0.0);
    unit.details[j] = 1.0;
    auto back = apply_forward(rec, inverse(unit, rec));
    for (std::size_t i = 0; i < back.details.size(); ++i) EXPECT_NEAR(back.details[i], i == j ? 1.0 : 0.0, 1e-10);
    for (double s : back.scaling) EXPECT_NEAR(s, 0.0, 1e-10);
  }
}

TEST(Inverse, RejectsMismatchedRecord) {
  auto lg = random_line_graph(20, 4);
  std::vector<double> v(lg.size(), 1.0);
  auto [coeffs, rec] = forward(v, lg, {});
  auto bad = coeffs;
  std::swap(bad.detail_ids[0], bad.detail_ids[1]);
  EXPECT_THROW(inverse(bad, rec), Error);
  bad = coeffs;
  bad.details.pop_back();
  EXPECT_THROW(inverse(bad, rec), Error);
}

TEST(Levels, QuantileGroups) {
  CoefficientSet c;
  c.scales = {1, 1, 2, 3, 3, 9};
  c.details.assign(6, 0.0);
  assign_artificial_levels(c, 3);
  EXPECT_EQ(c.levels, (std::vector<int>{0, 0, 1, 1, 2, 2}));
}

TEST(Levels, EightDetailsFourLevels) {
  CoefficientSet c;
  c.scales = {8, 7, 6, 5, 4, 3, 2, 1};
  c.details.assign(8, 0.0);
  assign_artificial_levels(c, 4);
  EXPECT_EQ(c.levels, (std::vector<int>{3, 3, 2, 2, 1, 1, 0, 0}));
}

TEST(Levels, TiesKeepRemovalOrder) {
  CoefficientSet c;
  c.scales.assign(6, 1.0);
  c.details.assign(6, 0.0);
  assign_artificial_levels(c, 3);
  EXPECT_EQ(c.levels, (std::vector<int>{0, 0, 1, 1, 2, 2}));
  EXPECT_THROW(assign_artificial_levels(c, 2), Error);
  EXPECT_THROW(assign_artificial_levels(c, 7), Error);
}

TEST(Levels, DefaultCount) {
  EXPECT_EQ(default_level_count(4), 3u);
  EXPECT_EQ(default_level_count(99), 6u);
  EXPECT_EQ(default_level_count(1024), 10u);
}

TEST(AffineBound, FirstStageDetailBoundedByGradient) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto lg = random_line_graph(40, seed);
    Rng rng(seed);
    std::normal_distribution<double> z;
    const double ax = z(rng), ay = z(rng);
    const double grad = std::hypot(ax, ay);
    std::vector<double> v(lg.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = 1.0 + ax * lg.vertices()[k].position->x + ay * lg.vertices()[k].position->y;
    for (auto pred : {PredictionScheme::InverseDistance, PredictionScheme::MovingAverage}) {
      LiftingConfig cfg;
      cfg.prediction = pred;
      LiftingState st(lg, cfg, v);
      const auto k = st.split_candidates().front();
      double mean = 0.0;
      for (auto s : st.neighbors(k)) mean += st.distance(k, s);
      mean /= static_cast<double>(st.neighbors(k).size());
      auto res = st.lift_stage(k);
      EXPECT_LE(std::abs(res.detail), grad * mean * (1.0 + 1e-12));
    }
  }
}

TEST(Determinism, SameSeedSameResult) {
  auto lg = random_line_graph(60, 13);
  auto v = random_values(lg.size(), 14);
  auto cfg = config_for("LG-Dnw-c");
  cfg.seed = 99;
  auto [a, ra] = forward(v, lg, cfg);
  auto [b, rb] = forward(v, lg, cfg);
  EXPECT_EQ(a.details, b.details);
  EXPECT_EQ(ra.removal_order(), rb.removal_order());
  cfg.seed = 100;
  auto [c, rc] = forward(v, lg, cfg);
  EXPECT_NE(ra.removal_order(), rc.removal_order());
}

TEST(DetailNorms, MatchCanonicalRows) {
  auto lg = random_line_graph(25, 17);
  std::vector<double> v(lg.size(), 0.0);
  auto [coeffs, rec] = forward(v, lg, {});
  auto norms = detail_norms(rec);
  // Row j of the forward matrix via unit input vectors.
  std::vector<double> sq(coeffs.details.size(), 0.0);
  for (std::size_t t = 0; t < lg.size(); ++t) {
    std::vector<double> e(lg.size(), 0.0);
    e[t] = 1.0;
    auto c = apply_forward(rec, e);
    for (std::size_t j = 0; j < sq.size(); ++j) sq[j] += c.details[j] * c.details[j];
  }
  for (std::size_t j = 0; j < sq.size(); ++j) EXPECT_NEAR(norms[j], std::sqrt(sq[j]), 1e-12);
}

TEST(Variants, NamesRoundTrip) {
  auto names = all_variant_names();
  EXPECT_EQ(names.size(), 12u);
  for (const auto& n : names) EXPECT_EQ(variant_name(parse_variant(n)), n);
  EXPECT_THROW(parse_variant("LG-Xid-c"), Error);
}

TEST(Config, RejectsBadStoppingTime) {
  auto lg = random_line_graph(10, 1);
  std::vector<double> v(lg.size(), 0.0);
  LiftingConfig cfg;
  cfg.stopping_time = 1;
  EXPECT_THROW(forward(v, lg, cfg), Error);
  cfg.stopping_time = lg.size();
  EXPECT_THROW(forward(v, lg, cfg), Error);
}
