#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <sstream>

#include "lgl/analysis.hpp"
#include "lgl/simulation.hpp"

using namespace lgl;

namespace {

// Independent route: square roots of the eigenvalues of A^T A.
double condition_via_eigen(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.transpose() * a);
  const auto& ev = es.eigenvalues();
  return std::sqrt(ev.maxCoeff() / ev.minCoeff());
}

LineGraph path3() {
  LineGraph lg;
  lg.add_vertex(0, Point{0, 0});
  lg.add_vertex(1, Point{1, 0});
  lg.add_vertex(2, Point{3, 0});
  lg.add_edge(0, 1);
  lg.add_edge(1, 2);
  return lg;
}

}  // namespace

TEST(ConditionNumber, TrivialMatrices) {
  EXPECT_NEAR(condition_number(Eigen::MatrixXd::Identity(5, 5)), 1.0, 1e-14);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 1.0;
  EXPECT_NEAR(condition_number(d), 4.0, 1e-14);
  Eigen::MatrixXd sing = Eigen::MatrixXd::Ones(3, 3);
  EXPECT_THROW(condition_number(sing), Error);
}

TEST(ConditionNumber, MatchesEigenRoute) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto lg = build_line_graph(sample_network(40, seed));
    for (auto name : {"LG-Aid-c", "LG-Dnw-p"}) {
      auto mats = build_matrices(lg, parse_variant(name));
      const double k1 = condition_number(mats);
      EXPECT_GE(k1, 1.0);
      EXPECT_NEAR(k1, condition_via_eigen(mats.forward), 1e-6 * k1);
    }
  }
}

TEST(Matrices, HandLiftedThreeVertexCase) {
  auto lg = path3();
  LiftingConfig cfg;
  cfg.integrals = IntegralScheme::Delta;
  std::vector<double> zeros(3, 0.0);
  std::vector<std::size_t> traj{1};
  auto mats = build_matrices(forward_with_trajectory(zeros, lg, cfg, traj).second);
  Eigen::Matrix3d expect;
  expect << -2.0 / 3.0, 1.0, -1.0 / 3.0,  //
      31.0 / 41.0, 15.0 / 41.0, -5.0 / 41.0,  //
      -8.0 / 41.0, 12.0 / 41.0, 37.0 / 41.0;
  EXPECT_LT((mats.forward - expect).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(mats.row_ids, (std::vector<std::size_t>{1, 0, 2}));
  EXPECT_EQ(mats.detail_rows, 1u);
}

TEST(Matrices, InverseIdentityAndConstantAnnihilation) {
  auto lg = build_line_graph(sample_network(100, 3));
  for (auto name : {"LG-Aid-c", "LG-Dnw-p"}) {
    auto mats = build_matrices(lg, parse_variant(name));
    EXPECT_LT(identity_residual(mats), 1e-8);
    const auto n = mats.forward.rows();
    EXPECT_LT((mats.inverse * mats.forward - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-8);
    Eigen::VectorXd r = mats.forward * Eigen::VectorXd::Ones(n);
    EXPECT_LT(r.head(static_cast<Eigen::Index>(mats.detail_rows)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Matrices, InvariantUnderMetricScaling) {
  auto g = sample_network(50, 8);
  auto lg = build_line_graph(g);
  LineGraph scaled;
  for (const auto& v : lg.vertices()) scaled.add_vertex(v.id, Point{v.position->x * 37.0, v.position->y * 37.0});
  for (const auto& e : lg.edges()) scaled.add_edge(e.a, e.b, *e.length * 37.0);
  for (auto name : {"LG-Sid-c", "LG-Aid-p"}) {
    auto a = build_matrices(lg, parse_variant(name));
    auto b = build_matrices(scaled, parse_variant(name));
    ASSERT_EQ(a.row_ids, b.row_ids);
    EXPECT_LT((a.forward - b.forward).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(condition_number(a), condition_number(b), 1e-6 * condition_number(a));
  }
}

TEST(Sparsity, EndpointsAndConstantTruth) {
  auto lg = build_line_graph(sample_network(60, 2));
  auto truth = embed_pointwise(field_by_name("blocks"), sample_network(60, 2));
  auto curve = sparsity_curve(truth, lg, {});
  EXPECT_EQ(curve.ise.size(), lg.size() - 1);
  EXPECT_LE(curve.ise.back(), 1e-8);
  for (double x : curve.ise) EXPECT_GE(x, 0.0);
  std::vector<double> flat(lg.size(), -2.5);
  EXPECT_LE(sparsity_curve(flat, lg, {}).ise.front(), 1e-12);
}

TEST(Sparsity, GreedyVersusBestSubsetAtSixVertices) {
  // Path of 7 source vertices: 6 edges, two flat clusters.
  Graph g;
  for (int i = 0; i < 7; ++i) g.add_vertex(i, Point{static_cast<double>(i), 0.1 * (i % 2)});
  for (int i = 0; i < 6; ++i) g.add_edge(i, i, i + 1);
  auto lg = build_line_graph(g);
  std::vector<double> truth{1, 1, 1, 4, 4, 4};
  auto [coeffs, rec] = forward(truth, lg, {});
  auto greedy = sparsity_curve(truth, coeffs, rec);
  const auto n = coeffs.details.size();
  auto ise_of = [&](unsigned mask) {
    auto kept = coeffs;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(mask & (1u << j))) kept.details[j] = 0.0;
    }
    auto v = inverse(kept, rec);
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) s += (v[k] - truth[k]) * (v[k] - truth[k]);
    return s;
  };
  for (std::size_t k = 1; k <= 3; ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) == k) best = std::min(best, ise_of(mask));
    }
    EXPECT_GE(greedy.ise[k] + 1e-12, best);
    RecordProperty("gap_k" + std::to_string(k), std::to_string(greedy.ise[k] - best));
  }
  EXPECT_LE(greedy.ise.back(), 1e-12);
}

TEST(Sparsity, AveragedCurve) {
  std::vector<SparsityCurve> curves;
  for (std::uint64_t q = 0; q < 3; ++q) {
    auto g = sample_network(40, q + 30);
    curves.push_back(sparsity_curve(embed_pointwise(field_by_name("heavisine"), g), build_line_graph(g), {}));
  }
  auto avg = average_curves(curves);
  EXPECT_EQ(avg.graphs, 3u);
  EXPECT_NEAR(avg.ise[0], (curves[0].ise[0] + curves[1].ise[0] + curves[2].ise[0]) / 3.0, 1e-12);
  curves[1].ise.pop_back();
  EXPECT_THROW(average_curves(curves), Error);
}

TEST(Export, CsvLayout) {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.5, -0.25, 2.0;
  std::vector<std::size_t> ids{1, 0};
  std::ostringstream os;
  write_matrix_csv(os, a, ids);
  EXPECT_EQ(os.str(), "row_id,c0,c1\n1,1,0.5\n0,-0.25,2\n");
  SparsityCurve c;
  c.ise = {3.0, 0.0};
  std::ostringstream oc;
  write_curve_csv(oc, c);
  EXPECT_EQ(oc.str(), "t,ise\n1,3\n2,0\n");
}
