#pragma once

// Matrix form of the transform, condition numbers and sparsity curves.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "lgl/error.hpp"
#include "lgl/lifting.hpp"

namespace lgl {

/// Forward matrix Rt (rows: details in removal order, then scaling ids
/// ascending) and inverse matrix R (columns in the same order). Both come from
/// one record, so Rt * R = I.
struct TransformMatrices {
  Eigen::MatrixXd forward;
  Eigen::MatrixXd inverse;
  std::vector<std::size_t> row_ids;  // line-graph vertex index of each row of `forward`
  std::size_t detail_rows = 0;
};

inline TransformMatrices build_matrices(const LiftingRecord& rec) {
  const auto m = rec.size;
  TransformMatrices out;
  out.forward.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  out.inverse.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  out.row_ids = rec.removal_order();
  out.row_ids.insert(out.row_ids.end(), rec.survivors.begin(), rec.survivors.end());
  out.detail_rows = rec.stages.size();

  std::vector<double> e(m, 0.0);
  for (std::size_t t = 0; t < m; ++t) {
    e[t] = 1.0;
    const auto col = apply_forward(rec, e).flatten();
    for (std::size_t r = 0; r < m; ++r) out.forward(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = col[r];
    e[t] = 0.0;
  }
  CoefficientSet unit;
  unit.detail_ids = rec.removal_order();
  unit.details.assign(rec.stages.size(), 0.0);
  unit.scaling_ids = rec.survivors;
  unit.scaling.assign(rec.survivors.size(), 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    auto& slot = r < out.detail_rows ? unit.details[r] : unit.scaling[r - out.detail_rows];
    slot = 1.0;
    const auto col = inverse(unit, rec);
    for (std::size_t k = 0; k < m; ++k) out.inverse(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r)) = col[k];
    slot = 0.0;
  }
  return out;
}

/// Captures the removal order once (values do not influence it) and builds
/// the matrices from that record.
inline TransformMatrices build_matrices(const LineGraph& lg, const LiftingConfig& config) {
  std::vector<double> zeros(lg.size(), 0.0);
  return build_matrices(forward(zeros, lg, config).second);
}

/// Ratio of the extreme singular values.
inline double condition_number(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) throw Error(ErrorCategory::InvalidInput, "empty matrix");
  const double hi = s(0), lo = s(s.size() - 1);
  if (!(lo > hi * 1e-14)) throw Error(ErrorCategory::Numerical, "transform not invertible");
  return hi / lo;
}

inline double condition_number(const TransformMatrices& mats) { return condition_number(mats.forward); }

/// Max-norm of Rt * R - I.
inline double identity_residual(const TransformMatrices& mats) {
  const auto n = mats.forward.rows();
  return (mats.forward * mats.inverse - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Sparsity

/// ise[t - 1] for t = 1..(m - tau + 1): error after reconstructing from the
/// scaling coefficients plus the t - 1 largest-magnitude details.
struct SparsityCurve {
  std::vector<double> ise;
  std::size_t graphs = 0;
  std::size_t monotonicity_violations = 0;  // increases beyond 1e-10
};

inline std::size_t count_increases(std::span<const double> ise, double slack = 1e-10) {
  std::size_t n = 0;
  for (std::size_t t = 1; t < ise.size(); ++t) {
    if (ise[t] > ise[t - 1] + slack) ++n;
  }
  return n;
}

/// Curve for one decomposition of noiseless `truth`.
inline SparsityCurve sparsity_curve(std::span<const double> truth, const CoefficientSet& coeffs, const LiftingRecord& rec) {
  const auto n = coeffs.details.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return std::abs(coeffs.details[i]) > std::abs(coeffs.details[j]); });
  SparsityCurve out;
  out.graphs = 1;
  auto kept = coeffs;
  std::fill(kept.details.begin(), kept.details.end(), 0.0);
  for (std::size_t t = 0; t <= n; ++t) {
    if (t > 0) kept.details[order[t - 1]] = coeffs.details[order[t - 1]];
    const auto rec_values = inverse(kept, rec);
    double ise = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) ise += (rec_values[k] - truth[k]) * (rec_values[k] - truth[k]);
    out.ise.push_back(ise);
  }
  out.monotonicity_violations = count_increases(out.ise);
  return out;
}

inline SparsityCurve sparsity_curve(std::span<const double> truth, const LineGraph& lg, const LiftingConfig& config) {
  auto [coeffs, rec] = forward(truth, lg, config);
  return sparsity_curve(truth, coeffs, rec);
}

/// Pointwise mean of per-graph curves of equal length.
inline SparsityCurve average_curves(std::span<const SparsityCurve> curves) {
  if (curves.empty()) throw Error(ErrorCategory::InvalidInput, "no sparsity curves to average");
  SparsityCurve out;
  out.ise.assign(curves.front().ise.size(), 0.0);
  for (const auto& c : curves) {
    if (c.ise.size() != out.ise.size()) throw Error(ErrorCategory::InvalidInput, "sparsity curves differ in length");
    for (std::size_t t = 0; t < c.ise.size(); ++t) out.ise[t] += c.ise[t];
    out.graphs += c.graphs;
  }
  for (auto& x : out.ise) x /= static_cast<double>(curves.size());
  out.monotonicity_violations = count_increases(out.ise);
  return out;
}

// ---------------------------------------------------------------------------
// CSV export

inline void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& a, std::span<const std::size_t> ids,
                             std::span<const std::int64_t> vertex_ids = {}) {
  auto label = [&](std::size_t k) { return vertex_ids.empty() ? static_cast<std::int64_t>(k) : vertex_ids[k]; };
  const auto old = os.precision(17);
  os << "row_id";
  for (Eigen::Index c = 0; c < a.cols(); ++c) os << ",c" << c;
  os << '\n';
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    os << label(ids[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < a.cols(); ++c) os << ',' << a(r, c);
    os << '\n';
  }
  os.precision(old);
}

inline void write_curve_csv(std::ostream& os, const SparsityCurve& curve) {
  const auto old = os.precision(17);
  os << "t,ise\n";
  for (std::size_t t = 0; t < curve.ise.size(); ++t) os << t + 1 << ',' << curve.ise[t] << '\n';
  os.precision(old);
}

}  // namespace lgl
