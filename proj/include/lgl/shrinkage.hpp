#pragma once

// Noise estimation, empirical Bayes thresholding with a quasi-Cauchy prior,
// the end-to-end denoiser and the multi-trajectory (nondecimated) average.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "lgl/error.hpp"
#include "lgl/lifting.hpp"
#include "lgl/random.hpp"

namespace lgl {

enum class ThresholdRule { PosteriorMedian, Hard };

struct ShrinkageConfig {
  std::size_t keep_coarsest = 2;  // artificial levels passed through unchanged
  std::size_t levels = 0;         // 0: default_level_count(m)
  ThresholdRule rule = ThresholdRule::PosteriorMedian;
  bool normalize = true;          // divide each detail by its dual-wavelet norm first
  double sigma = 0.0;             // > 0: known noise level, skips the MAD estimate
};

namespace ebayes {

inline double dnorm(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
inline double pnorm(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// g(x)/phi(x) - 1 for the quasi-Cauchy marginal g.
inline double beta(double x) {
  const double h = 0.5 * x * x;
  if (h < 1e-8) return -0.5 + h / 6.0;
  return std::expm1(h) / (x * x) - 1.0;
}

/// Weight whose posterior-median threshold equals t.
inline double weight_from_threshold(double t) {
  const double fx = dnorm(t);
  return 1.0 / (1.0 + (pnorm(t) - t * fx - 0.5) / (std::sqrt(std::numbers::pi / 2.0) * fx * t * t));
}

/// Marginal maximum likelihood weight over [w_lo, 1], w_lo tied to the
/// universal threshold sqrt(2 log n).
inline double fit_weight(std::span<const double> x) {
  if (x.empty()) return 1.0;
  const double n = static_cast<double>(std::max<std::size_t>(x.size(), 2));
  double lo = weight_from_threshold(std::sqrt(2.0 * std::log(n)));
  double hi = 1.0;
  std::vector<double> b(x.size());
  std::transform(x.begin(), x.end(), b.begin(), beta);
  // Decreasing in w; an infinite beta contributes 1/w.
  auto score = [&](double w) {
    double s = 0.0;
    for (double bi : b) s += std::isinf(bi) ? 1.0 / w : bi / (1.0 + w * bi);
    return s;
  };
  if (score(hi) >= 0.0) return hi;
  if (score(lo) <= 0.0) return lo;
  for (int it = 0; it < 200 && hi / lo - 1.0 > 1e-14; ++it) {
    const double mid = std::sqrt(lo * hi);
    (score(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

// Zero of this in mu (on [0, z]) is the posterior median for observation z > 0.
inline double median_equation(double mu, double z, double w) {
  const double hh = z - mu;
  const double dn = dnorm(hh);
  const double left = pnorm(hh) - z * dn + (z * mu - 1.0) * dn * pnorm(-mu) / dnorm(mu);
  const double right2 = 1.0 + std::exp(-0.5 * z * z) * (z * z * (1.0 / w - 1.0) - 1.0);
  return right2 / 2.0 - left;
}

inline double bisect(auto&& f, double lo, double hi) {
  double flo = f(lo);
  const double fhi = f(hi);
  if ((flo > 0.0) == (fhi > 0.0)) return std::abs(flo) <= std::abs(fhi) ? lo : hi;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Posterior median of the coefficient given standardized observation x.
inline double posterior_median(double x, double w) {
  const double z = std::abs(x);
  double est;
  if (z >= 20.0) {
    est = z - 2.0 / z;
  } else if (z == 0.0) {
    est = 0.0;
  } else {
    est = bisect([&](double mu) { return median_equation(mu, z, w); }, 0.0, z);
  }
  if (est < 1e-7) return 0.0;
  return std::copysign(est, x);
}

/// Smallest |x| with a non-zero posterior median.
inline double threshold_from_weight(double w) {
  auto zero_at = [w](double z) {
    return pnorm(z) - z * dnorm(z) - 0.5 - z * z * std::exp(-0.5 * z * z) * (1.0 / w - 1.0) / 2.0;
  };
  return bisect(zero_at, 0.0, 20.0);
}

}  // namespace ebayes

/// MAD of `finest` scaled to a Gaussian standard deviation.
inline double estimate_sigma_mad(std::span<const double> finest) {
  if (finest.size() < 3) throw Error(ErrorCategory::Degenerate, "insufficient coefficients for noise estimate");
  auto median = [](std::vector<double> v) {
    const auto n = v.size();
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
    double hi = v[n / 2];
    if (n % 2) return hi;
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2)));
  };
  const double med = median({finest.begin(), finest.end()});
  std::vector<double> dev;
  dev.reserve(finest.size());
  for (double d : finest) dev.push_back(std::abs(d - med));
  const double sigma = median(std::move(dev)) / 0.6745;
  if (!(sigma > 0.0)) throw Error(ErrorCategory::Degenerate, "degenerate noise estimate: zero MAD");
  return sigma;
}

struct ThresholdResult {
  std::vector<double> shrunk;
  double weight = 1.0;
  double threshold = 0.0;  // in standardized units
  bool weight_fallback = false;
};

/// Empirical Bayes shrinkage of standardized coefficients `x` (unit noise).
/// Entries with `active[j] == false` pass through and do not enter the
/// weight fit.
inline ThresholdResult ebayes_threshold(std::span<const double> x, const std::vector<bool>& active,
                                        ThresholdRule rule = ThresholdRule::PosteriorMedian) {
  if (active.size() != x.size()) throw Error(ErrorCategory::InvalidInput, "mask length differs from coefficients");
  ThresholdResult out;
  out.shrunk.assign(x.begin(), x.end());
  std::vector<double> pool;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) throw Error(ErrorCategory::Numerical, "non-finite coefficient");
    if (active[j]) pool.push_back(x[j]);
  }
  out.weight = ebayes::fit_weight(pool);
  if (!std::isfinite(out.weight) || out.weight <= 0.0 || out.weight > 1.0) {
    out.weight = 0.5;
    out.weight_fallback = true;
  }
  out.threshold = ebayes::threshold_from_weight(out.weight);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!active[j]) continue;
    out.shrunk[j] = rule == ThresholdRule::PosteriorMedian ? ebayes::posterior_median(x[j], out.weight)
                                                           : (std::abs(x[j]) > out.threshold ? x[j] : 0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Denoising

struct DenoiseResult {
  std::vector<double> estimates;  // per line-graph vertex
  double sigma = 0.0;             // noise standard deviation estimate
  double weight = 1.0;            // fitted prior mixing weight
  double threshold = 0.0;
  bool weight_fallback = false;
  bool sigma_fallback = false;    // finest-level MAD was zero
  CoefficientSet coefficients;    // noisy coefficients, levels assigned
  std::vector<double> shrunk_details;
  std::vector<double> detail_norms;  // all 1 when normalization is off
};

/// Shrinks the details of an existing decomposition and inverts it.
inline DenoiseResult denoise_coefficients(CoefficientSet coeffs, const LiftingRecord& rec, const ShrinkageConfig& sc) {
  const auto n = coeffs.details.size();
  const auto levels = sc.levels ? sc.levels : default_level_count(rec.size);
  if (sc.keep_coarsest >= levels) throw Error(ErrorCategory::Config, "keep_coarsest must be below the level count");
  assign_artificial_levels(coeffs, levels);

  DenoiseResult out;
  out.detail_norms = sc.normalize ? detail_norms(rec) : std::vector<double>(n, 1.0);
  std::vector<double> z(n);
  for (std::size_t j = 0; j < n; ++j) z[j] = coeffs.details[j] / out.detail_norms[j];
  // Finest level, pooled with the next ones while it holds fewer than 3
  // details (small graphs).
  std::vector<double> finest;
  for (int lvl = 0; finest.size() < 3 && lvl < static_cast<int>(levels); ++lvl) {
    for (std::size_t j = 0; j < n; ++j) {
      if (coeffs.levels[j] == lvl) finest.push_back(z[j]);
    }
  }
  const auto cutoff = static_cast<int>(levels - sc.keep_coarsest);
  if (sc.sigma > 0.0) {
    out.sigma = sc.sigma;
  } else {
    try {
      out.sigma = estimate_sigma_mad(finest);
    } catch (const Error&) {
      if (finest.size() < 3) throw;
      // Zero MAD: no measurable noise. A negligible level leaves every
      // non-zero detail intact.
      out.sigma_fallback = true;
      double top = 0.0;
      for (double v : z) top = std::max(top, std::abs(v));
      out.sigma = 1e-12 * std::max(top, 1.0);
    }
  }
  std::vector<bool> active(n);
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    active[j] = coeffs.levels[j] < cutoff;
    x[j] = z[j] / out.sigma;
  }
  auto th = ebayes_threshold(x, active, sc.rule);
  out.weight = th.weight;
  out.threshold = th.threshold;
  out.weight_fallback = th.weight_fallback;

  auto shrunk = coeffs;
  for (std::size_t j = 0; j < n; ++j) {
    shrunk.details[j] = active[j] ? th.shrunk[j] * out.sigma * out.detail_norms[j] : coeffs.details[j];
  }
  out.shrunk_details = shrunk.details;
  out.estimates = inverse(shrunk, rec);
  out.coefficients = std::move(coeffs);
  return out;
}

inline DenoiseResult denoise(std::span<const double> values, const LineGraph& lg, const LiftingConfig& config,
                             const ShrinkageConfig& sc = {}) {
  auto [coeffs, rec] = forward(values, lg, config);
  return denoise_coefficients(std::move(coeffs), rec, sc);
}

struct NltResult {
  std::vector<double> estimates;  // mean over trajectories
  std::vector<DenoiseResult> runs;
};

inline NltResult nlt_denoise(std::span<const double> values, const LineGraph& lg, const LiftingConfig& config,
                             const ShrinkageConfig& sc, std::span<const std::vector<std::size_t>> trajectories) {
  if (trajectories.empty()) throw Error(ErrorCategory::Config, "need at least one trajectory");
  NltResult out;
  out.estimates.assign(values.size(), 0.0);
  for (const auto& traj : trajectories) {
    auto [coeffs, rec] = forward_with_trajectory(values, lg, config, traj);
    out.runs.push_back(denoise_coefficients(std::move(coeffs), rec, sc));
  }
  // Summed in trajectory-index order after all runs finish.
  for (const auto& r : out.runs) {
    for (std::size_t k = 0; k < values.size(); ++k) out.estimates[k] += r.estimates[k];
  }
  for (auto& x : out.estimates) x /= static_cast<double>(trajectories.size());
  return out;
}

/// Uniform random permutation of 0..m-1 for trajectory p.
inline std::vector<std::size_t> random_trajectory(std::size_t m, std::uint64_t seed, std::size_t p) {
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  auto rng = make_rng(seed, Stream::Trajectory, {p});
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

inline NltResult nlt_denoise(std::span<const double> values, const LineGraph& lg, const LiftingConfig& config,
                             const ShrinkageConfig& sc, std::size_t trajectories, std::uint64_t seed) {
  if (trajectories == 0) throw Error(ErrorCategory::Config, "need at least one trajectory");
  std::vector<std::vector<std::size_t>> list;
  for (std::size_t p = 0; p < trajectories; ++p) list.push_back(random_trajectory(lg.size(), seed, p));
  return nlt_denoise(values, lg, config, sc, list);
}

}  // namespace lgl
