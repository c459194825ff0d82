#pragma once

// Monte Carlo drivers: the denoising grid over graphs x noise replications,
// the river-flow study, and condition-number / sparsity summaries over
// sampled networks. All randomness is derived from one master seed with
// indices, so results do not depend on thread scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lgl/analysis.hpp"
#include "lgl/error.hpp"
#include "lgl/lifting.hpp"
#include "lgl/random.hpp"
#include "lgl/shrinkage.hpp"
#include "lgl/simulation.hpp"

namespace lgl {

/// Runs body(i) for i in [0, n) on up to `threads` workers. The first
/// exception thrown by any worker is rethrown.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(guard);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::string embedding_name(Embedding e) { return e == Embedding::Pointwise ? "pointwise" : "edge-average"; }

inline Embedding parse_embedding(std::string_view name) {
  if (name == "pointwise") return Embedding::Pointwise;
  if (name == "edge-average") return Embedding::EdgeAverage;
  throw Error(ErrorCategory::Config, "unknown embedding '" + std::string(name) + "'; expected pointwise or edge-average");
}

// ---------------------------------------------------------------------------
// Denoising grid

struct ExperimentConfig {
  std::size_t vertices = 100;      // n; each graph has n - 1 edges
  std::size_t graphs = 50;         // Q
  std::size_t replications = 100;  // R
  std::vector<double> snrs{3.0, 5.0, 7.0};
  std::vector<std::string> fields{"g1", "mfc", "blocks", "doppler", "bumps", "heavisine"};
  std::vector<std::string> variants{"LG-Aid-c"};
  Embedding embedding = Embedding::Pointwise;
  std::size_t samples = 100;       // edge-average sample count
  ShrinkageConfig shrinkage;
  std::size_t trajectories = 0;    // 0: single decomposition; else NLT with this many
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const {
    if (vertices < 4) throw Error(ErrorCategory::Config, "experiment needs at least 4 vertices");
    if (graphs == 0 || replications == 0) throw Error(ErrorCategory::Config, "graphs and replications must be >= 1");
    if (snrs.empty() || fields.empty() || variants.empty()) throw Error(ErrorCategory::Config, "empty experiment grid");
    for (double s : snrs) {
      if (!(s > 0.0)) throw Error(ErrorCategory::Config, "SNR must be positive");
    }
    for (const auto& v : variants) parse_variant(v);
    for (const auto& f : fields) field_by_name(f);
  }
};

struct ExperimentCell {
  std::string variant;
  std::string field;
  double snr = 0.0;
  MetricsReport metrics;
  std::vector<double> replication_amse;  // per r, averaged over graphs and vertices
  double decomposition_gap = 0.0;        // |AMSE - Var - Bias^2|
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ExperimentCell> cells;  // variant-major, then field, then SNR

  const ExperimentCell& cell(std::string_view variant, std::string_view field, double snr) const {
    for (const auto& c : cells) {
      if (c.variant == variant && c.field == field && c.snr == snr) return c;
    }
    throw Error(ErrorCategory::InvalidInput, "no such experiment cell");
  }
};

/// Denoises one noisy vector under the experiment's settings.
inline std::vector<double> experiment_estimate(std::span<const double> noisy, const LineGraph& lg,
                                               const LiftingConfig& cfg, const ExperimentConfig& ec,
                                               std::uint64_t trajectory_seed) {
  if (ec.trajectories == 0) return denoise(noisy, lg, cfg, ec.shrinkage).estimates;
  return nlt_denoise(noisy, lg, cfg, ec.shrinkage, ec.trajectories, trajectory_seed).estimates;
}

/// Graph q uses stream (Graph, q). Replication r on graph q draws unit noise
/// from (Noise, q, r), shared across variants, fields and SNRs; tie-breaks
/// come from (TieBreak, q, r) and NLT trajectories from (Trajectory, q, r).
inline ExperimentReport run_experiment(const ExperimentConfig& ec) {
  ec.validate();
  const auto Q = ec.graphs, R = ec.replications;
  std::vector<Graph> graphs(Q);
  std::vector<LineGraph> lgs(Q);
  parallel_for(Q, ec.threads, [&](std::size_t q) {
    graphs[q] = sample_network(ec.vertices, derive_seed(ec.seed, Stream::Graph, {q}));
    lgs[q] = build_line_graph(graphs[q]);
  });

  ExperimentReport report;
  report.config = ec;
  for (const auto& variant : ec.variants) {
    const auto base = parse_variant(variant);
    for (const auto& fname : ec.fields) {
      const auto field = field_by_name(fname);
      std::vector<std::vector<double>> truths(Q);
      for (std::size_t q = 0; q < Q; ++q) {
        truths[q] = normalize_unit_variance(embed(field, graphs[q], ec.embedding, ec.samples));
      }
      for (double snr : ec.snrs) {
        const double sigma = 1.0 / snr;
        ResultGrid grid;
        grid.truths = truths;
        grid.estimates.assign(Q, std::vector<std::vector<double>>(R));
        parallel_for(Q * R, ec.threads, [&](std::size_t cell) {
          const auto q = cell / R, r = cell % R;
          auto cfg = base;
          cfg.seed = derive_seed(ec.seed, Stream::TieBreak, {q, r});
          const auto noisy = add_gaussian_noise(truths[q], sigma, derive_seed(ec.seed, Stream::Noise, {q, r}));
          grid.estimates[q][r] =
              experiment_estimate(noisy, lgs[q], cfg, ec, derive_seed(ec.seed, Stream::Trajectory, {q, r}));
        });

        ExperimentCell out;
        out.variant = variant;
        out.field = fname;
        out.snr = snr;
        out.metrics = compute_metrics(grid);
        out.decomposition_gap = std::abs(out.metrics.amse - out.metrics.variance - out.metrics.bias2);
        out.replication_amse.assign(R, 0.0);
        double cells = 0.0;
        for (std::size_t q = 0; q < Q; ++q) {
          cells += static_cast<double>(truths[q].size());
          for (std::size_t r = 0; r < R; ++r) {
            for (std::size_t k = 0; k < truths[q].size(); ++k) {
              const double e = grid.estimates[q][r][k] - truths[q][k];
              out.replication_amse[r] += e * e;
            }
          }
        }
        for (auto& a : out.replication_amse) a /= cells;
        report.cells.push_back(std::move(out));
      }
    }
  }
  return report;
}

/// Wide layout for one SNR and metric: a row per variant, a column per field,
/// entries "value (sd)". The sd column is only filled for AMSE.
inline void write_experiment_table(std::ostream& os, const ExperimentReport& rep, double snr,
                                   std::string_view metric = "amse") {
  const auto old = os.precision(4);
  os << "variant";
  for (const auto& f : rep.config.fields) os << ',' << f;
  os << '\n';
  for (const auto& v : rep.config.variants) {
    os << v;
    for (const auto& f : rep.config.fields) {
      const auto& c = rep.cell(v, f, snr);
      std::ostringstream entry;
      entry.precision(4);
      if (metric == "amse") {
        entry << c.metrics.amse << " (" << c.metrics.mse_sd << ")";
      } else if (metric == "variance") {
        entry << c.metrics.variance;
      } else if (metric == "bias2") {
        entry << c.metrics.bias2;
      } else {
        throw Error(ErrorCategory::Config, "unknown metric '" + std::string(metric) + "'");
      }
      os << ",\"" << entry.str() << '"';
    }
    os << '\n';
  }
  os.precision(old);
}

/// Plot-ready long format.
inline void write_experiment_long(std::ostream& os, const ExperimentReport& rep) {
  const auto old = os.precision(17);
  os << "variant,field,snr,embedding,metric,value\n";
  const auto emb = embedding_name(rep.config.embedding);
  for (const auto& c : rep.cells) {
    const std::pair<const char*, double> rows[] = {
        {"amse", c.metrics.amse}, {"variance", c.metrics.variance}, {"bias2", c.metrics.bias2}, {"mse_sd", c.metrics.mse_sd}};
    for (const auto& [name, value] : rows) {
      os << c.variant << ',' << c.field << ',' << c.snr << ',' << emb << ',' << name << ',' << value << '\n';
    }
  }
  os.precision(old);
}

// ---------------------------------------------------------------------------
// River-flow study

struct FlowStudyConfig {
  std::uint64_t fixture_seed = 2024;
  FlowFixtureOptions fixture;
  std::vector<double> sigmas{1.0, 1.5, 2.0};
  std::size_t replications = 50;
  std::size_t trajectories = 30;
  std::vector<std::string> variants{"LG-Sid-p", "LG-Aid-p"};
  ShrinkageConfig shrinkage;
  std::uint64_t seed = 0;  // noise, tie-break and trajectory streams
  std::size_t threads = 1;
};

struct FlowStudyRow {
  std::string variant;
  double sigma = 0.0;
  MetricsReport single;
  MetricsReport nlt;

  /// Relative AMSE reduction of the trajectory average.
  double improvement() const { return 1.0 - nlt.amse / single.amse; }
};

/// Noisy copies of the raw fixture (no normalization) denoised by one
/// decomposition and by the NLT average. Replication r uses noise (Noise, r),
/// shared across variants and noise levels.
inline std::vector<FlowStudyRow> run_flow_study(const FlowStudyConfig& fc, const Graph& graph,
                                                std::span<const double> truth) {
  if (fc.replications == 0 || fc.trajectories == 0) throw Error(ErrorCategory::Config, "replications and trajectories must be >= 1");
  const auto lg = build_line_graph(graph);
  std::vector<FlowStudyRow> rows;
  for (const auto& variant : fc.variants) {
    const auto base = parse_variant(variant);
    for (double sigma : fc.sigmas) {
      if (!(sigma > 0.0)) throw Error(ErrorCategory::Config, "noise level must be positive");
      ResultGrid single, nlt;
      single.truths = nlt.truths = {std::vector<double>(truth.begin(), truth.end())};
      single.estimates.assign(1, std::vector<std::vector<double>>(fc.replications));
      nlt.estimates = single.estimates;
      parallel_for(fc.replications, fc.threads, [&](std::size_t r) {
        auto cfg = base;
        cfg.seed = derive_seed(fc.seed, Stream::TieBreak, {r});
        const auto noisy = add_gaussian_noise(truth, sigma, derive_seed(fc.seed, Stream::Noise, {r}));
        single.estimates[0][r] = denoise(noisy, lg, cfg, fc.shrinkage).estimates;
        nlt.estimates[0][r] =
            nlt_denoise(noisy, lg, cfg, fc.shrinkage, fc.trajectories, derive_seed(fc.seed, Stream::Trajectory, {r})).estimates;
      });
      rows.push_back({variant, sigma, compute_metrics(single), compute_metrics(nlt)});
    }
  }
  return rows;
}

inline std::vector<FlowStudyRow> run_flow_study(const FlowStudyConfig& fc) {
  const auto fx = generate_flow_fixture(fc.fixture_seed, fc.fixture);
  return run_flow_study(fc, fx.graph, fx.values);
}

inline void write_flow_table(std::ostream& os, std::span<const FlowStudyRow> rows, std::size_t trajectories) {
  const auto old = os.precision(17);
  os << "method,sigma,amse,variance,bias2,mse_sd\n";
  for (const auto& r : rows) {
    for (int pass = 0; pass < 2; ++pass) {
      const auto& m = pass == 0 ? r.single : r.nlt;
      os << r.variant << (pass == 0 ? "" : "-nlt(" + std::to_string(trajectories) + ")") << ',' << r.sigma << ','
         << m.amse << ',' << m.variance << ',' << m.bias2 << ',' << m.mse_sd << '\n';
    }
  }
  os.precision(old);
}

// ---------------------------------------------------------------------------
// Condition numbers and sparsity over sampled networks

/// Linear-interpolation quantile of a sorted sample.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCategory::InvalidInput, "quantile of an empty sample");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct ConditionSummary {
  std::string variant;
  std::vector<double> kappas;  // per graph, in graph order
  double max = 0.0, q75 = 0.0, median = 0.0, q25 = 0.0, min = 0.0;
};

/// Graph q is sample_network(vertices, (Graph, q)) and shares nothing with
/// the variant, so all variants see the same networks.
inline ConditionSummary condition_study(std::string_view variant, std::size_t graphs, std::size_t vertices,
                                        std::uint64_t seed, std::size_t threads = 1) {
  if (graphs == 0) throw Error(ErrorCategory::Config, "graphs must be >= 1");
  auto cfg = parse_variant(variant);
  ConditionSummary s;
  s.variant = std::string(variant);
  s.kappas.assign(graphs, 0.0);
  parallel_for(graphs, threads, [&](std::size_t q) {
    auto c = cfg;
    c.seed = derive_seed(seed, Stream::TieBreak, {q});
    const auto lg = build_line_graph(sample_network(vertices, derive_seed(seed, Stream::Graph, {q})));
    s.kappas[q] = condition_number(build_matrices(lg, c));
  });
  auto sorted = s.kappas;
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.q25 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q75 = quantile_sorted(sorted, 0.75);
  s.max = sorted.back();
  return s;
}

inline void write_condition_table(std::ostream& os, std::span<const ConditionSummary> rows) {
  const auto old = os.precision(6);
  os << "variant,max,q75,median,q25,min\n";
  for (const auto& r : rows) {
    os << r.variant << ',' << r.max << ',' << r.q75 << ',' << r.median << ',' << r.q25 << ',' << r.min << '\n';
  }
  os.precision(old);
}

/// Mean ISE curve of a noiseless field over sampled networks.
inline SparsityCurve sparsity_study(std::string_view field_name, std::string_view variant, std::size_t graphs,
                                    std::size_t vertices, std::uint64_t seed, Embedding embedding = Embedding::Pointwise,
                                    std::size_t samples = 100) {
  if (graphs == 0) throw Error(ErrorCategory::Config, "graphs must be >= 1");
  const auto field = field_by_name(field_name);
  auto cfg = parse_variant(variant);
  std::vector<SparsityCurve> curves;
  for (std::size_t q = 0; q < graphs; ++q) {
    const auto g = sample_network(vertices, derive_seed(seed, Stream::Graph, {q}));
    cfg.seed = derive_seed(seed, Stream::TieBreak, {q});
    curves.push_back(sparsity_curve(normalize_unit_variance(embed(field, g, embedding, samples)), build_line_graph(g), cfg));
  }
  return average_curves(curves);
}

}  // namespace lgl
