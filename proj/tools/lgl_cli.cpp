// lgl: command-line front end for line-graph lifting.
//
// Every command writes its outputs plus a JSON manifest holding the resolved
// options; `argv` in the manifest repeats the run exactly. Failures print one
// JSON object on stderr and exit with a code per error category.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lgl/lgl.hpp"

namespace {

using namespace lgl;

constexpr int kExitInternal = 1;

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::InvalidInput: return 2;
    case ErrorCategory::Config: return 3;
    case ErrorCategory::Degenerate: return 4;
    case ErrorCategory::Numerical: return 5;
  }
  return kExitInternal;
}

int report_error(std::string_view category, const std::string& message, int code) {
  nlohmann::json j = {{"error", {{"category", category}, {"message", message}, {"exit_code", code}}}};
  std::cerr << j.dump() << '\n';
  return code;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> split_numbers(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    auto v = detail::to_double(item);
    if (!v) throw Error(ErrorCategory::Config, "expected a comma-separated list of numbers, got '" + s + "'");
    out.push_back(*v);
  }
  return out;
}

/// Output stream for a path; "-" is stdout.
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path != "-") {
      if (auto dir = std::filesystem::path(path).parent_path(); !dir.empty()) std::filesystem::create_directories(dir);
      file_.open(path);
      if (!file_) throw Error(ErrorCategory::InvalidInput, "cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return path_ == "-" ? std::cout : file_; }

 private:
  std::string path_;
  std::ofstream file_;
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::InvalidInput, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::InvalidInput, path + ": " + e.what());
  }
}

std::vector<std::int64_t> vertex_ids(const LineGraph& lg) {
  std::vector<std::int64_t> ids;
  for (const auto& v : lg.vertices()) ids.push_back(v.id);
  return ids;
}

std::vector<double> require_values(const Network& net, const std::string& path) {
  if (!net.values) throw Error(ErrorCategory::InvalidInput, path + ": every edge or station needs a value");
  return *net.values;
}

// ---------------------------------------------------------------------------
// Shared option groups

struct TransformOptions {
  std::string variant = "LG-Aid-c";
  std::size_t stopping_time = 2;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--variant", variant, "Transform variant, e.g. LG-Aid-c");
    app->add_option("--stopping-time", stopping_time, "Scaling coefficients left at the end (tau)");
    add_seed(app, seed);
  }

  static void add_seed(CLI::App* app, std::uint64_t& seed) {
    app->add_option("--seed", seed, "Master seed (default from LGL_SEED)")->envname("LGL_SEED");
  }

  LiftingConfig config() const {
    auto cfg = parse_variant(variant);
    cfg.stopping_time = stopping_time;
    cfg.seed = seed;
    return cfg;
  }
};

struct ShrinkageOptions {
  std::size_t levels = 0;
  std::size_t keep_coarsest = 2;
  std::string rule = "median";
  bool no_normalize = false;
  double noise_sd = 0.0;

  void add(CLI::App* app) {
    app->add_option("--levels", levels, "Artificial levels (0: max(3, floor(log2 m)))");
    app->add_option("--keep-coarsest", keep_coarsest, "Coarsest levels left unthresholded");
    app->add_option("--rule", rule, "Thresholding rule")->check(CLI::IsMember({"median", "hard"}));
    app->add_flag("--no-normalize", no_normalize, "Threshold raw details instead of norm-scaled ones");
    app->add_option("--noise-sd", noise_sd, "Known noise standard deviation (0: estimate by MAD)");
  }

  ShrinkageConfig config() const {
    ShrinkageConfig sc;
    sc.levels = levels;
    sc.keep_coarsest = keep_coarsest;
    sc.rule = rule == "hard" ? ThresholdRule::Hard : ThresholdRule::PosteriorMedian;
    sc.normalize = !no_normalize;
    sc.sigma = noise_sd;
    return sc;
  }
};

/// Files touched by a command, recorded in its manifest.
struct RunFiles {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

struct Command {
  CLI::App* app = nullptr;
  std::function<RunFiles()> run;
  std::string manifest = {};
};

/// Every option of `app` with its resolved value, and an argv that repeats
/// the run.
RunManifest build_manifest(CLI::App* app, const RunFiles& files) {
  RunManifest m;
  m.command = app->get_name();
  m.argv.push_back(m.command);
  for (const auto* opt : app->get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names.front() == "help" || names.front() == "manifest") continue;
    const auto name = names.front();
    if (opt->get_type_size() == 0) {
      const bool on = opt->count() > 0;
      m.options[name] = on ? "true" : "false";
      if (on) m.argv.push_back("--" + name);
      continue;
    }
    const auto value = opt->count() > 0 ? opt->results().back() : opt->get_default_str();
    m.options[name] = value;
    if (value.empty()) continue;
    m.argv.push_back("--" + name);
    m.argv.push_back(value);
  }
  m.inputs = files.inputs;
  m.outputs = files.outputs;
  return m;
}

// ---------------------------------------------------------------------------
// Commands

Command cmd_linegraph(CLI::App& root) {
  auto* app = root.add_subcommand("linegraph", "Write the line graph of a network in station mode");
  static std::string graph, out = "-";
  app->add_option("--graph", graph, "Input graph file")->required();
  app->add_option("--out", out, "Output station-mode file ('-' for stdout)");
  return {app, [] {
            auto file = parse_graph_file(graph);
            auto net = to_network(file);
            std::vector<std::optional<double>> values(net.line_graph.size());
            if (net.values) {
              for (std::size_t k = 0; k < values.size(); ++k) values[k] = (*net.values)[k];
            }
            Output o(out);
            o.stream() << "# line graph of " << graph << ": " << net.line_graph.size() << " vertices, "
                       << net.line_graph.edges().size() << " edges\n";
            write_stations(o.stream(), net.line_graph, values);
            return RunFiles{{graph}, {out}};
          }};
}

Command cmd_forward(CLI::App& root) {
  auto* app = root.add_subcommand("forward", "Decompose the values of a network");
  static std::string graph, record, out = "-";
  static std::size_t levels = 0;
  static TransformOptions t;
  app->add_option("--graph", graph, "Input graph file with values")->required();
  app->add_option("--record", record, "Output transform record (JSON)")->required();
  app->add_option("--out", out, "Output coefficient table (CSV)");
  app->add_option("--levels", levels, "Assign this many artificial levels (0: default)");
  t.add(app);
  return {app, [] {
            auto net = to_network(parse_graph_file(graph));
            auto values = require_values(net, graph);
            auto [coeffs, rec] = forward(values, net.line_graph, t.config());
            assign_artificial_levels(coeffs, levels ? levels : default_level_count(rec.size));
            {
              Output r(record);
              r.stream() << record_to_json(rec, net.line_graph).dump(1) << '\n';
            }
            Output o(out);
            write_coefficients_csv(o.stream(), coeffs, vertex_ids(net.line_graph));
            return RunFiles{{graph}, {record, out}};
          }};
}

Command cmd_inverse(CLI::App& root) {
  auto* app = root.add_subcommand("inverse", "Reconstruct values from a record and coefficients");
  static std::string record, coefficients, out = "-", verify;
  static double tolerance = 1e-8;
  app->add_option("--record", record, "Transform record (JSON)")->required();
  app->add_option("--coefficients", coefficients, "Coefficient table (CSV)")->required();
  app->add_option("--out", out, "Output values (CSV)");
  app->add_option("--verify", verify, "Graph file whose values the reconstruction must match");
  app->add_option("--tolerance", tolerance, "Relative max-norm tolerance for --verify");
  return {app, [] {
            auto loaded = record_from_json(read_json(record));
            std::ifstream in(coefficients);
            if (!in) throw Error(ErrorCategory::InvalidInput, "cannot open '" + coefficients + "'");
            auto coeffs = read_coefficients_csv(in, loaded.vertex_ids, coefficients);
            auto values = inverse(coeffs, loaded.record);
            {
              Output o(out);
              write_values_csv(o.stream(), values, loaded.vertex_ids);
            }
            RunFiles files{{record, coefficients}, {out}};
            if (!verify.empty()) {
              auto net = to_network(parse_graph_file(verify));
              auto expect = require_values(net, verify);
              if (expect.size() != values.size()) throw Error(ErrorCategory::InvalidInput, "verify: size mismatch");
              double err = 0.0, scale = 0.0;
              for (std::size_t k = 0; k < values.size(); ++k) {
                err = std::max(err, std::abs(values[k] - expect[k]));
                scale = std::max(scale, std::abs(expect[k]));
              }
              const double rel = scale > 0.0 ? err / scale : err;
              std::cerr << "verify: relative max error " << format_number(rel) << '\n';
              if (!(rel <= tolerance)) throw Error(ErrorCategory::Numerical, "reconstruction differs from " + verify);
              files.inputs.push_back(verify);
            }
            return files;
          }};
}

Command cmd_denoise(CLI::App& root) {
  auto* app = root.add_subcommand("denoise", "Denoise the values of a network");
  static std::string graph, out = "-";
  static TransformOptions t;
  static ShrinkageOptions s;
  app->add_option("--graph", graph, "Input graph file with noisy values")->required();
  app->add_option("--out", out, "Output table (CSV with diagnostics)");
  t.add(app);
  s.add(app);
  return {app, [] {
            auto net = to_network(parse_graph_file(graph));
            auto values = require_values(net, graph);
            auto res = denoise(values, net.line_graph, t.config(), s.config());
            Output o(out);
            write_denoise_csv(o.stream(), res, values, vertex_ids(net.line_graph), s.keep_coarsest);
            return RunFiles{{graph}, {out}};
          }};
}

Command cmd_nlt(CLI::App& root) {
  auto* app = root.add_subcommand(
      "nlt", "Average denoised estimates over random removal orders; with --sigma, compare against one decomposition");
  static std::string graph, out = "-";
  static std::size_t trajectories = 30, replications = 50, threads = 1;
  static double sigma = 0.0;
  static TransformOptions t;
  static ShrinkageOptions s;
  app->add_option("--graph", graph, "Input graph file with values")->required();
  app->add_option("--out", out, "Output table (CSV)");
  app->add_option("--trajectories", trajectories, "Number of random removal orders");
  app->add_option("--sigma", sigma, "Study mode: treat values as truth and add N(0, sigma^2) noise");
  app->add_option("--replications", replications, "Noise replications in study mode");
  app->add_option("--threads", threads, "Worker threads (results do not depend on this)");
  t.add(app);
  s.add(app);
  return {app, [] {
            auto file = parse_graph_file(graph);
            auto net = to_network(file);
            auto values = require_values(net, graph);
            Output o(out);
            if (sigma > 0.0) {
              FlowStudyConfig fc;
              fc.sigmas = {sigma};
              fc.replications = replications;
              fc.trajectories = trajectories;
              fc.variants = {t.variant};
              fc.shrinkage = s.config();
              fc.seed = t.seed;
              fc.threads = threads;
              // The study builds its own line graph, so station files need the
              // same handling as edge files.
              if (file.mode != GraphFileMode::Edges) throw Error(ErrorCategory::Config, "study mode needs an edge-mode graph file");
              auto rows = run_flow_study(fc, file.graph, values);
              write_flow_table(o.stream(), rows, trajectories);
              for (const auto& r : rows) {
                std::cerr << r.variant << " sigma=" << r.sigma << " single=" << r.single.amse << " nlt(" << trajectories
                          << ")=" << r.nlt.amse << " improvement=" << 100.0 * r.improvement() << "%\n";
              }
            } else {
              auto res = nlt_denoise(values, net.line_graph, t.config(), s.config(), trajectories, t.seed);
              auto& os = o.stream();
              os << "vertex_id,noisy,estimate,residual\n";
              const auto ids = vertex_ids(net.line_graph);
              for (std::size_t k = 0; k < values.size(); ++k) {
                os << ids[k] << ',' << format_number(values[k]) << ',' << format_number(res.estimates[k]) << ','
                   << format_number(values[k] - res.estimates[k]) << '\n';
              }
            }
            return RunFiles{{graph}, {out}};
          }};
}

Command cmd_condnum(CLI::App& root) {
  auto* app = root.add_subcommand("condnum", "Condition numbers over sampled networks");
  static std::string variants = "", out = "-";
  static std::size_t graphs = 50, vertices = 100, threads = 1;
  static std::uint64_t seed = 0;
  app->add_option("--variant", variants, "Comma-separated variants (default: all 12)");
  app->add_option("--graphs", graphs, "Number of sampled networks");
  app->add_option("--vertices", vertices, "Vertices per network");
  app->add_option("--threads", threads, "Worker threads");
  app->add_option("--out", out, "Output table (CSV)");
  TransformOptions::add_seed(app, seed);
  return {app, [] {
            auto names = variants.empty() ? all_variant_names() : split_list(variants);
            std::vector<ConditionSummary> rows;
            for (const auto& v : names) rows.push_back(condition_study(v, graphs, vertices, seed, threads));
            Output o(out);
            write_condition_table(o.stream(), rows);
            return RunFiles{{}, {out}};
          }};
}

Command cmd_sparsity(CLI::App& root) {
  auto* app = root.add_subcommand("sparsity", "Mean reconstruction error against retained details");
  static std::string field = "blocks", variant = "LG-Aid-c", embedding = "pointwise", out = "-";
  static std::size_t graphs = 50, vertices = 100, samples = 100;
  static std::uint64_t seed = 0;
  app->add_option("--field", field, "Test field");
  app->add_option("--variant", variant, "Transform variant");
  app->add_option("--embedding", embedding, "pointwise or edge-average");
  app->add_option("--samples", samples, "Samples per edge for edge-average");
  app->add_option("--graphs", graphs, "Number of sampled networks");
  app->add_option("--vertices", vertices, "Vertices per network");
  app->add_option("--out", out, "Output curve (CSV)");
  TransformOptions::add_seed(app, seed);
  return {app, [] {
            auto curve = sparsity_study(field, variant, graphs, vertices, seed, parse_embedding(embedding), samples);
            Output o(out);
            write_curve_csv(o.stream(), curve);
            if (curve.monotonicity_violations) {
              std::cerr << "note: curve increases at " << curve.monotonicity_violations << " points\n";
            }
            return RunFiles{{}, {out}};
          }};
}

Command cmd_simulate(CLI::App& root) {
  auto* app = root.add_subcommand("simulate", "Denoising study over sampled networks and noise replications");
  static std::string fields = "g1,mfc,blocks,doppler,bumps,heavisine", variants = "LG-Aid-c", snrs = "3,5,7",
                     embedding = "pointwise", out_dir = "simulation";
  static ExperimentConfig ec;
  static ShrinkageOptions s;
  app->add_option("--fields", fields, "Comma-separated test fields");
  app->add_option("--variants", variants, "Comma-separated variants");
  app->add_option("--snr", snrs, "Comma-separated signal-to-noise ratios");
  app->add_option("--embedding", embedding, "pointwise or edge-average");
  app->add_option("--samples", ec.samples, "Samples per edge for edge-average");
  app->add_option("--vertices", ec.vertices, "Vertices per network");
  app->add_option("--graphs", ec.graphs, "Number of sampled networks (Q)");
  app->add_option("--replications", ec.replications, "Noise replications per network (R)");
  app->add_option("--trajectories", ec.trajectories, "NLT trajectories (0: single decomposition)");
  app->add_option("--threads", ec.threads, "Worker threads (results do not depend on this)");
  app->add_option("--out-dir", out_dir, "Directory for the result tables");
  TransformOptions::add_seed(app, ec.seed);
  s.add(app);
  return {app, [] {
            ec.fields = split_list(fields);
            ec.variants = split_list(variants);
            ec.snrs = split_numbers(snrs);
            ec.embedding = parse_embedding(embedding);
            ec.shrinkage = s.config();
            auto rep = run_experiment(ec);
            RunFiles files;
            for (double snr : ec.snrs) {
              for (const char* metric : {"amse", "variance", "bias2"}) {
                const auto path = out_dir + "/" + metric + "_snr" + format_number(snr) + ".csv";
                Output o(path);
                write_experiment_table(o.stream(), rep, snr, metric);
                files.outputs.push_back(path);
              }
            }
            const auto path = out_dir + "/long.csv";
            Output o(path);
            write_experiment_long(o.stream(), rep);
            files.outputs.push_back(path);
            return files;
          }};
}

Command cmd_flowsim(CLI::App& root) {
  auto* app = root.add_subcommand("flowsim", "Generate a synthetic river-flow network");
  static std::string out = "-", draw = "stream";
  static std::uint64_t seed = 0;
  static double sigma = 0.0;
  app->add_option("--out", out, "Output graph file");
  app->add_option("--draw", draw, "Redraw values per stream or per edge")->check(CLI::IsMember({"stream", "edge"}));
  app->add_option("--sigma", sigma, "Add N(0, sigma^2) noise to the written values");
  TransformOptions::add_seed(app, seed);
  return {app, [] {
            FlowFixtureOptions opt;
            opt.draw = draw == "edge" ? FlowDraw::PerEdge : FlowDraw::PerStream;
            auto fx = generate_flow_fixture(seed, opt);
            if (sigma > 0.0) fx.graph.set_values(add_gaussian_noise(fx.values, sigma, seed));
            Output o(out);
            o.stream() << "# flow fixture seed=" << seed << " clusters=" << opt.clusters << '\n';
            write_graph(o.stream(), fx.graph);
            return RunFiles{{}, {out}};
          }};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App root{"Wavelet lifting for signals observed on the edges of a network"};
  root.option_defaults()->always_capture_default();
  root.require_subcommand(1);
  root.set_version_flag("--version", "1.0.0");

  std::vector<Command> commands;
  for (auto make : {cmd_linegraph, cmd_forward, cmd_inverse, cmd_denoise, cmd_nlt, cmd_condnum, cmd_sparsity, cmd_simulate,
                    cmd_flowsim}) {
    commands.push_back(make(root));
    auto& c = commands.back();
    c.app->add_option("--manifest", c.manifest, "Manifest path (default: <first file output>.manifest.json)");
  }

  try {
    root.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return root.exit(e);
    return report_error("config", e.what(), exit_code(ErrorCategory::Config));
  }

  for (auto& c : commands) {
    if (!c.app->parsed()) continue;
    try {
      const auto files = c.run();
      auto path = c.manifest;
      if (path.empty()) {
        for (const auto& f : files.outputs) {
          if (f != "-") {
            path = f + ".manifest.json";
            break;
          }
        }
      }
      if (!path.empty()) {
        Output o(path);
        o.stream() << build_manifest(c.app, files).to_json().dump(2) << '\n';
      }
      return 0;
    } catch (const Error& e) {
      return report_error(category_name(e.category()), e.what(), exit_code(e.category()));
    } catch (const std::filesystem::filesystem_error& e) {
      return report_error("invalid_input", e.what(), exit_code(ErrorCategory::InvalidInput));
    } catch (const std::exception& e) {
      return report_error("internal", e.what(), kExitInternal);
    }
  }
  return 0;
}
