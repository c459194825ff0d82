#pragma once

// Text formats: graph files (edge mode and station mode), transform records
// as JSON, coefficient and result tables as CSV, and run manifests.
//
// Numbers are written with 17 significant digits so that every double
// survives a write/read cycle bit for bit.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "lgl/error.hpp"
#include "lgl/graph.hpp"
#include "lgl/lifting.hpp"
#include "lgl/shrinkage.hpp"

namespace lgl {

inline std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

[[noreturn]] inline void fail_at(std::string_view source, std::size_t line, const std::string& what) {
  throw Error(ErrorCategory::InvalidInput, std::string(source) + ":" + std::to_string(line) + ": " + what);
}

inline std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> to_int(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Graph files

enum class GraphFileMode { Edges, Stations };

/// Parsed graph document. Edge mode fills `graph`; station mode fills
/// `stations` (line-graph vertices declared directly) and `station_values`.
struct GraphFile {
  GraphFileMode mode = GraphFileMode::Edges;
  Graph graph;
  LineGraph stations;
  std::vector<std::optional<double>> station_values;
};

/// Line graph plus observations, whichever mode the file used.
struct Network {
  LineGraph line_graph;
  std::optional<std::vector<double>> values;  // set when every vertex carries one
};

inline GraphFile parse_graph(std::istream& in, std::string_view source = "<input>") {
  struct VertexRow { std::size_t line; std::int64_t id; std::optional<Point> pos; };
  struct EdgeRow { std::size_t line; std::int64_t id, u, v; std::optional<double> length, value; };
  struct StationRow { std::size_t line; std::int64_t id; Point pos; std::optional<double> value; };
  struct LinkRow { std::size_t line; std::int64_t a, b; std::optional<double> length; };

  std::optional<GraphFileMode> mode;
  std::vector<VertexRow> vertices;
  std::vector<EdgeRow> edges;
  std::vector<StationRow> stations;
  std::vector<LinkRow> links;

  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    const auto kw = tok[0];

    auto need_int = [&](std::string_view s, const char* what) {
      auto v = detail::to_int(s);
      if (!v) detail::fail_at(source, lineno, std::string("expected integer ") + what + ", got '" + std::string(s) + "'");
      return *v;
    };
    auto need_num = [&](std::string_view s, const char* what) {
      auto v = detail::to_double(s);
      if (!v) detail::fail_at(source, lineno, std::string("expected finite number ") + what + ", got '" + std::string(s) + "'");
      return *v;
    };
    // key=value tokens after the positional ones.
    auto options = [&](std::size_t from, std::initializer_list<std::string_view> allowed) {
      std::map<std::string, double, std::less<>> out;
      for (std::size_t i = from; i < tok.size(); ++i) {
        const auto eq = tok[i].find('=');
        if (eq == std::string_view::npos) detail::fail_at(source, lineno, "unexpected field '" + std::string(tok[i]) + "'");
        const auto key = tok[i].substr(0, eq);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
          detail::fail_at(source, lineno, "unknown attribute '" + std::string(key) + "'");
        }
        if (out.contains(key)) detail::fail_at(source, lineno, "attribute '" + std::string(key) + "' given twice");
        out.emplace(std::string(key), need_num(tok[i].substr(eq + 1), "attribute value"));
      }
      return out;
    };
    auto opt = [](const auto& m, std::string_view k) -> std::optional<double> {
      auto it = m.find(k);
      if (it == m.end()) return std::nullopt;
      return it->second;
    };

    if (kw == "mode") {
      if (mode) detail::fail_at(source, lineno, "mode declared twice");
      if (tok.size() != 2 || (tok[1] != "edges" && tok[1] != "stations")) {
        detail::fail_at(source, lineno, "expected 'mode edges' or 'mode stations'");
      }
      mode = tok[1] == "edges" ? GraphFileMode::Edges : GraphFileMode::Stations;
      continue;
    }
    if (!mode) detail::fail_at(source, lineno, "first statement must be 'mode edges' or 'mode stations'");
    const bool edge_mode = *mode == GraphFileMode::Edges;

    if (kw == "vertex" && edge_mode) {
      if (tok.size() != 2 && tok.size() != 4) detail::fail_at(source, lineno, "expected 'vertex <id> [<x> <y>]'");
      VertexRow r{lineno, need_int(tok[1], "vertex id"), std::nullopt};
      if (tok.size() == 4) r.pos = Point{need_num(tok[2], "x"), need_num(tok[3], "y")};
      vertices.push_back(r);
    } else if (kw == "edge" && edge_mode) {
      if (tok.size() < 4) detail::fail_at(source, lineno, "expected 'edge <id> <u> <v> [length=<l>] [value=<f>]'");
      auto o = options(4, {"length", "value"});
      edges.push_back({lineno, need_int(tok[1], "edge id"), need_int(tok[2], "endpoint"), need_int(tok[3], "endpoint"),
                       opt(o, "length"), opt(o, "value")});
    } else if (kw == "station" && !edge_mode) {
      if (tok.size() < 4) detail::fail_at(source, lineno, "expected 'station <id> <x> <y> [value=<f>]'");
      auto o = options(4, {"value"});
      stations.push_back({lineno, need_int(tok[1], "station id"), Point{need_num(tok[2], "x"), need_num(tok[3], "y")},
                          opt(o, "value")});
    } else if (kw == "link" && !edge_mode) {
      if (tok.size() < 3) detail::fail_at(source, lineno, "expected 'link <a> <b> [length=<l>]'");
      auto o = options(3, {"length"});
      links.push_back({lineno, need_int(tok[1], "station id"), need_int(tok[2], "station id"), opt(o, "length")});
    } else {
      detail::fail_at(source, lineno, "unexpected statement '" + std::string(kw) + "' in " + (edge_mode ? "edge" : "station") + " mode");
    }
  }
  if (!mode) throw Error(ErrorCategory::InvalidInput, std::string(source) + ": empty graph file");

  GraphFile out;
  out.mode = *mode;
  // Rows may appear in any order; structural errors are reported at the
  // offending row.
  auto at_line = [&](std::size_t line, auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      detail::fail_at(source, line, e.what());
    }
  };
  if (*mode == GraphFileMode::Edges) {
    for (const auto& r : vertices) at_line(r.line, [&] { out.graph.add_vertex(r.id, r.pos); });
    for (const auto& r : edges) {
      if (r.length && *r.length <= 0.0) detail::fail_at(source, r.line, "edge " + std::to_string(r.id) + " has non-positive length");
      at_line(r.line, [&] { out.graph.add_edge(r.id, r.u, r.v, r.length, r.value); });
    }
  } else {
    std::unordered_map<std::int64_t, std::size_t> index;
    for (const auto& r : stations) {
      at_line(r.line, [&] { index[r.id] = out.stations.add_vertex(r.id, r.pos); });
      out.station_values.push_back(r.value);
    }
    for (const auto& r : links) {
      auto a = index.find(r.a), b = index.find(r.b);
      if (a == index.end() || b == index.end()) {
        detail::fail_at(source, r.line, "link references unknown station " + std::to_string(a == index.end() ? r.a : r.b));
      }
      if (r.length && *r.length <= 0.0) detail::fail_at(source, r.line, "link has non-positive length");
      at_line(r.line, [&] { out.stations.add_edge(a->second, b->second, r.length); });
    }
  }
  return out;
}

inline GraphFile parse_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::InvalidInput, "cannot open graph file '" + path + "'");
  return parse_graph(in, path);
}

inline void write_graph(std::ostream& os, const Graph& g) {
  os << "mode edges\n";
  for (const auto& v : g.vertices()) {
    os << "vertex " << v.id;
    if (v.position) os << ' ' << format_number(v.position->x) << ' ' << format_number(v.position->y);
    os << '\n';
  }
  for (const auto& e : g.edges()) {
    os << "edge " << e.id << ' ' << g.vertices()[e.u].id << ' ' << g.vertices()[e.v].id;
    if (e.length) os << " length=" << format_number(*e.length);
    if (e.value) os << " value=" << format_number(*e.value);
    os << '\n';
  }
}

/// Station-mode document for any line graph (coordinates required).
inline void write_stations(std::ostream& os, const LineGraph& lg, std::span<const std::optional<double>> values = {}) {
  if (!lg.has_coordinates()) throw Error(ErrorCategory::InvalidInput, "station mode needs coordinates for every vertex");
  os << "mode stations\n";
  for (std::size_t k = 0; k < lg.size(); ++k) {
    const auto& v = lg.vertices()[k];
    os << "station " << v.id << ' ' << format_number(v.position->x) << ' ' << format_number(v.position->y);
    if (k < values.size() && values[k]) os << " value=" << format_number(*values[k]);
    os << '\n';
  }
  for (const auto& e : lg.edges()) {
    os << "link " << lg.vertices()[e.a].id << ' ' << lg.vertices()[e.b].id;
    if (e.length) os << " length=" << format_number(*e.length);
    os << '\n';
  }
}

inline void write_graph_file(std::ostream& os, const GraphFile& f) {
  if (f.mode == GraphFileMode::Edges) {
    write_graph(os, f.graph);
  } else {
    write_stations(os, f.stations, f.station_values);
  }
}

inline Network to_network(const GraphFile& f) {
  Network net;
  if (f.mode == GraphFileMode::Edges) {
    net.line_graph = build_line_graph(f.graph);
    if (f.graph.has_values()) net.values = f.graph.values();
  } else {
    if (f.stations.size() < 3) throw Error(ErrorCategory::InvalidInput, "need at least 3 stations");
    if (!f.stations.connected()) throw Error(ErrorCategory::InvalidInput, "station links do not connect all stations");
    net.line_graph = f.stations;
    if (std::all_of(f.station_values.begin(), f.station_values.end(), [](const auto& v) { return v.has_value(); })) {
      net.values.emplace();
      for (const auto& v : f.station_values) net.values->push_back(*v);
    }
  }
  return net;
}

// ---------------------------------------------------------------------------
// Transform records and coefficients

inline nlohmann::json record_to_json(const LiftingRecord& rec, const LineGraph& lg) {
  using nlohmann::json;
  json stages = json::array();
  for (const auto& s : rec.stages) {
    stages.push_back({{"removed", s.removed},
                      {"neighbors", s.neighbors},
                      {"prediction", s.prediction},
                      {"update", s.update},
                      {"scale", s.scale},
                      {"added_edges", s.added_edges},
                      {"removed_edges", s.removed_edges}});
  }
  std::vector<std::int64_t> ids;
  for (const auto& v : lg.vertices()) ids.push_back(v.id);
  return {{"format", "lgl-record"},
          {"version", 1},
          {"variant", variant_name(rec.config)},
          {"stopping_time", rec.config.stopping_time},
          {"seed", rec.config.seed},
          {"integral_scale", rec.config.integral_scale},
          {"size", rec.size},
          {"vertex_ids", ids},
          {"initial_integrals", rec.initial_integrals},
          {"final_integrals", rec.final_integrals},
          {"survivors", rec.survivors},
          {"stages", stages}};
}

struct LoadedRecord {
  LiftingRecord record;
  std::vector<std::int64_t> vertex_ids;  // external id of each index
};

inline LoadedRecord record_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "lgl-record" || j.at("version") != 1) throw Error(ErrorCategory::InvalidInput, "not an lgl record (version 1)");
    LoadedRecord out;
    auto& rec = out.record;
    rec.config = parse_variant(j.at("variant").get<std::string>());
    rec.config.stopping_time = j.at("stopping_time").get<std::size_t>();
    rec.config.seed = j.at("seed").get<std::uint64_t>();
    rec.config.integral_scale = j.at("integral_scale").get<double>();
    rec.size = j.at("size").get<std::size_t>();
    out.vertex_ids = j.at("vertex_ids").get<std::vector<std::int64_t>>();
    rec.initial_integrals = j.at("initial_integrals").get<std::vector<double>>();
    rec.final_integrals = j.at("final_integrals").get<std::vector<double>>();
    rec.survivors = j.at("survivors").get<std::vector<std::size_t>>();
    for (const auto& s : j.at("stages")) {
      LiftingStage st;
      st.removed = s.at("removed").get<std::size_t>();
      st.neighbors = s.at("neighbors").get<std::vector<std::size_t>>();
      st.prediction = s.at("prediction").get<std::vector<double>>();
      st.update = s.at("update").get<std::vector<double>>();
      st.scale = s.at("scale").get<double>();
      st.added_edges = s.at("added_edges").get<std::vector<std::pair<std::size_t, std::size_t>>>();
      st.removed_edges = s.at("removed_edges").get<std::vector<std::pair<std::size_t, std::size_t>>>();
      if (st.removed >= rec.size || st.prediction.size() != st.neighbors.size() || st.update.size() != st.neighbors.size()) {
        throw Error(ErrorCategory::InvalidInput, "record stage is inconsistent");
      }
      for (auto n : st.neighbors) {
        if (n >= rec.size) throw Error(ErrorCategory::InvalidInput, "record stage references an unknown vertex");
      }
      rec.stages.push_back(std::move(st));
    }
    if (out.vertex_ids.size() != rec.size || rec.stages.size() + rec.survivors.size() != rec.size) {
      throw Error(ErrorCategory::InvalidInput, "record sizes are inconsistent");
    }
    for (auto s : rec.survivors) {
      if (s >= rec.size) throw Error(ErrorCategory::InvalidInput, "record survivor out of range");
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::InvalidInput, std::string("malformed record: ") + e.what());
  }
}

/// kind,vertex_id,coefficient,scale,level. Details in removal order, then
/// scaling coefficients; scale and level are empty where they do not apply.
inline void write_coefficients_csv(std::ostream& os, const CoefficientSet& c, std::span<const std::int64_t> ids) {
  os << "kind,vertex_id,coefficient,scale,level\n";
  for (std::size_t j = 0; j < c.details.size(); ++j) {
    os << "detail," << ids[c.detail_ids[j]] << ',' << format_number(c.details[j]) << ',' << format_number(c.scales[j]) << ',';
    if (j < c.levels.size()) os << c.levels[j];
    os << '\n';
  }
  for (std::size_t j = 0; j < c.scaling.size(); ++j) {
    os << "scaling," << ids[c.scaling_ids[j]] << ',' << format_number(c.scaling[j]) << ",,\n";
  }
}

inline CoefficientSet read_coefficients_csv(std::istream& in, std::span<const std::int64_t> ids,
                                            std::string_view source = "<coefficients>") {
  std::unordered_map<std::int64_t, std::size_t> index;
  for (std::size_t k = 0; k < ids.size(); ++k) index[ids[k]] = k;
  CoefficientSet c;
  std::string line;
  std::size_t lineno = 0;
  bool levels = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty() || line == "\r") continue;
    auto f = detail::split_csv(line);
    if (f.size() != 5) detail::fail_at(source, lineno, "expected 5 columns");
    auto id = detail::to_int(f[1]);
    auto value = detail::to_double(f[2]);
    if (!id || !index.contains(*id)) detail::fail_at(source, lineno, "unknown vertex id '" + f[1] + "'");
    if (!value) detail::fail_at(source, lineno, "bad coefficient '" + f[2] + "'");
    if (f[0] == "detail") {
      auto scale = detail::to_double(f[3]);
      if (!scale) detail::fail_at(source, lineno, "bad scale '" + f[3] + "'");
      c.detail_ids.push_back(index[*id]);
      c.details.push_back(*value);
      c.scales.push_back(*scale);
      if (auto lvl = detail::to_int(f[4])) {
        c.levels.push_back(static_cast<int>(*lvl));
      } else {
        levels = false;
      }
    } else if (f[0] == "scaling") {
      c.scaling_ids.push_back(index[*id]);
      c.scaling.push_back(*value);
    } else {
      detail::fail_at(source, lineno, "kind must be detail or scaling");
    }
  }
  if (!levels) c.levels.clear();
  return c;
}

/// vertex_id,value
inline void write_values_csv(std::ostream& os, std::span<const double> values, std::span<const std::int64_t> ids) {
  os << "vertex_id,value\n";
  for (std::size_t k = 0; k < values.size(); ++k) os << ids[k] << ',' << format_number(values[k]) << '\n';
}

// ---------------------------------------------------------------------------
// Denoising output

/// Diagnostics as '#' comment lines, then vertex_id,noisy,estimate,residual.
inline void write_denoise_csv(std::ostream& os, const DenoiseResult& r, std::span<const double> noisy,
                              std::span<const std::int64_t> ids, std::size_t keep_coarsest) {
  os << "# sigma_hat=" << format_number(r.sigma) << (r.sigma_fallback ? " (zero-MAD fallback)" : "") << '\n';
  os << "# prior_weight=" << format_number(r.weight) << (r.weight_fallback ? " (fallback)" : "") << '\n';
  os << "# threshold=" << format_number(r.threshold) << '\n';
  const auto& c = r.coefficients;
  int levels = 0;
  for (int l : c.levels) levels = std::max(levels, l + 1);
  os << "# levels=" << levels << " keep_coarsest=" << keep_coarsest << '\n';
  os << "# level,count,min_scale,max_scale,thresholded,zeroed\n";
  for (int l = 0; l < levels; ++l) {
    std::size_t count = 0, zeroed = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t j = 0; j < c.details.size(); ++j) {
      if (c.levels[j] != l) continue;
      ++count;
      lo = std::min(lo, c.scales[j]);
      hi = std::max(hi, c.scales[j]);
      zeroed += r.shrunk_details[j] == 0.0 && c.details[j] != 0.0;
    }
    const bool thresholded = l < levels - static_cast<int>(keep_coarsest);
    os << "# " << l << ',' << count << ',' << format_number(count ? lo : 0.0) << ',' << format_number(count ? hi : 0.0)
       << ',' << (thresholded ? "yes" : "no") << ',' << zeroed << '\n';
  }
  os << "vertex_id,noisy,estimate,residual\n";
  for (std::size_t k = 0; k < noisy.size(); ++k) {
    os << ids[k] << ',' << format_number(noisy[k]) << ',' << format_number(r.estimates[k]) << ','
       << format_number(noisy[k] - r.estimates[k]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Run manifests

/// Everything needed to repeat a run: the command, every resolved option,
/// and the files read and written. `argv` replays the run verbatim.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> options;
  std::vector<std::string> argv;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string version = "1.0.0";

  nlohmann::json to_json() const {
    return {{"tool", "lgl"}, {"version", version}, {"command", command}, {"options", options},
            {"argv", argv},  {"inputs", inputs},   {"outputs", outputs}};
  }

  static RunManifest from_json(const nlohmann::json& j) {
    try {
      RunManifest m;
      m.command = j.at("command").get<std::string>();
      m.options = j.at("options").get<std::map<std::string, std::string>>();
      m.argv = j.at("argv").get<std::vector<std::string>>();
      m.inputs = j.at("inputs").get<std::vector<std::string>>();
      m.outputs = j.at("outputs").get<std::vector<std::string>>();
      m.version = j.at("version").get<std::string>();
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCategory::InvalidInput, std::string("malformed manifest: ") + e.what());
    }
  }
};

}  // namespace lgl
