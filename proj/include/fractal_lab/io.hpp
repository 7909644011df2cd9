#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fractal_lab/box_dimension.hpp"
#include "fractal_lab/distortion_bounds.hpp"
#include "fractal_lab/dyadic_cubes.hpp"
#include "fractal_lab/error.hpp"
#include "fractal_lab/example_spaces.hpp"
#include "fractal_lab/holder_analysis.hpp"
#include "fractal_lab/metric_core.hpp"
#include "fractal_lab/numeric_text.hpp"
#include "fractal_lab/space_sample.hpp"

namespace fractal_lab {

using Json = nlohmann::ordered_json;

// ---- point clouds -------------------------------------------------------

// CSV with header id,x1,...,xn[,w].
inline SpaceSample read_point_csv(std::istream& in, std::string label = {}) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    header = split(line, ',');
    break;
  }
  if (header.empty()) throw ParseError("empty point file", lineno);
  if (header[0] != "id") throw ParseError("header must start with 'id'", lineno, header[0]);
  bool weighted = header.back() == "w";
  std::size_t dim = header.size() - 1 - (weighted ? 1 : 0);
  if (dim == 0) throw ParseError("header names no coordinate columns", lineno);
  for (std::size_t c = 1; c <= dim; ++c)
    if (header[c] != "x" + std::to_string(c)) throw ParseError("expected column x" + std::to_string(c), lineno, header[c]);

  std::vector<std::string> ids;
  std::vector<double> coords, weights;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f = split(line, ',');
    if (f.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()),
                       lineno);
    ids.push_back(f[0]);
    for (std::size_t c = 1; c < f.size(); ++c) {
      double v;
      try {
        v = parse_plain_real(f[c], header[c]);
      } catch (const InvalidInput& e) {
        throw ParseError(e.what(), lineno, header[c]);
      }
      if (!std::isfinite(v)) throw ParseError("value is not finite", lineno, header[c]);
      if (weighted && c == f.size() - 1) {
        if (v < 0.0) throw ParseError("weight is negative", lineno, "w");
        weights.push_back(v);
      } else {
        coords.push_back(v);
      }
    }
  }
  if (ids.empty()) throw ParseError("point file has no rows", lineno);
  SpaceSample s;
  try {
    s = SpaceSample::euclidean(std::move(coords), dim, std::move(label)).with_ids(std::move(ids));
    if (weighted) s = s.with_weights(std::move(weights));
  } catch (const InvalidInput& e) {
    throw ParseError(e.what());
  }
  return s;
}

inline void write_point_csv(std::ostream& out, const SpaceSample& s) {
  if (s.kind() != MetricKind::euclidean) throw InvalidInput("CSV holds Euclidean coordinates only; use JSON");
  out << "id";
  for (std::size_t c = 1; c <= s.dim(); ++c) out << ",x" << c;
  if (s.has_weights()) out << ",w";
  out << "\n";
  for (PointId p = 0; p < s.size(); ++p) {
    out << s.id(p);
    for (double v : s.coordinates(p)) out << "," << format_real(v);
    if (s.has_weights()) out << "," << format_real(s.weight(p));
    out << "\n";
  }
}

inline Json space_to_json(const SpaceSample& s) {
  Json j;
  j["type"] = to_string(s.kind());
  if (s.exponent() != 1.0) j["alpha"] = s.exponent();
  if (!s.label().empty()) j["label"] = s.label();
  if (s.has_coordinates()) {
    Json pts = Json::array();
    for (PointId p = 0; p < s.size(); ++p) {
      Json row = Json::array();
      for (double v : s.coordinates(p)) row.push_back(v);
      pts.push_back(std::move(row));
    }
    j["points"] = std::move(pts);
  } else {
    Json rows = Json::array();
    auto t = s.table();
    for (std::size_t i = 0; i < s.size(); ++i) {
      Json row = Json::array();
      for (std::size_t k = 0; k < s.size(); ++k) row.push_back(t[i * s.size() + k]);
      rows.push_back(std::move(row));
    }
    j["distances"] = std::move(rows);
  }
  if (s.has_weights()) j["weights"] = std::vector<double>(s.weights().begin(), s.weights().end());
  if (s.has_ids()) {
    std::vector<std::string> ids;
    for (PointId p = 0; p < s.size(); ++p) ids.push_back(s.id(p));
    j["ids"] = ids;
  }
  return j;
}

namespace detail {

inline double json_number(const Json& v, const std::string& field) {
  if (!v.is_number()) throw ParseError("expected a number", 0, field);
  double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError("number is not finite", 0, field);
  return x;
}

}  // namespace detail

inline SpaceSample space_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("space spec must be a JSON object");
  if (!j.contains("type") || !j["type"].is_string()) throw ParseError("missing string", 0, "type");
  std::string type = j["type"].get<std::string>();
  std::string label = j.contains("label") && j["label"].is_string() ? j["label"].get<std::string>() : "";
  SpaceSample s;
  if (type == "euclidean" || type == "snowflake") {
    if (!j.contains("points") || !j["points"].is_array()) throw ParseError("missing array", 0, "points");
    const Json& pts = j["points"];
    if (pts.empty()) throw ParseError("no points", 0, "points");
    std::size_t dim = 0;
    std::vector<double> coords;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::string field = "points[" + std::to_string(i) + "]";
      const Json& row = pts[i];
      if (row.is_number()) {
        if (dim == 0) dim = 1;
        if (dim != 1) throw ParseError("row length differs from the first row", 0, field);
        coords.push_back(detail::json_number(row, field));
        continue;
      }
      if (!row.is_array() || row.empty()) throw ParseError("expected a coordinate array", 0, field);
      if (dim == 0) dim = row.size();
      if (row.size() != dim) throw ParseError("row length differs from the first row", 0, field);
      for (std::size_t c = 0; c < row.size(); ++c)
        coords.push_back(detail::json_number(row[c], field + "[" + std::to_string(c) + "]"));
    }
    try {
      s = SpaceSample::euclidean(std::move(coords), dim, label);
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), 0, "points");
    }
  } else if (type == "table") {
    if (!j.contains("distances") || !j["distances"].is_array()) throw ParseError("missing array", 0, "distances");
    const Json& rows = j["distances"];
    std::size_t n = rows.size();
    if (n == 0) throw ParseError("empty distance table", 0, "distances");
    std::vector<double> table(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      std::string field = "distances[" + std::to_string(i) + "]";
      if (!rows[i].is_array() || rows[i].size() != n) throw ParseError("row must have n entries", 0, field);
      for (std::size_t k = 0; k < n; ++k)
        table[i * n + k] = detail::json_number(rows[i][k], field + "[" + std::to_string(k) + "]");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (table[i * n + i] != 0.0)
        throw ParseError("diagonal entry must be zero", 0, "distances[" + std::to_string(i) + "][" + std::to_string(i) + "]");
      for (std::size_t k = i + 1; k < n; ++k) {
        std::string field = "distances[" + std::to_string(i) + "][" + std::to_string(k) + "]";
        if (table[i * n + k] != table[k * n + i]) throw ParseError("symmetry violation", 0, field);
        if (!(table[i * n + k] > 0.0)) throw ParseError("distinct points need a positive distance", 0, field);
      }
    }
    s = SpaceSample::from_table(std::move(table), n, label);
    if (std::size_t bad = count_triangle_violations(s, 1000000); bad > 0)
      throw ParseError("triangle inequality fails on " + std::to_string(bad) + " triples", 0, "distances");
  } else {
    throw ParseError("unknown space type '" + type + "' (expected euclidean, snowflake or table)", 0, "type");
  }
  if (j.contains("alpha")) {
    double a = detail::json_number(j["alpha"], "alpha");
    if (!(a > 0.0 && a <= 1.0)) throw ParseError("snowflake exponent must lie in (0,1]", 0, "alpha");
    if (a < 1.0) s = s.snowflake(a);
  } else if (type == "snowflake") {
    throw ParseError("snowflake space needs an exponent", 0, "alpha");
  }
  if (j.contains("weights")) {
    const Json& w = j["weights"];
    if (!w.is_array() || w.size() != s.size()) throw ParseError("expected one weight per point", 0, "weights");
    std::vector<double> ws;
    for (std::size_t i = 0; i < w.size(); ++i) ws.push_back(detail::json_number(w[i], "weights[" + std::to_string(i) + "]"));
    try {
      s = s.with_weights(std::move(ws));
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), 0, "weights");
    }
  }
  if (j.contains("ids")) {
    const Json& ids = j["ids"];
    if (!ids.is_array() || ids.size() != s.size()) throw ParseError("expected one id per point", 0, "ids");
    std::vector<std::string> out;
    for (const auto& v : ids) {
      if (!v.is_string()) throw ParseError("ids must be strings", 0, "ids");
      out.push_back(v.get<std::string>());
    }
    s = s.with_ids(std::move(out));
  }
  return s;
}

inline SpaceSample read_space_json(std::istream& in) {
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return space_from_json(j);
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline SpaceSample load_point_cloud(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  if (ends_with(path, ".json")) return read_space_json(in).with_label(path);
  return read_point_csv(in, path);
}

inline void save_space(const std::string& path, const SpaceSample& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  if (ends_with(path, ".json")) {
    out << space_to_json(s).dump(1) << "\n";
  } else {
    write_point_csv(out, s);
  }
}

inline void save_report(const std::string& path, const Json& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << report.dump(2) << "\n";
}

// ---- reports ----------------------------------------------------------

inline Json to_json(const CubeParams& p) {
  return Json{{"delta", p.delta}, {"c0", p.c0}, {"C0", p.C0}, {"k_max", p.k_max}};
}

inline Json to_json(const DyadicSystem& sys) {
  Json levels = Json::array();
  for (const auto& lvl : sys.levels) {
    Json cubes = Json::array();
    for (const auto& c : lvl.cubes) {
      Json cube{{"center", c.center}, {"members", c.members}};
      cube["parent"] = c.parent ? Json(*c.parent) : Json(nullptr);
      cubes.push_back(std::move(cube));
    }
    levels.push_back(Json{{"k", lvl.k}, {"cubes", std::move(cubes)}});
  }
  return Json{{"params", to_json(sys.params)}, {"levels", std::move(levels)}};
}

inline Json to_json(const VerificationReport& rep) {
  Json counts = Json::object();
  for (auto p : {CubeProperty::structure, CubeProperty::partition, CubeProperty::nesting, CubeProperty::inner_ball,
                 CubeProperty::outer_ball, CubeProperty::dilated_ball})
    counts[to_string(p)] = rep.count(p);
  Json list = Json::array();
  for (const auto& v : rep.violations) {
    Json e{{"property", to_string(v.property)}, {"level", v.level}, {"cube", v.cube}};
    e["point"] = v.point ? Json(*v.point) : Json(nullptr);
    e["detail"] = v.detail;
    list.push_back(std::move(e));
  }
  return Json{{"ok", rep.ok()}, {"cubes_checked", rep.cubes_checked}, {"counts", counts}, {"violations", list}};
}

inline Json to_json(const CoverReport& c) {
  Json j{{"scale", c.scale}, {"lower", c.lower}, {"upper", c.upper}, {"cluster_upper", c.cluster_upper}};
  j["cell_upper"] = c.cell_upper ? Json(*c.cell_upper) : Json(nullptr);
  return j;
}

inline Json to_json(const FitWindow& w) {
  return Json{{"k_E", w.k_E},         {"first", w.first},         {"last", w.last},
              {"scale_max", w.scale_max}, {"scale_min", w.scale_min}, {"scales", w.scales}};
}

inline Json to_json(const DimensionEstimate& e) {
  return Json{{"slope", e.slope},       {"intercept", e.intercept},       {"residual", e.residual},
              {"fit_window", to_json(e.fit_window)}, {"count_source", e.count_source}, {"notes", e.notes}};
}

inline Json to_json(const DimensionRun& run) {
  Json table = Json::array();
  for (const auto& c : run.table) table.push_back(to_json(c));
  return Json{{"estimate", to_json(run.estimate)},
              {"set_diameter", run.set_diameter},
              {"min_gap", run.min_gap},
              {"counts", std::move(table)}};
}

inline Json to_json(const SandwichReport& s) {
  return Json{{"k", s.k},
              {"cube_count", s.cube_count},
              {"max_cube_diameter", s.max_cube_diameter},
              {"diameter_bound", s.diameter_bound},
              {"left_holds", s.left_holds},
              {"cover_upper", s.cover_upper},
              {"c_prime", s.c_prime},
              {"right_bound", s.right_bound},
              {"right_holds", s.right_holds}};
}

inline Json to_json(const DoublingEstimate& d) {
  return Json{{"constant", d.constant},
              {"max_cover_count", d.max_cover_count},
              {"witness_center", d.witness_center},
              {"witness_scale", d.witness_scale},
              {"scales_tested", d.scales_tested}};
}

inline Json to_json(const HolderCertificate& c) {
  Json rows = Json::array();
  for (const auto& r : c.evidence) {
    rows.push_back(Json{{"r", r.r},
                        {"ball_count", r.ball_count},
                        {"p_sum_strong", r.p_sum_strong},
                        {"p_sum_weak", r.p_sum_weak},
                        {"max_coefficient", r.max_coefficient},
                        {"skipped", r.skipped},
                        {"note", r.note}});
  }
  return Json{{"p", c.p},
              {"alpha", c.alpha},
              {"epsilon", c.epsilon},
              {"verdict", to_string(c.verdict)},
              {"growth_exponent", c.growth_exponent},
              {"tail_growth", c.tail_growth},
              {"residual", c.residual},
              {"C_E_estimate", c.C_E_estimate},
              {"schedule", c.schedule},
              {"p_sums", c.p_sums},
              {"evidence", std::move(rows)},
              {"notes", c.notes}};
}

inline Json to_json(const QuasisymmetryEstimate& q) {
  Json bins = Json::array();
  for (const auto& b : q.envelope)
    bins.push_back(Json{{"t_lo", b.t_lo}, {"t_hi", b.t_hi}, {"samples", b.samples}, {"max_ratio", b.max_ratio}, {"eta", b.eta}});
  return Json{{"triples", q.triples}, {"eta_at_1", q.eta_at_1}, {"inverse_eta_at_1", q.inverse_eta_at_1},
              {"envelope", std::move(bins)}};
}

inline Json to_json(const MajorMinorTrace& t) {
  return Json{{"r", t.r},
              {"k_r", t.k_r},
              {"M", t.M},
              {"total_major", t.total_major},
              {"cover_size_for_fE", t.cover_size_for_fE}};
}

inline Json to_json(const DistortionReport& r) {
  Json j;
  j["schema"] = r.schema;
  j["bound_kind"] = to_string(r.bound_kind);
  j["d_used"] = r.d_used;
  j["bound_value"] = r.bound_value ? Json(*r.bound_value) : Json(nullptr);
  if (r.lower_bound) j["lower_bound"] = *r.lower_bound;
  j["margin"] = r.margin ? Json(*r.margin) : Json(nullptr);
  j["within_tolerance"] = r.within_tolerance;
  j["hypothesis_violation"] = r.hypothesis_violation;
  j["source_dim"] = to_json(r.source);
  j["image_dim"] = to_json(r.image);
  j["certificate"] = r.certificate ? to_json(*r.certificate) : Json(nullptr);
  Json traces = Json::array();
  for (const auto& t : r.trace) traces.push_back(to_json(t));
  j["trace"] = std::move(traces);
  if (r.major_decay)
    j["major_decay"] = Json{{"slope", r.major_decay->slope}, {"points", r.major_decay->points}};
  else
    j["major_decay"] = nullptr;
  j["notes"] = r.notes;
  return j;
}

inline Json to_json(const AhlforsReport& a) {
  return Json{{"Q", a.Q},
              {"C_A_estimate", a.C_A_estimate},
              {"upper_constant", a.upper_constant},
              {"lower_constant", a.lower_constant},
              {"fitted_exponent", a.fitted_exponent},
              {"regular", a.regular},
              {"failing_side", a.failing_side},
              {"tested", a.tested},
              {"degenerate", a.degenerate.size()}};
}

inline Json to_json(const GeneratorSpec& s) {
  Json j;
  switch (s.kind) {
    case GeneratorKind::cantor: j = Json{{"kind", "cantor"}, {"depth", s.depth}}; break;
    case GeneratorKind::carpet: j = Json{{"kind", "sierpinski_carpet"}, {"depth", s.depth}}; break;
    case GeneratorKind::grid: j = Json{{"kind", "grid"}, {"n", s.n}, {"dim", s.dim}, {"lo", s.lo}, {"hi", s.hi}}; break;
  }
  if (s.snowflake) j["snowflake"] = *s.snowflake;
  switch (s.weight) {
    case WeightKind::none: break;
    case WeightKind::unit: j["weight"] = Json{{"kind", "unit"}}; break;
    case WeightKind::uniform: j["weight"] = Json{{"kind", "uniform"}}; break;
    case WeightKind::power: j["weight"] = Json{{"kind", "power"}, {"a", s.weight_param}}; break;
  }
  j["seed"] = s.seed;
  return j;
}

inline GeneratorSpec generator_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ParseError("generator spec needs a string", 0, "kind");
  GeneratorSpec s;
  std::string kind = j["kind"].get<std::string>();
  auto integer = [&](const char* key, long long fallback) -> long long {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) throw ParseError("expected an integer", 0, key);
    return j[key].get<long long>();
  };
  if (kind == "cantor" || kind == "sierpinski_carpet" || kind == "carpet") {
    s.kind = kind == "cantor" ? GeneratorKind::cantor : GeneratorKind::carpet;
    if (!j.contains("depth")) throw ParseError("missing depth", 0, "depth");
    s.depth = static_cast<int>(integer("depth", 0));
  } else if (kind == "grid") {
    s.kind = GeneratorKind::grid;
    long long n = integer("n", 0), dim = integer("dim", 1);
    if (n < 2) throw ParseError("grid needs n >= 2", 0, "n");
    if (dim < 1) throw ParseError("grid needs dim >= 1", 0, "dim");
    s.n = static_cast<std::size_t>(n);
    s.dim = static_cast<std::size_t>(dim);
    if (j.contains("lo")) s.lo = detail::json_number(j["lo"], "lo");
    if (j.contains("hi")) s.hi = detail::json_number(j["hi"], "hi");
  } else {
    throw ParseError("unknown generator kind '" + kind + "'", 0, "kind");
  }
  if (j.contains("snowflake")) s.snowflake = detail::json_number(j["snowflake"], "snowflake");
  if (j.contains("weight")) {
    const Json& w = j["weight"];
    std::string wk = w.is_object() && w.contains("kind") && w["kind"].is_string() ? w["kind"].get<std::string>() : "";
    if (wk == "unit") {
      s.weight = WeightKind::unit;
    } else if (wk == "uniform") {
      s.weight = WeightKind::uniform;
    } else if (wk == "power") {
      s.weight = WeightKind::power;
      if (!w.contains("a")) throw ParseError("power weight needs an exponent", 0, "weight.a");
      s.weight_param = detail::json_number(w["a"], "weight.a");
    } else {
      throw ParseError("unknown weight kind", 0, "weight.kind");
    }
  }
  long long seed = integer("seed", 0);
  if (seed < 0) throw ParseError("seed must be nonnegative", 0, "seed");
  s.seed = static_cast<std::uint64_t>(seed);
  try {
    s.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(e.what());
  }
  return s;
}

}  // namespace fractal_lab
