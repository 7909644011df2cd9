#pragma once

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fractal_lab/fractal_lab.hpp"

namespace fractal_lab::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_finding = 2;

struct Schedule {
  double r0 = 0.0;
  double factor = 0.5;
  std::size_t count = 0;

  std::vector<double> radii() const {
    std::vector<double> out;
    for (std::size_t j = 0; j < count; ++j) out.push_back(r0 * std::pow(factor, static_cast<double>(j)));
    return out;
  }
};

inline Schedule parse_schedule(const std::string& text) {
  auto f = split(text, ',');
  if (f.size() != 3) throw InvalidInput("schedule must be r0,factor,count");
  Schedule s;
  s.r0 = parse_real(f[0], "schedule r0");
  s.factor = parse_real(f[1], "schedule factor");
  long long c = parse_integer(f[2], "schedule count");
  if (!(s.r0 > 0.0) || !std::isfinite(s.r0)) throw InvalidInput("schedule r0 must be positive");
  if (!(s.factor > 0.0 && s.factor < 1.0)) throw InvalidInput("schedule factor must lie in (0,1)");
  if (c < 1 || c > 256) throw InvalidInput("schedule count must lie in 1..256");
  s.count = static_cast<std::size_t>(c);
  return s;
}

struct RunConfig {
  std::string subcommand;
  std::string space;
  std::string map = "identity";
  std::optional<double> delta;  // cube ratio; scale ratio for dim --method covers
  double c0 = 1.0;
  double C0 = 2.0;
  int k_max = 3;
  double p = 2.0;
  double alpha = 0.5;
  double Q = 1.0;
  double epsilon = 0.4;
  std::optional<Schedule> schedule;
  std::string method = "covers";
  std::string bound = "ch";
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out;  // not part of the echo
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"gen", "cubes", "dim", "certify", "distort", "verify"};
  return names;
}

// Everything that determines the artifact; the output path is excluded.
inline Json config_echo(const RunConfig& c) {
  Json j;
  j["subcommand"] = c.subcommand;
  j["space"] = c.space;
  j["map"] = c.map;
  j["delta"] = c.delta ? Json(*c.delta) : Json(nullptr);
  j["c0"] = c.c0;
  j["C0"] = c.C0;
  j["kmax"] = c.k_max;
  j["p"] = c.p;
  j["alpha"] = c.alpha;
  j["Q"] = c.Q;
  j["epsilon"] = c.epsilon;
  if (c.schedule)
    j["schedule"] = Json{{"r0", c.schedule->r0}, {"factor", c.schedule->factor}, {"count", c.schedule->count}};
  else
    j["schedule"] = nullptr;
  j["method"] = c.method;
  j["bound"] = c.bound;
  j["seed"] = c.seed;
  j["format"] = c.format;
  return j;
}

inline RunConfig config_from_echo(const Json& j) {
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  RunConfig c;
  auto str = [&](const char* key, std::string& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) throw ParseError("expected a string", 0, key);
    dst = j[key].get<std::string>();
  };
  auto num = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = detail::json_number(j[key], key);
  };
  str("subcommand", c.subcommand);
  str("space", c.space);
  str("map", c.map);
  str("method", c.method);
  str("bound", c.bound);
  str("format", c.format);
  if (j.contains("delta") && !j["delta"].is_null()) c.delta = detail::json_number(j["delta"], "delta");
  num("c0", c.c0);
  num("C0", c.C0);
  num("p", c.p);
  num("alpha", c.alpha);
  num("Q", c.Q);
  num("epsilon", c.epsilon);
  if (j.contains("kmax")) {
    if (!j["kmax"].is_number_integer()) throw ParseError("expected an integer", 0, "kmax");
    c.k_max = j["kmax"].get<int>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ParseError("expected a nonnegative integer", 0, "seed");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("schedule") && !j["schedule"].is_null()) {
    const Json& s = j["schedule"];
    if (!s.is_object() || !s.contains("r0") || !s.contains("factor") || !s.contains("count") ||
        !s["count"].is_number_unsigned())
      throw ParseError("schedule needs r0, factor and count", 0, "schedule");
    Schedule sch;
    sch.r0 = detail::json_number(s["r0"], "schedule.r0");
    sch.factor = detail::json_number(s["factor"], "schedule.factor");
    sch.count = s["count"].get<std::size_t>();
    c.schedule = sch;
  }
  return c;
}

// Accepts an artifact ({"config": ...}), a bare config object, or a CSV
// artifact whose first line carries "config=<json>".
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  Json j;
  if (text.rfind("#", 0) == 0) {
    std::string first = text.substr(0, text.find('\n'));
    auto pos = first.find("config=");
    if (pos == std::string::npos) throw ParseError("CSV artifact lacks a config echo", 1);
    text = first.substr(pos + 7);
  }
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed config: ") + e.what());
  }
  if (j.contains("config")) return config_from_echo(j["config"]);
  return config_from_echo(j);
}

inline void validate(const RunConfig& c) {
  bool known = false;
  for (const auto& s : subcommands()) known = known || s == c.subcommand;
  if (!known) throw InvalidInput("unknown subcommand '" + c.subcommand + "'");
  if (c.space.empty()) throw InvalidInput("--space is required");
  if (c.format != "json" && c.format != "csv") throw InvalidInput("--format must be json or csv");
  if (c.method != "covers" && c.method != "cubes") throw InvalidInput("--method must be covers or cubes");
  parse_bound_kind(c.bound);
}

inline SpaceSample load_space(const std::string& spec) {
  if (looks_like_generator(spec)) return generate(spec);
  return load_point_cloud(spec);
}

inline CubeParams cube_params(const RunConfig& c) {
  CubeParams p;
  p.delta = c.delta.value_or(1.0 / 24.0);
  p.c0 = c.c0;
  p.C0 = c.C0;
  p.k_max = c.k_max;
  p.validate();
  return p;
}

struct Artifact {
  std::string schema;
  Json result;
  std::string csv;  // body used when format is csv
  int status = exit_ok;
};

namespace detail_cli {

inline std::string csv_join(const std::vector<std::string>& f) {
  std::string out;
  for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
  return out + "\n";
}

inline std::vector<double> doubling_scales(const CubeParams& params, const SpaceSample& space) {
  double gap = min_gap(space);
  std::vector<double> out;
  for (int k = 0; k <= params.k_max; ++k)
    if (params.scale(k) > 2.0 * gap) out.push_back(params.scale(k));
  if (out.empty()) out.push_back(params.scale(0));
  return out;
}

inline PointSet spread_centers(const SpaceSample& space, std::size_t want = 64) {
  PointSet out;
  std::size_t stride = std::max<std::size_t>(1, space.size() / want);
  for (PointId p = 0; p < space.size(); p += stride) out.push_back(p);
  return out;
}

}  // namespace detail_cli

inline Artifact run_gen(const RunConfig& c, const SpaceSample& space) {
  Artifact a;
  a.schema = "fractal_lab.space/1";
  a.result = space_to_json(space);
  if (c.format == "csv") {
    std::ostringstream os;
    write_point_csv(os, space);
    a.csv = os.str();
  }
  return a;
}

inline Artifact run_cubes(const RunConfig& c, const SpaceSample& space) {
  Artifact a;
  a.schema = "fractal_lab.cubes/1";
  DyadicSystem sys = build_system(space, cube_params(c));
  a.result = to_json(sys);
  a.result["max_children"] = sys.max_children;
  std::string csv = detail_cli::csv_join({"k", "cube", "center", "parent", "size"});
  for (const auto& lvl : sys.levels)
    for (std::size_t i = 0; i < lvl.cubes.size(); ++i) {
      const Cube& cube = lvl.cubes[i];
      csv += detail_cli::csv_join({std::to_string(lvl.k), std::to_string(i), std::to_string(cube.center),
                                   cube.parent ? std::to_string(*cube.parent) : "",
                                   std::to_string(cube.members.size())});
    }
  a.csv = csv;
  return a;
}

inline Artifact run_verify(const RunConfig& c, const SpaceSample& space) {
  Artifact a;
  a.schema = "fractal_lab.verify/1";
  CubeParams params = cube_params(c);
  DyadicSystem sys = build_system(space, params);
  VerificationReport rep = verify_system(sys, space);
  std::vector<double> scales = detail_cli::doubling_scales(params, space);
  PointSet centers = detail_cli::spread_centers(space);
  DoublingEstimate dbl = estimate_doubling_constant(space, scales, centers);
  PointSet all = space.all_points();
  Json sandwich = Json::array();
  bool sandwich_ok = true;
  std::string csv = detail_cli::csv_join({"k", "cube_count", "max_cube_diameter", "diameter_bound", "left_holds",
                                          "cover_upper", "c_prime", "right_bound", "right_holds"});
  for (int k = 0; k <= sys.k_max(); ++k) {
    SandwichReport s = sandwich_check(sys, space, all, k, dbl.constant);
    sandwich_ok = sandwich_ok && s.passed();
    sandwich.push_back(to_json(s));
    csv += detail_cli::csv_join({std::to_string(k), std::to_string(s.cube_count), format_real(s.max_cube_diameter),
                                 format_real(s.diameter_bound), s.left_holds ? "1" : "0",
                                 std::to_string(s.cover_upper), format_real(s.c_prime), format_real(s.right_bound),
                                 s.right_holds ? "1" : "0"});
  }
  a.result = Json{{"verification", to_json(rep)},
                  {"doubling", to_json(dbl)},
                  {"sandwich", sandwich},
                  {"passed", rep.ok() && sandwich_ok}};
  a.csv = csv;
  a.status = rep.ok() && sandwich_ok ? exit_ok : exit_finding;
  return a;
}

inline Artifact run_dim(const RunConfig& c, const SpaceSample& space) {
  Artifact a;
  a.schema = "fractal_lab.dimension/1";
  PointSet all = space.all_points();
  std::string csv = detail_cli::csv_join({"scale", "count", "lower", "in_window"});
  if (c.method == "covers") {
    CoverDimensionOptions opt;
    opt.ratio = c.delta.value_or(0.5);
    std::size_t limit = 256;
    if (c.schedule) {
      opt.r0 = c.schedule->r0;
      opt.ratio = c.schedule->factor;
      limit = c.schedule->count;
    }
    DimensionRun run = dimension_from_covers(space, all, opt);
    if (run.table.size() > limit) {
      run.table.resize(limit);
      std::vector<ScaleCount> counts;
      for (const auto& r : run.table) counts.push_back({r.scale, static_cast<double>(r.upper)});
      FitPolicy policy;
      policy.discard_coarsest = opt.discard_coarsest;
      policy.min_scale = opt.floor_factor * run.min_gap;
      policy.set_diameter = run.set_diameter;
      run.estimate = estimate_dim_box(counts, policy);
    }
    a.result = to_json(run);
    const FitWindow& w = run.estimate.fit_window;
    for (std::size_t i = 0; i < run.table.size(); ++i)
      csv += detail_cli::csv_join({format_real(run.table[i].scale), std::to_string(run.table[i].upper),
                                   std::to_string(run.table[i].lower), i >= w.first && i <= w.last ? "1" : "0"});
  } else {
    DyadicSystem sys = build_system(space, cube_params(c));
    CubeDimensionRun run = dimension_from_cubes(sys, space, all);
    Json counts = Json::array();
    const FitWindow& w = run.estimate.fit_window;
    for (std::size_t k = 0; k < run.counts.size(); ++k) {
      double scale = sys.params.scale(static_cast<int>(k));
      counts.push_back(Json{{"k", k}, {"scale", scale}, {"count", run.counts[k]}});
      csv += detail_cli::csv_join({format_real(scale), std::to_string(run.counts[k]), "",
                                   k >= w.first && k <= w.last ? "1" : "0"});
    }
    a.result = Json{{"estimate", to_json(run.estimate)}, {"counts", counts}};
  }
  a.csv = csv;
  return a;
}

inline CertifyOptions certify_options(const RunConfig& c) {
  CertifyOptions opt;
  opt.epsilon = c.epsilon;
  if (c.schedule) opt.schedule = c.schedule->radii();
  return opt;
}

inline Artifact run_certify(const RunConfig& c, const SpaceSample& space) {
  Artifact a;
  a.schema = "fractal_lab.certificate/1";
  SampledMap map = make_map(c.map, space);
  PointSet all = space.all_points();
  HolderCertificate cert = certify_compactly_holder(map, all, c.p, c.alpha, certify_options(c));
  a.result = to_json(cert);
  std::string csv = detail_cli::csv_join({"r", "ball_count", "p_sum_strong", "p_sum_weak", "skipped"});
  for (const auto& r : cert.evidence)
    csv += detail_cli::csv_join({format_real(r.r), std::to_string(r.ball_count), format_real(r.p_sum_strong),
                                 format_real(r.p_sum_weak), r.skipped ? "1" : "0"});
  a.csv = csv;
  return a;
}

inline Artifact run_distort(const RunConfig& c, const SpaceSample& space) {
  Artifact a;
  a.schema = "distortion/1";
  SampledMap map = make_map(c.map, space);
  PointSet all = space.all_points();
  BoundInputs in;
  in.kind = parse_bound_kind(c.bound);
  in.p = c.p;
  in.alpha = c.alpha;
  in.Q = c.Q;
  DistortionOptions opt;
  opt.cubes = cube_params(c);
  opt.certify = certify_options(c);
  DistortionReport rep = run_distortion_experiment(map, all, in, opt);
  a.result = to_json(rep);
  std::string csv = detail_cli::csv_join({"r", "k_r", "total_major", "cover_size_for_fE", "M"});
  for (const auto& t : rep.trace) {
    std::string m;
    for (std::size_t i = 0; i < t.M.size(); ++i) m += (i ? ";" : "") + std::to_string(t.M[i]);
    csv += detail_cli::csv_join({format_real(t.r), std::to_string(t.k_r), std::to_string(t.total_major),
                                 std::to_string(t.cover_size_for_fE), m});
  }
  a.csv = csv;
  if (rep.hypothesis_violation || (rep.bound_value && !rep.within_tolerance)) a.status = exit_finding;
  return a;
}

// Serialized artifact exactly as written to --out or stdout.
inline std::string render(const RunConfig& c, const Artifact& a) {
  Json echo = config_echo(c);
  if (c.format == "csv") return "# schema=" + a.schema + " config=" + echo.dump() + "\n" + a.csv;
  Json doc{{"schema", a.schema}, {"config", echo}, {"result", a.result}};
  return doc.dump(2) + "\n";
}

inline void report_error(std::ostream& err, const char* kind, const std::exception& e, const Json& extra = {}) {
  Json j{{"error", kind}, {"message", e.what()}};
  if (extra.is_object())
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  err << j.dump() << "\n";
}

// Executes one configured run; writes the artifact and returns the exit status.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    validate(c);
    SpaceSample space = load_space(c.space);
    Artifact a;
    if (c.subcommand == "gen") a = run_gen(c, space);
    else if (c.subcommand == "cubes") a = run_cubes(c, space);
    else if (c.subcommand == "verify") a = run_verify(c, space);
    else if (c.subcommand == "dim") a = run_dim(c, space);
    else if (c.subcommand == "certify") a = run_certify(c, space);
    else a = run_distort(c, space);
    std::string text = render(c, a);
    if (c.out.empty()) {
      out << text;
    } else {
      std::ofstream f(c.out, std::ios::binary);
      if (!f) throw InvalidInput("cannot write '" + c.out + "'");
      f << text;
    }
    return a.status;
  } catch (const ParseError& e) {
    report_error(err, "parse-error", e, Json{{"line", e.line()}, {"field", e.field()}});
  } catch (const InvalidInput& e) {
    report_error(err, "invalid-input", e);
  } catch (const ConstructionError& e) {
    report_error(err, "construction-error", e, Json{{"level", e.level()}, {"cube", e.cube()}});
  } catch (const ResolutionExhausted& e) {
    report_error(err, "resolution-exhausted", e, Json{{"partial", to_json(e.partial())}});
  } catch (const ScaleOutOfRange& e) {
    report_error(err, "scale-out-of-range", e);
  } catch (const std::exception& e) {
    report_error(err, "error", e);
  }
  return exit_error;
}

// Parses argv into a RunConfig (via CLI11) and runs it.
inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fractal_lab: dyadic cubes, box dimension and Holder distortion experiments"};
  app.require_subcommand(0, 1);
  std::string config_path, out_path;
  app.add_option("--config", config_path, "Replay the config echo of an earlier artifact");
  app.add_option("--out", out_path, "Artifact path (stdout when omitted)");

  struct Raw {
    std::string space, map, delta, c0, C0, kmax, p, alpha, Q, epsilon, schedule, method, bound, seed, format;
  };
  std::vector<Raw> raws(subcommands().size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < subcommands().size(); ++i) {
    const std::string& name = subcommands()[i];
    static const char* const blurbs[] = {
        "Write a generated or loaded sample as JSON or CSV",
        "Build a dyadic cube system",
        "Estimate the box-counting dimension (covers or cubes)",
        "Certify the compactly Holder p-summability condition",
        "Compare the image dimension with a distortion bound",
        "Check the cube properties and the cube/cover sandwich",
    };
    CLI::App* sub = app.add_subcommand(name, blurbs[i]);
    Raw& r = raws[i];
    sub->add_option("--space", r.space, "Generator (cantor:K, carpet:K, grid:N[:dim[:lo:hi]]) or CSV/JSON path")
        ->required();
    sub->add_option("--map", r.map, "identity | snowflake_id:a | power:b | radial:b | affine:a:b");
    sub->add_option("--delta", r.delta, "Cube ratio (dim --method covers: scale ratio); a/b accepted");
    sub->add_option("--c0", r.c0);
    sub->add_option("--C0", r.C0);
    sub->add_option("--kmax", r.kmax);
    sub->add_option("--p", r.p);
    sub->add_option("--alpha", r.alpha);
    sub->add_option("--Q", r.Q);
    sub->add_option("--epsilon", r.epsilon);
    sub->add_option("--schedule", r.schedule, "r0,factor,count");
    sub->add_option("--method", r.method, "covers | cubes (dim)");
    sub->add_option("--bound", r.bound, "ch | sobolev | qs (distort)");
    sub->add_option("--seed", r.seed);
    sub->add_option("--format", r.format, "json | csv");
    sub->add_option("--out", out_path, "Artifact path (stdout when omitted)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e);
    return exit_error;
  }

  RunConfig c;
  try {
    std::size_t chosen = subs.size();
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) chosen = i;
    if (!config_path.empty()) {
      if (chosen != subs.size()) throw InvalidInput("--config and a subcommand are mutually exclusive");
      c = load_config(config_path);
    } else {
      if (chosen == subs.size()) throw InvalidInput("a subcommand is required (or --config)");
      const Raw& r = raws[chosen];
      c.subcommand = subcommands()[chosen];
      c.space = r.space;
      if (!r.map.empty()) c.map = r.map;
      if (!r.delta.empty()) c.delta = parse_real(r.delta, "--delta");
      if (!r.c0.empty()) c.c0 = parse_real(r.c0, "--c0");
      if (!r.C0.empty()) c.C0 = parse_real(r.C0, "--C0");
      if (!r.kmax.empty()) c.k_max = static_cast<int>(parse_integer(r.kmax, "--kmax"));
      if (!r.p.empty()) c.p = parse_real(r.p, "--p");
      if (!r.alpha.empty()) c.alpha = parse_real(r.alpha, "--alpha");
      if (!r.Q.empty()) c.Q = parse_real(r.Q, "--Q");
      if (!r.epsilon.empty()) c.epsilon = parse_real(r.epsilon, "--epsilon");
      if (!r.schedule.empty()) c.schedule = parse_schedule(r.schedule);
      if (!r.method.empty()) c.method = r.method;
      if (!r.bound.empty()) c.bound = r.bound;
      if (!r.seed.empty()) {
        long long s = parse_integer(r.seed, "--seed");
        if (s < 0) throw InvalidInput("--seed must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
      }
      if (!r.format.empty()) c.format = r.format;
    }
    c.out = out_path;
  } catch (const ParseError& e) {
    report_error(err, "parse-error", e, Json{{"line", e.line()}, {"field", e.field()}});
    return exit_error;
  } catch (const std::exception& e) {
    report_error(err, "invalid-input", e);
    return exit_error;
  }
  return run(c, out, err);
}

}  // namespace fractal_lab::cli
