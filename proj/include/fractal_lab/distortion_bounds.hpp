#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fractal_lab/box_dimension.hpp"
#include "fractal_lab/dyadic_cubes.hpp"
#include "fractal_lab/error.hpp"
#include "fractal_lab/holder_analysis.hpp"
#include "fractal_lab/metric_core.hpp"
#include "fractal_lab/regression.hpp"

namespace fractal_lab {

// p d / (alpha p + d): dimension bound for (p, alpha)-compactly Holder images.
inline double ch_bound(double p, double alpha, double d) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidInput("p must be finite and exceed 1");
  require_holder_exponent(alpha);
  if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidInput("source dimension must be finite and nonnegative");
  if (d == 0.0) return 0.0;
  return p * d / (alpha * p + d);
}

// p d / (p - Q + d) for super-critical Sobolev maps.
inline double sobolev_bound(double p, double Q, double d) {
  if (!(Q > 0.0) || !std::isfinite(Q)) throw InvalidInput("Q must be finite and positive");
  if (!(p > Q) || !std::isfinite(p)) throw InvalidInput("Sobolev bound needs p > Q");
  if (!(d >= 0.0 && d < Q)) throw InvalidInput("Sobolev bound needs 0 <= d < Q");
  if (d == 0.0) return 0.0;
  double v = p * d / (p - Q + d);
  if (!(v < Q)) throw InvalidInput("Sobolev bound is not below Q at these inputs");
  return v;
}

struct QsBounds {
  double lower = 0.0;
  double upper = 0.0;
};

inline QsBounds qs_bounds(double p, double Q, double d) {
  if (!(Q > 1.0) || !std::isfinite(Q)) throw InvalidInput("quasisymmetric bounds need Q > 1");
  if (!(p > Q) || !std::isfinite(p)) throw InvalidInput("quasisymmetric bounds need p > Q");
  if (!(d > 0.0 && d < Q)) throw InvalidInput("quasisymmetric bounds need 0 < d < Q");
  QsBounds b;
  b.lower = (p - Q) * d / (p - d);
  b.upper = sobolev_bound(p, Q, d);
  if (!(b.lower > 0.0 && b.lower <= b.upper)) throw InvalidInput("quasisymmetric bounds out of order");
  return b;
}

// Largest k >= k_E with delta^((k+1) d/D) < r <= delta^(k d/D).
inline int compute_k_r(double delta, double d, double D, double r, int k_E = 0) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in (0,1)");
  if (!(d > 0.0) || !(D > 0.0)) throw InvalidInput("dimensions d and D must be positive");
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("scale r must be finite and positive");
  auto level_scale = [&](double k) { return std::pow(delta, k * d / D); };
  if (r > level_scale(static_cast<double>(k_E)))
    throw ScaleOutOfRange("scale r = " + std::to_string(r) + " exceeds the level-" + std::to_string(k_E) + " bound");
  double guess = std::floor(std::log(r) / ((d / D) * std::log(delta)));
  int k = static_cast<int>(std::max(guess, static_cast<double>(k_E)));
  while (k > k_E && level_scale(k) < r) --k;
  while (level_scale(k + 1.0) >= r) ++k;
  return k;
}

struct MinorCube {
  int level = 0;
  std::size_t cube = 0;
};

struct MajorMinorTrace {
  double r = 0.0;
  int k_r = 0;
  std::vector<std::size_t> M;  // M[j] counts major cubes at level k_r + j
  std::size_t total_major = 0;
  std::size_t cover_size_for_fE = 0;
  std::vector<MinorCube> minor_cover;
};

class ResolutionExhausted : public std::runtime_error {
 public:
  ResolutionExhausted(const std::string& what, MajorMinorTrace partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const MajorMinorTrace& partial() const noexcept { return partial_; }

 private:
  MajorMinorTrace partial_;
};

// Start at level k_r with the cubes meeting E; a cube is major when its
// image has diameter >= r. Major cubes are replaced by their children
// meeting E until only minor cubes remain.
inline MajorMinorTrace classify_major_minor(const DyadicSystem& system, const SampledMap& map,
                                            std::span<const PointId> subset, double r, double d, double D,
                                            int k_E = 0) {
  PointSet set = normalized(PointSet(subset.begin(), subset.end()));
  require_subset(map.source, set);
  if (system.sample_size != map.source.size()) throw InvalidInput("cube system was built over a different sample");
  MajorMinorTrace trace;
  trace.r = r;
  trace.k_r = compute_k_r(system.params.delta, d, D, r, k_E);
  if (trace.k_r > system.k_max())
    throw ResolutionExhausted("starting level " + std::to_string(trace.k_r) + " is beyond k_max", trace);

  std::vector<char> in_set(map.source.size(), 0);
  for (PointId p : set) in_set[p] = 1;
  auto meets_set = [&](const Cube& c) {
    return std::any_of(c.members.begin(), c.members.end(), [&](PointId p) { return in_set[p] != 0; });
  };

  std::vector<std::size_t> current;
  const DyadicLevel& start = system.level(trace.k_r);
  for (std::size_t i = 0; i < start.cubes.size(); ++i)
    if (meets_set(start.cubes[i])) current.push_back(i);

  for (int k = trace.k_r;; ++k) {
    const DyadicLevel& lvl = system.level(k);
    std::vector<std::size_t> major;
    for (std::size_t i : current) {
      PointSet img = map.image(lvl.cubes[i].members);
      if (diameter(map.target, img) >= r) {
        major.push_back(i);
      } else {
        trace.minor_cover.push_back({k, i});
      }
    }
    trace.M.push_back(major.size());
    trace.total_major += major.size();
    trace.cover_size_for_fE = trace.minor_cover.size();
    if (major.empty()) break;
    if (k == system.k_max())
      throw ResolutionExhausted(std::to_string(major.size()) + " major cubes remain at k_max = " + std::to_string(k),
                                trace);
    current.clear();
    const DyadicLevel& next = system.level(k + 1);
    for (std::size_t i : major)
      for (std::size_t c : lvl.cubes[i].children)
        if (meets_set(next.cubes[c])) current.push_back(c);
    std::sort(current.begin(), current.end());
  }
  return trace;
}

enum class BoundKind { ch, sobolev, qs };

inline const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::ch: return "ch";
    case BoundKind::sobolev: return "sobolev";
    case BoundKind::qs: return "qs";
  }
  return "?";
}

inline BoundKind parse_bound_kind(const std::string& s) {
  if (s == "ch") return BoundKind::ch;
  if (s == "sobolev") return BoundKind::sobolev;
  if (s == "qs") return BoundKind::qs;
  throw InvalidInput("unknown bound kind '" + s + "' (expected ch, sobolev or qs)");
}

struct BoundInputs {
  BoundKind kind = BoundKind::ch;
  double p = 2.0;
  double alpha = 0.5;
  double Q = 1.0;
  std::optional<double> d;  // defaults to the estimated source dimension
};

struct DistortionOptions {
  CubeParams cubes;
  CertifyOptions certify;
  CoverDimensionOptions dimension;
  double margin_tolerance = 0.05;
  std::size_t trace_scales = 8;
  int k_E = 0;
};

struct DecayFit {
  double slope = 0.0;
  std::size_t points = 0;
};

struct DistortionReport {
  std::string schema = "distortion/1";
  DimensionRun source;
  DimensionRun image;
  BoundKind bound_kind = BoundKind::ch;
  double d_used = 0.0;
  std::optional<double> bound_value;
  std::optional<double> lower_bound;  // qs only
  std::optional<double> margin;       // bound_value - image slope
  bool within_tolerance = false;
  bool hypothesis_violation = false;
  std::optional<HolderCertificate> certificate;
  std::vector<MajorMinorTrace> trace;
  std::optional<DecayFit> major_decay;
  std::vector<std::string> notes;
};

// Slope of log(total_major) against -k_r log(delta) over traces with at
// least one major cube; needs two distinct starting levels.
inline std::optional<DecayFit> major_decay_slope(std::span<const MajorMinorTrace> traces, double delta) {
  std::vector<double> x, y;
  for (const auto& t : traces) {
    if (t.total_major == 0) continue;
    x.push_back(-static_cast<double>(t.k_r) * std::log(delta));
    y.push_back(std::log(static_cast<double>(t.total_major)));
  }
  if (x.size() < 2 || std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) return std::nullopt;
  DecayFit fit;
  fit.slope = least_squares(x, y).slope;
  fit.points = x.size();
  return fit;
}

inline DistortionReport run_distortion_experiment(const SampledMap& map, std::span<const PointId> subset,
                                                  const BoundInputs& inputs, const DistortionOptions& opt = {}) {
  opt.cubes.validate();
  PointSet set = normalized(PointSet(subset.begin(), subset.end()));
  require_subset(map.source, set);
  if (set.size() < 2) throw InvalidInput("distortion experiment needs at least two points in E");
  DistortionReport rep;
  rep.bound_kind = inputs.kind;

  rep.source = dimension_from_covers(map.source, set, opt.dimension);
  PointSet image = map.image(set);
  if (image.size() < 2) {
    rep.image.estimate.count_source = "covers";
    rep.image.estimate.notes = "image is a single point";
    rep.notes.push_back("image of E is a single point; image dimension 0");
  } else {
    rep.image = dimension_from_covers(map.target, image, opt.dimension);
  }
  rep.d_used = inputs.d.value_or(rep.source.estimate.slope);

  if (inputs.kind == BoundKind::ch) {
    rep.certificate = certify_compactly_holder(map, set, inputs.p, inputs.alpha, opt.certify);
    if (rep.certificate->verdict != Verdict::bounded)
      rep.notes.push_back(std::string("certificate verdict is ") + to_string(rep.certificate->verdict) +
                          "; the bound is evaluated without a certified hypothesis");
    rep.bound_value = ch_bound(inputs.p, inputs.alpha, rep.d_used);
  } else if (rep.d_used >= inputs.Q) {
    rep.hypothesis_violation = true;
    rep.notes.push_back("estimated source dimension " + std::to_string(rep.d_used) + " is not below Q = " +
                        std::to_string(inputs.Q));
  } else if (inputs.kind == BoundKind::sobolev) {
    rep.bound_value = sobolev_bound(inputs.p, inputs.Q, rep.d_used);
  } else {
    QsBounds b = qs_bounds(inputs.p, inputs.Q, rep.d_used);
    rep.bound_value = b.upper;
    rep.lower_bound = b.lower;
  }

  if (rep.bound_value) {
    rep.margin = *rep.bound_value - rep.image.estimate.slope;
    rep.within_tolerance = *rep.margin >= -opt.margin_tolerance;
  }

  if (rep.bound_value && *rep.bound_value > 0.0 && rep.d_used > 0.0 && image.size() >= 2) {
    DyadicSystem system = build_system(map.source, opt.cubes);
    double r0 = diameter(map.target, image);
    double floor = opt.dimension.floor_factor * min_gap(map.target, image);
    for (std::size_t j = 1; j <= opt.trace_scales; ++j) {
      double r = r0 * std::pow(0.5, static_cast<double>(j));
      if (r <= floor) break;
      try {
        rep.trace.push_back(classify_major_minor(system, map, set, r, rep.d_used, *rep.bound_value, opt.k_E));
      } catch (const ScaleOutOfRange& e) {
        rep.notes.push_back(std::string("trace skipped: ") + e.what());
      }
    }
    rep.major_decay = major_decay_slope(rep.trace, opt.cubes.delta);
  }
  return rep;
}

}  // namespace fractal_lab
