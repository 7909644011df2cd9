#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fractal_lab/error.hpp"
#include "fractal_lab/metric_core.hpp"
#include "fractal_lab/parallel.hpp"
#include "fractal_lab/regression.hpp"
#include "fractal_lab/space_sample.hpp"

namespace fractal_lab {

// f: source -> target on the sampled points; assignment[p] is the image
// of source point p in the target sample.
struct SampledMap {
  SpaceSample source;
  SpaceSample target;
  std::vector<PointId> assignment;
  std::string label;

  SampledMap() = default;
  SampledMap(SpaceSample src, SpaceSample tgt, std::vector<PointId> assign, std::string name = {})
      : source(std::move(src)), target(std::move(tgt)), assignment(std::move(assign)), label(std::move(name)) {
    if (assignment.size() != source.size()) throw InvalidInput("map must assign an image to every source point");
    for (PointId q : assignment)
      if (!target.contains(q)) throw InvalidInput("map image " + std::to_string(q) + " is not a target point");
  }

  PointId operator()(PointId p) const { return assignment[p]; }

  double image_distance(PointId a, PointId b) const {
    PointId fa = assignment[a], fb = assignment[b];
    return fa == fb ? 0.0 : target.distance(fa, fb);
  }

  PointSet image(std::span<const PointId> set) const {
    PointSet out;
    out.reserve(set.size());
    for (PointId p : set) out.push_back(assignment[p]);
    return normalized(std::move(out));
  }

  bool injective() const {
    std::vector<PointId> seen(assignment);
    std::sort(seen.begin(), seen.end());
    return std::adjacent_find(seen.begin(), seen.end()) == seen.end();
  }
};

inline void require_holder_exponent(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("Holder exponent alpha must lie in (0,1)");
}

// sup over distinct sampled pairs of the ball of d_Y(f x, f y) / d_X(x, y)^alpha.
inline double holder_coefficient(const SampledMap& map, std::span<const PointId> members, double alpha) {
  require_holder_exponent(alpha);
  if (members.empty()) throw InvalidInput("ball contains no sample points");
  double best = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      double num = map.image_distance(members[i], members[j]);
      if (num == 0.0) continue;
      double den = map.source.distance(members[i], members[j]);
      best = std::max(best, num / std::pow(den, alpha));
    }
  }
  return best;
}

inline double holder_coefficient(const SampledMap& map, const Ball& ball, double alpha) {
  require_point(map.source, ball.center);
  PointSet members = map.source.points_within(ball.center, ball.radius);
  return holder_coefficient(map, members, alpha);
}

// diam f(B) / (diam B)^alpha on the sampled content of the ball.
inline double diam_ratio_coefficient(const SampledMap& map, std::span<const PointId> members, double alpha) {
  require_holder_exponent(alpha);
  if (members.size() < 2) throw InvalidInput("diameter ratio needs at least two points in the ball");
  double dx = diameter(map.source, members);
  PointSet img = map.image(members);
  double dy = diameter(map.target, img);
  return dy / std::pow(dx, alpha);
}

inline double diam_ratio_coefficient(const SampledMap& map, const Ball& ball, double alpha) {
  require_point(map.source, ball.center);
  PointSet members = map.source.points_within(ball.center, ball.radius);
  return diam_ratio_coefficient(map, members, alpha);
}

class InfeasibleCover : public std::runtime_error {
 public:
  InfeasibleCover(const std::string& what, double r, double epsilon)
      : std::runtime_error(what), radius_(r), epsilon_(epsilon) {}
  double radius() const noexcept { return radius_; }
  double epsilon() const noexcept { return epsilon_; }

 private:
  double radius_;
  double epsilon_;
};

struct SeparatedCover {
  double radius = 0.0;
  double epsilon = 0.0;
  std::vector<Ball> balls;
  bool thinned = false;  // separation had to be raised to 2 epsilon r
};

namespace detail {

// Two eps*r cores share a sample point?
inline bool cores_overlap(const SpaceSample& space, std::span<const PointId> centers, double core) {
  std::vector<char> hit(space.size(), 0);
  for (PointId c : centers) {
    bool clash = false;
    space.for_each_within(c, core, false, [&](PointId q) {
      if (hit[q]) clash = true;
      hit[q] = 1;
    });
    if (clash) return true;
  }
  return false;
}

}  // namespace detail

// Balls B(x_i, r) centred at points of E covering E, with eps*r cores
// pairwise disjoint on the sample.
inline SeparatedCover build_separated_cover(const SpaceSample& space, std::span<const PointId> subset, double r,
                                            double epsilon) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("cover radius must be finite and positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("epsilon must lie in (0,1)");
  PointSet set = normalized(PointSet(subset.begin(), subset.end()));
  require_subset(space, set);
  if (set.empty()) throw InvalidInput("cannot cover an empty set");
  SeparatedCover cover;
  cover.radius = r;
  cover.epsilon = epsilon;
  FarthestFirst ff = farthest_first(space, set, set.front(), r, 0.0);
  if (detail::cores_overlap(space, ff.centers, epsilon * r)) {
    ff = farthest_first(space, set, set.front(), r, 2.0 * epsilon * r);
    cover.thinned = true;
    if (!ff.complete)
      throw InfeasibleCover("no E-centred cover at r = " + std::to_string(r) + " with disjoint cores for epsilon = " +
                                std::to_string(epsilon),
                            r, epsilon);
  }
  std::vector<PointId> centers = ff.centers;
  std::sort(centers.begin(), centers.end());
  for (PointId c : centers) cover.balls.emplace_back(c, r);
  return cover;
}

// Sum of c^p, accumulated from the largest coefficient down.
inline double p_sum(std::span<const double> coefficients, double p) {
  if (!(p > 1.0)) throw InvalidInput("summability exponent p must exceed 1");
  std::vector<double> c(coefficients.begin(), coefficients.end());
  for (double v : c)
    if (!(v >= 0.0)) throw InvalidInput("coefficients must be nonnegative");
  std::sort(c.begin(), c.end(), std::greater<>());
  double total = 0.0;
  for (double v : c) total += std::pow(v, p);
  return total;
}

enum class Verdict { bounded, diverging, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::bounded: return "bounded";
    case Verdict::diverging: return "diverging";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct CertifyOptions {
  double epsilon = 0.4;
  std::vector<double> schedule;  // empty: diam E / 4 halved down to the floor
  double floor_factor = 5.0;     // radii at or below floor_factor * min gap are skipped
  std::size_t min_radii = 3;
  double bounded_tail_growth = 0.1;
  double diverging_growth = 0.25;
  double diverging_residual = 0.35;
};

struct EvidenceRow {
  double r = 0.0;
  std::size_t ball_count = 0;
  double p_sum_strong = 0.0;
  double p_sum_weak = 0.0;
  double max_coefficient = 0.0;
  bool skipped = false;
  std::string note;
};

struct HolderCertificate {
  double p = 0.0;
  double alpha = 0.0;
  double epsilon = 0.0;
  std::vector<double> schedule;
  std::vector<double> p_sums;  // strong form, schedule order; skipped radii carry 0
  std::vector<EvidenceRow> evidence;
  Verdict verdict = Verdict::inconclusive;
  double growth_exponent = 0.0;  // slope of log p_sum against log(1/r), all usable radii
  double tail_growth = 0.0;
  double residual = 0.0;
  double C_E_estimate = 0.0;
  std::string notes;
};

inline std::vector<double> default_holder_schedule(const SpaceSample& space, std::span<const PointId> set,
                                                   double floor_factor = 5.0) {
  double diam = diameter(space, set);
  double floor = floor_factor * min_gap(space, set);
  std::vector<double> out;
  for (double r = diam / 4.0; r > floor && out.size() < 64; r /= 2.0) out.push_back(r);
  return out;
}

inline HolderCertificate certify_compactly_holder(const SampledMap& map, std::span<const PointId> subset, double p,
                                                  double alpha, const CertifyOptions& opt = {}) {
  if (!(p > 1.0)) throw InvalidInput("summability exponent p must exceed 1");
  require_holder_exponent(alpha);
  if (!(opt.epsilon > 0.0 && opt.epsilon < 1.0)) throw InvalidInput("epsilon must lie in (0,1)");
  PointSet set = normalized(PointSet(subset.begin(), subset.end()));
  require_subset(map.source, set);
  if (set.size() < 2) throw InvalidInput("certification needs at least two points in E");
  std::vector<double> schedule = opt.schedule.empty() ? default_holder_schedule(map.source, set, opt.floor_factor)
                                                      : opt.schedule;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0) || !std::isfinite(schedule[i])) throw InvalidInput("schedule radii must be positive");
    if (i > 0 && !(schedule[i] < schedule[i - 1])) throw InvalidInput("schedule must be strictly decreasing");
  }
  double diam = diameter(map.source, set);
  double floor = opt.floor_factor * min_gap(map.source, set);

  HolderCertificate cert;
  cert.p = p;
  cert.alpha = alpha;
  cert.epsilon = opt.epsilon;
  cert.schedule = schedule;
  cert.evidence.resize(schedule.size());
  parallel_for(schedule.size(), [&](std::size_t i) {
    EvidenceRow& row = cert.evidence[i];
    row.r = schedule[i];
    if (!(row.r > floor && row.r < diam)) {
      row.skipped = true;
      row.note = "outside the resolvable window";
      return;
    }
    SeparatedCover cover;
    try {
      cover = build_separated_cover(map.source, set, row.r, opt.epsilon);
    } catch (const InfeasibleCover& e) {
      row.skipped = true;
      row.note = e.what();
      return;
    }
    std::vector<double> strong, weak;
    for (const Ball& b : cover.balls) {
      PointSet members = map.source.points_within(b.center, b.radius);
      strong.push_back(holder_coefficient(map, members, alpha));
      weak.push_back(members.size() < 2 ? 0.0 : diam_ratio_coefficient(map, members, alpha));
    }
    row.ball_count = cover.balls.size();
    row.p_sum_strong = p_sum(strong, p);
    row.p_sum_weak = p_sum(weak, p);
    row.max_coefficient = strong.empty() ? 0.0 : *std::max_element(strong.begin(), strong.end());
    if (cover.thinned) row.note = "separation raised to 2 epsilon r";
  });

  std::vector<double> log_inv_r, log_sum;
  std::size_t usable = 0, zero = 0;
  for (const EvidenceRow& row : cert.evidence) {
    cert.p_sums.push_back(row.p_sum_strong);
    if (row.skipped) continue;
    ++usable;
    cert.C_E_estimate = std::max(cert.C_E_estimate, row.p_sum_strong);
    if (row.p_sum_strong > 0.0) {
      log_inv_r.push_back(std::log(1.0 / row.r));
      log_sum.push_back(std::log(row.p_sum_strong));
    } else {
      ++zero;
    }
  }
  if (usable < opt.min_radii) {
    cert.verdict = Verdict::inconclusive;
    cert.notes = "fewer than " + std::to_string(opt.min_radii) + " usable radii";
    return cert;
  }
  if (zero == usable) {
    cert.verdict = Verdict::bounded;
    cert.notes = "all p-sums vanish";
    return cert;
  }
  if (log_inv_r.size() < opt.min_radii) {
    cert.verdict = Verdict::inconclusive;
    cert.notes = "too few radii with positive p-sum for a trend";
    return cert;
  }
  LineFit full = least_squares(log_inv_r, log_sum);
  std::size_t m = log_inv_r.size();
  std::size_t tail = std::min(m, std::max<std::size_t>(3, (m + 1) / 2));
  LineFit tail_fit = least_squares(std::span<const double>(log_inv_r).last(tail),
                                   std::span<const double>(log_sum).last(tail));
  cert.growth_exponent = full.slope;
  cert.tail_growth = tail_fit.slope;
  cert.residual = full.residual;
  if (tail_fit.slope <= opt.bounded_tail_growth) {
    cert.verdict = Verdict::bounded;
  } else if (full.slope >= opt.diverging_growth && full.residual <= opt.diverging_residual) {
    cert.verdict = Verdict::diverging;
  } else {
    cert.verdict = Verdict::inconclusive;
  }
  return cert;
}

struct EnvelopeBin {
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t samples = 0;
  double max_ratio = 0.0;  // within the bin
  double eta = 0.0;        // running max up to this bin
};

struct QuasisymmetryEstimate {
  std::vector<double> t;
  std::vector<double> ratio;
  std::vector<EnvelopeBin> envelope;
  double eta_at_1 = 0.0;          // sup of ratio over t <= 1
  double inverse_eta_at_1 = 0.0;  // sup of t over ratio <= 1
  std::size_t triples = 0;
};

// Random distinct triples (x, y, z) with t = |x-y|/|z-y| and
// ratio = |fx-fy|/|fz-fy|. The envelope is the binned max over 32
// logarithmic bins, made monotone by a running max.
inline QuasisymmetryEstimate estimate_quasisymmetry_modulus(const SampledMap& map, std::size_t triples,
                                                            std::uint64_t seed = 0, std::size_t bins = 32) {
  if (triples < 100) throw InvalidInput("quasisymmetry estimate needs at least 100 triples");
  if (map.source.size() < 3) throw InvalidInput("quasisymmetry estimate needs at least three points");
  if (!map.injective()) throw InvalidInput("map is not injective on the sample");
  if (bins == 0) throw InvalidInput("bin count must be positive");
  QuasisymmetryEstimate est;
  est.triples = triples;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<PointId> pick(0, map.source.size() - 1);
  for (std::size_t s = 0; s < triples; ++s) {
    PointId x, y, z;
    do {
      x = pick(rng);
      y = pick(rng);
      z = pick(rng);
    } while (x == y || y == z || x == z);
    double t = map.source.distance(x, y) / map.source.distance(z, y);
    double ratio = map.image_distance(x, y) / map.image_distance(z, y);
    est.t.push_back(t);
    est.ratio.push_back(ratio);
    if (t <= 1.0) est.eta_at_1 = std::max(est.eta_at_1, ratio);
    if (ratio <= 1.0) est.inverse_eta_at_1 = std::max(est.inverse_eta_at_1, t);
  }
  auto [tmin, tmax] = std::minmax_element(est.t.begin(), est.t.end());
  double lo = std::log(*tmin), hi = std::log(*tmax);
  double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  est.envelope.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    est.envelope[b].t_lo = std::exp(lo + width * static_cast<double>(b));
    est.envelope[b].t_hi = std::exp(lo + width * static_cast<double>(b + 1));
  }
  for (std::size_t i = 0; i < est.t.size(); ++i) {
    auto b = static_cast<std::size_t>((std::log(est.t[i]) - lo) / width);
    b = std::min(b, bins - 1);
    est.envelope[b].samples++;
    est.envelope[b].max_ratio = std::max(est.envelope[b].max_ratio, est.ratio[i]);
  }
  double running = 0.0;
  for (auto& bin : est.envelope) {
    running = std::max(running, bin.max_ratio);
    bin.eta = running;
  }
  return est;
}

}  // namespace fractal_lab
