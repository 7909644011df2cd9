#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fractal_lab/error.hpp"
#include "fractal_lab/regression.hpp"
#include "fractal_lab/space_sample.hpp"

namespace fractal_lab {

inline void require_point(const SpaceSample& space, PointId p) {
  if (!space.contains(p)) throw InvalidInput("unknown point identifier " + std::to_string(p));
}

inline PointSet normalized(PointSet set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return set;
}

inline void require_subset(const SpaceSample& space, std::span<const PointId> set) {
  for (PointId p : set) require_point(space, p);
}

// Sample points strictly inside the ball, sorted by id.
inline PointSet ball_points(const SpaceSample& space, const Ball& ball) {
  require_point(space, ball.center);
  return space.points_within(ball.center, ball.radius);
}

inline double ball_mass(const SpaceSample& space, const Ball& ball) {
  require_point(space, ball.center);
  double mass = 0.0;
  space.for_each_within(ball.center, ball.radius, false, [&](PointId q) { mass += space.weight(q); });
  return mass;
}

namespace detail {

inline std::vector<PointId> convex_hull_2d(const SpaceSample& space, std::span<const PointId> set) {
  std::vector<PointId> pts(set.begin(), set.end());
  auto at = [&](PointId p) { return space.coordinates(p); };
  std::sort(pts.begin(), pts.end(), [&](PointId a, PointId b) {
    auto x = at(a), y = at(b);
    return x[0] < y[0] || (x[0] == y[0] && x[1] < y[1]);
  });
  if (pts.size() < 3) return pts;
  auto cross = [&](PointId o, PointId a, PointId b) {
    auto po = at(o), pa = at(a), pb = at(b);
    return (pa[0] - po[0]) * (pb[1] - po[1]) - (pa[1] - po[1]) * (pb[0] - po[0]);
  };
  std::vector<PointId> hull(2 * pts.size());
  std::size_t k = 0;
  for (PointId p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    PointId p = pts[i];
    while (k >= t && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace detail

// Largest pairwise distance within the subset (0 for fewer than two points).
inline double diameter(const SpaceSample& space, std::span<const PointId> set) {
  if (set.size() < 2) return 0.0;
  if (space.has_coordinates() && space.dim() == 1) {
    auto [lo, hi] = std::minmax_element(set.begin(), set.end(), [&](PointId a, PointId b) {
      return space.coordinates(a)[0] < space.coordinates(b)[0];
    });
    return space.distance(*lo, *hi);
  }
  std::vector<PointId> candidates;
  if (space.has_coordinates() && space.dim() == 2 && set.size() > 64) {
    candidates = detail::convex_hull_2d(space, set);
  } else {
    candidates.assign(set.begin(), set.end());
  }
  double best = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    for (std::size_t j = i + 1; j < candidates.size(); ++j)
      best = std::max(best, space.distance(candidates[i], candidates[j]));
  return best;
}

inline double diameter(const SpaceSample& space) {
  PointSet all = space.all_points();
  return diameter(space, all);
}

// Smallest distance between distinct points of the subset (+inf when the
// subset has fewer than two points).
inline double min_gap(const SpaceSample& space, std::span<const PointId> set) {
  double best = std::numeric_limits<double>::infinity();
  if (set.size() < 2) return best;
  if (!space.has_coordinates()) {
    for (std::size_t i = 0; i < set.size(); ++i)
      for (std::size_t j = i + 1; j < set.size(); ++j) best = std::min(best, space.distance(set[i], set[j]));
    return best;
  }
  std::vector<PointId> order(set.begin(), set.end());
  auto key = [&](PointId p) { return space.coordinates(p)[0]; };
  std::sort(order.begin(), order.end(), [&](PointId a, PointId b) { return key(a) < key(b); });
  double best_base = std::numeric_limits<double>::infinity();
  PointId arg_a = order[0], arg_b = order[1];
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (key(order[j]) - key(order[i]) > best_base * (1.0 + 1e-9)) break;
      double d = space.base_distance(order[i], order[j]);
      if (d < best_base) {
        best_base = d;
        arg_a = order[i];
        arg_b = order[j];
      }
    }
  }
  return space.distance(arg_a, arg_b);
}

inline double min_gap(const SpaceSample& space) {
  PointSet all = space.all_points();
  return min_gap(space, all);
}

// Counts violated triangle inequalities. Exhaustive when n^3 <= budget,
// otherwise `budget` random triples drawn with the given seed.
inline std::size_t count_triangle_violations(const SpaceSample& space, std::size_t budget = 10000,
                                             std::uint64_t seed = 0) {
  std::size_t n = space.size();
  if (n < 3) return 0;
  std::size_t violations = 0;
  auto check = [&](PointId a, PointId b, PointId c) {
    double ab = space.distance(a, b), bc = space.distance(b, c), ac = space.distance(a, c);
    double slack = 1e-12 * std::max({ab, bc, ac});
    if (ac > ab + bc + slack || ab > ac + bc + slack || bc > ab + ac + slack) ++violations;
  };
  if (n <= 256 && n * n * n <= std::max<std::size_t>(budget, 1)) {
    for (PointId a = 0; a < n; ++a)
      for (PointId b = a + 1; b < n; ++b)
        for (PointId c = b + 1; c < n; ++c) check(a, b, c);
    return violations;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<PointId> pick(0, n - 1);
  for (std::size_t t = 0; t < budget; ++t) check(pick(rng), pick(rng), pick(rng));
  return violations;
}

// Greedy farthest-point traversal over `domain`, starting from `seed`.
// Each step adds the domain point farthest from the chosen centers (ties to
// the lowest id). The traversal ends when that distance drops below
// `cover_radius` (the centers then cover the domain with open balls of
// that radius) or below `min_separation` (a further center would violate
// the requested separation; `complete` is false in that case).
struct FarthestFirst {
  std::vector<PointId> centers;            // selection order
  std::vector<double> nearest_distance;    // per sample point, +inf outside domain
  std::vector<std::size_t> nearest_center; // index into centers
  double final_gap = 0.0;                  // largest remaining nearest distance
  bool complete = true;
};

inline FarthestFirst farthest_first(const SpaceSample& space, std::span<const PointId> domain, PointId seed,
                                    double cover_radius, double min_separation) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  FarthestFirst out;
  std::size_t n = space.size();
  out.nearest_distance.assign(n, inf);
  out.nearest_center.assign(n, 0);
  if (domain.empty()) return out;
  std::vector<char> in_domain(n, 0);
  for (PointId p : domain) in_domain[p] = 1;

  // Max-heap on (distance, -id) with lazy invalidation.
  struct Entry {
    double dist;
    PointId id;
    bool operator<(const Entry& o) const { return dist < o.dist || (dist == o.dist && id > o.id); }
  };
  std::priority_queue<Entry> heap;

  auto add_center = [&](PointId c, double reach) {
    std::size_t idx = out.centers.size();
    out.centers.push_back(c);
    space.for_each_within(c, reach, false, [&](PointId q) {
      if (!in_domain[q]) return;
      double d = space.distance(c, q);
      if (d < out.nearest_distance[q]) {
        out.nearest_distance[q] = d;
        out.nearest_center[q] = idx;
        heap.push({d, q});
      }
    });
  };

  add_center(seed, inf);
  while (!heap.empty()) {
    Entry top = heap.top();
    if (top.dist != out.nearest_distance[top.id]) {
      heap.pop();
      continue;
    }
    out.final_gap = top.dist;
    if (top.dist < cover_radius) return out;
    if (top.dist < min_separation) {
      out.complete = false;
      return out;
    }
    heap.pop();
    add_center(top.id, top.dist);
  }
  out.final_gap = 0.0;
  return out;
}

struct DoublingEstimate {
  double constant = 1.0;
  std::vector<double> scales_tested;
  std::size_t max_cover_count = 1;
  PointId witness_center = 0;
  double witness_scale = 0.0;
};

// Greedy covers of B(x, 2r) by r-balls centred at sample points, for every
// tested (x, r). The largest count witnesses a doubling constant of the
// sample.
inline DoublingEstimate estimate_doubling_constant(const SpaceSample& space, std::span<const double> scales,
                                                   std::span<const PointId> centers) {
  if (scales.empty()) throw InvalidInput("doubling estimate needs at least one scale");
  if (centers.empty()) throw InvalidInput("doubling estimate needs at least one center");
  for (double r : scales)
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("scales must be finite and positive");
  require_subset(space, centers);
  DoublingEstimate est;
  est.scales_tested.assign(scales.begin(), scales.end());
  for (double r : scales) {
    for (PointId x : centers) {
      PointSet big = space.points_within(x, 2.0 * r);
      FarthestFirst cover = farthest_first(space, big, x, r, 0.0);
      if (cover.centers.size() > est.max_cover_count) {
        est.max_cover_count = cover.centers.size();
        est.witness_center = x;
        est.witness_scale = r;
      }
    }
  }
  est.constant = std::max<double>(1.0, static_cast<double>(est.max_cover_count));
  return est;
}

struct ScalePair {
  double r1;
  double r2;
};

struct HomogeneityViolation {
  PointId center;
  double r1;
  double r2;
  double value;
};

struct DegenerateScale {
  PointId center;
  double radius;
};

struct HomogeneityReport {
  double Q = 0.0;
  double worst_constant = 0.0;  // max of [mu(B(x,r2))/mu(B(x,r1))] (r1/r2)^Q
  double lower_constant = 0.0;  // max of r^Q / mu(B(x,r)) over tested balls
  std::size_t tested = 0;
  std::vector<HomogeneityViolation> violations;
  std::vector<DegenerateScale> degenerate;
};

// Ratio form of local Q-homogeneity plus the lower mass bound it implies.
// Balls with zero mass are reported as degenerate instead of failing.
inline HomogeneityReport check_homogeneity(const SpaceSample& space, double Q, std::span<const PointId> region,
                                           std::span<const ScalePair> scale_pairs,
                                           std::optional<double> threshold = std::nullopt) {
  if (!space.has_weights()) throw InvalidInput("homogeneity check needs a weighted sample");
  if (!(Q > 0.0)) throw InvalidInput("homogeneity exponent Q must be positive");
  require_subset(space, region);
  for (const auto& sp : scale_pairs)
    if (!(sp.r1 > 0.0 && sp.r1 < sp.r2)) throw InvalidInput("scale pairs must satisfy 0 < r1 < r2");
  HomogeneityReport rep;
  rep.Q = Q;
  for (PointId x : region) {
    for (const auto& sp : scale_pairs) {
      double m1 = ball_mass(space, Ball(x, sp.r1));
      double m2 = ball_mass(space, Ball(x, sp.r2));
      if (m2 > 0.0) rep.lower_constant = std::max(rep.lower_constant, std::pow(sp.r2, Q) / m2);
      if (!(m1 > 0.0)) {
        rep.degenerate.push_back({x, sp.r1});
        continue;
      }
      rep.lower_constant = std::max(rep.lower_constant, std::pow(sp.r1, Q) / m1);
      double value = (m2 / m1) * std::pow(sp.r1 / sp.r2, Q);
      ++rep.tested;
      rep.worst_constant = std::max(rep.worst_constant, value);
      if (threshold && value > *threshold) rep.violations.push_back({x, sp.r1, sp.r2, value});
    }
  }
  return rep;
}

struct AhlforsReport {
  double Q = 0.0;
  double C_A_estimate = 1.0;     // smallest C >= 1 making both sides hold on tested balls
  double upper_constant = 0.0;   // max mu(B)/r^Q
  double lower_constant = 0.0;   // max r^Q/mu(B)
  double fitted_exponent = 0.0;  // slope of mean log mu(B(x,r)) against log r
  bool regular = false;          // |fitted_exponent - Q| <= exponent_tolerance
  std::string failing_side;      // "upper", "lower" or empty
  std::size_t tested = 0;
  std::vector<DegenerateScale> degenerate;
};

inline AhlforsReport check_ahlfors_regularity(const SpaceSample& space, double Q, std::span<const double> scales,
                                              std::span<const PointId> centers,
                                              double exponent_tolerance = 0.25) {
  if (!space.has_weights()) throw InvalidInput("Ahlfors check needs a weighted sample");
  if (!(Q > 0.0)) throw InvalidInput("Ahlfors exponent Q must be positive");
  if (scales.size() < 2) throw InvalidInput("Ahlfors check needs at least two scales");
  require_subset(space, centers);
  AhlforsReport rep;
  rep.Q = Q;
  std::vector<double> log_r, log_mass;
  for (double r : scales) {
    if (!(r > 0.0)) throw InvalidInput("scales must be positive");
    double acc = 0.0;
    std::size_t used = 0;
    for (PointId x : centers) {
      double m = ball_mass(space, Ball(x, r));
      if (!(m > 0.0)) {
        rep.degenerate.push_back({x, r});
        continue;
      }
      double rq = std::pow(r, Q);
      rep.upper_constant = std::max(rep.upper_constant, m / rq);
      rep.lower_constant = std::max(rep.lower_constant, rq / m);
      acc += std::log(m);
      ++used;
      ++rep.tested;
    }
    if (used > 0) {
      log_r.push_back(std::log(r));
      log_mass.push_back(acc / static_cast<double>(used));
    }
  }
  rep.C_A_estimate = std::max({1.0, rep.upper_constant, rep.lower_constant});
  if (log_r.size() >= 2) {
    rep.fitted_exponent = least_squares(log_r, log_mass).slope;
    rep.regular = std::abs(rep.fitted_exponent - Q) <= exponent_tolerance;
  }
  if (!rep.regular) rep.failing_side = rep.upper_constant >= rep.lower_constant ? "upper" : "lower";
  return rep;
}

}  // namespace fractal_lab
