#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fractal_lab/dyadic_cubes.hpp"
#include "fractal_lab/error.hpp"
#include "fractal_lab/metric_core.hpp"
#include "fractal_lab/parallel.hpp"
#include "fractal_lab/regression.hpp"
#include "fractal_lab/space_sample.hpp"

namespace fractal_lab {

// Bracket lower <= N(E, r) <= upper for the minimal number of
// diameter-<=r sets covering E.
struct CoverReport {
  double scale = 0.0;
  std::size_t lower = 0;
  std::size_t upper = 0;
  std::size_t cluster_upper = 0;
  std::optional<std::size_t> cell_upper;  // absent when the cell cover is unavailable
};

// Greedy cover of E by sets of diameter <= r: seed at the lowest uncovered
// id, then absorb uncovered points in order of distance from the seed
// while the diameter stays within r.
inline std::vector<PointSet> greedy_diameter_cover(const SpaceSample& space, std::span<const PointId> subset,
                                                   double r) {
  if (!(r > 0.0)) throw InvalidInput("cover scale must be positive");
  PointSet set = normalized(PointSet(subset.begin(), subset.end()));
  require_subset(space, set);
  std::vector<PointSet> cover;
  if (set.empty()) return cover;
  if (diameter(space, set) <= r) {
    cover.push_back(set);
    return cover;
  }
  std::vector<char> open(space.size(), 0);
  for (PointId p : set) open[p] = 1;
  const bool line = space.has_coordinates() && space.dim() == 1;
  const bool plane = space.has_coordinates() && space.dim() == 2;
  std::vector<std::pair<double, PointId>> candidates;
  for (PointId seed : set) {
    if (!open[seed]) continue;
    candidates.clear();
    space.for_each_within(seed, r, true, [&](PointId q) {
      if (open[q] && q != seed) candidates.emplace_back(space.distance(seed, q), q);
    });
    std::sort(candidates.begin(), candidates.end());
    PointSet members{seed};
    open[seed] = 0;
    // The farthest member from any point is an extreme point, so only the
    // extremes (line) or hull vertices (plane) need checking.
    std::vector<PointId> extremes{seed};
    for (const auto& [dist, q] : candidates) {
      const std::vector<PointId>& probe = (line || plane) ? extremes : members;
      bool fits = std::all_of(probe.begin(), probe.end(), [&](PointId m) { return space.distance(q, m) <= r; });
      if (!fits) continue;
      members.push_back(q);
      open[q] = 0;
      if (line) {
        auto [lo, hi] = std::minmax_element(extremes.begin(), extremes.end(), [&](PointId a, PointId b) {
          return space.coordinates(a)[0] < space.coordinates(b)[0];
        });
        PointId l = *lo, h = *hi;
        if (space.coordinates(q)[0] < space.coordinates(l)[0]) l = q;
        if (space.coordinates(q)[0] > space.coordinates(h)[0]) h = q;
        extremes = l == h ? std::vector<PointId>{l} : std::vector<PointId>{l, h};
      } else if (plane) {
        extremes.push_back(q);
        extremes = detail::convex_hull_2d(space, extremes);
      }
    }
    std::sort(members.begin(), members.end());
    cover.push_back(std::move(members));
  }
  return cover;
}

// Cover by half-open axis-aligned cells of side r / sqrt(dim) (in the base
// metric) anchored at the bounding-box corner. Returned only when every
// cell has diameter <= r.
inline std::optional<std::vector<PointSet>> cell_cover(const SpaceSample& space, std::span<const PointId> subset,
                                                       double r) {
  if (!(r > 0.0)) throw InvalidInput("cover scale must be positive");
  if (!space.has_coordinates()) return std::nullopt;
  PointSet set = normalized(PointSet(subset.begin(), subset.end()));
  require_subset(space, set);
  std::vector<PointSet> cover;
  if (set.empty()) return cover;
  const std::size_t dim = space.dim();
  double base_r = space.exponent() == 1.0 ? r : std::pow(r, 1.0 / space.exponent());
  double side = base_r / std::sqrt(static_cast<double>(dim));
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  for (PointId p : set)
    for (std::size_t d = 0; d < dim; ++d) lo[d] = std::min(lo[d], space.coordinates(p)[d]);
  std::vector<std::int64_t> keys(set.size() * dim);
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto x = space.coordinates(set[i]);
    for (std::size_t d = 0; d < dim; ++d) {
      double cell = std::floor((x[d] - lo[d]) / side);
      if (!(cell < 1e15)) return std::nullopt;
      keys[i * dim + d] = static_cast<std::int64_t>(cell);
    }
  }
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto key = [&](std::size_t i) { return keys.begin() + static_cast<std::ptrdiff_t>(i * dim); };
  auto key_end = [&](std::size_t i) { return key(i) + static_cast<std::ptrdiff_t>(dim); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(key(a), key_end(a), key(b), key_end(b));
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i == 0 || !std::equal(key(order[i - 1]), key_end(order[i - 1]), key(order[i]))) cover.emplace_back();
    cover.back().push_back(set[order[i]]);
  }
  for (auto& cell : cover) {
    std::sort(cell.begin(), cell.end());
    if (diameter(space, cell) > r) return std::nullopt;
  }
  return cover;
}

// Greedy maximal subset with pairwise distances > r, scanned in id order.
// No set of diameter <= r contains two of its points.
inline PointSet greedy_packing(const SpaceSample& space, std::span<const PointId> subset, double r) {
  if (!(r > 0.0)) throw InvalidInput("packing scale must be positive");
  PointSet set = normalized(PointSet(subset.begin(), subset.end()));
  require_subset(space, set);
  PointSet packing;
  if (!space.has_coordinates()) {
    for (PointId p : set)
      if (std::all_of(packing.begin(), packing.end(), [&](PointId q) { return space.distance(p, q) > r; }))
        packing.push_back(p);
    return packing;
  }
  // Chosen points keyed by first coordinate; only a window can conflict.
  std::multimap<double, PointId> chosen;
  double reach = space.sweep_reach(r);
  for (PointId p : set) {
    double x = space.coordinates(p)[0];
    bool free = true;
    for (auto it = chosen.lower_bound(x - reach); it != chosen.end() && it->first <= x + reach; ++it) {
      if (space.distance(p, it->second) <= r) {
        free = false;
        break;
      }
    }
    if (free) {
      chosen.emplace(x, p);
      packing.push_back(p);
    }
  }
  return packing;
}

inline CoverReport covering_number_bounds(const SpaceSample& space, std::span<const PointId> subset, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("cover scale must be finite and positive");
  CoverReport rep;
  rep.scale = r;
  rep.cluster_upper = greedy_diameter_cover(space, subset, r).size();
  rep.upper = rep.cluster_upper;
  if (auto cells = cell_cover(space, subset, r)) {
    rep.cell_upper = cells->size();
    rep.upper = std::min(rep.upper, cells->size());
  }
  rep.lower = greedy_packing(space, subset, r).size();
  return rep;
}

inline std::vector<CoverReport> cover_counts(const SpaceSample& space, std::span<const PointId> subset,
                                             std::span<const double> scales) {
  std::vector<CoverReport> out(scales.size());
  parallel_for(scales.size(), [&](std::size_t i) { out[i] = covering_number_bounds(space, subset, scales[i]); });
  return out;
}

struct ScaleCount {
  double scale = 0.0;
  double count = 0.0;
};

// Scales with index < k_E exceed diam E. The `discard_coarsest` coarsest
// scales (those above diam E included) are dropped for boundary effects and
// scales below `min_scale` for sample saturation.
struct FitPolicy {
  std::size_t discard_coarsest = 2;
  double min_scale = 0.0;
  std::optional<double> set_diameter;
  std::string count_source = "covers";
};

struct FitWindow {
  int k_E = 0;
  std::size_t first = 0;  // indices into the count sequence, inclusive
  std::size_t last = 0;
  double scale_max = 0.0;
  double scale_min = 0.0;
  std::size_t scales = 0;
};

struct DimensionEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  FitWindow fit_window;
  double residual = 0.0;
  std::string count_source = "covers";
  std::string notes;
};

// Least-squares slope of log(count) against log(1/scale) on the fit window.
inline DimensionEstimate estimate_dim_box(std::span<const ScaleCount> counts, const FitPolicy& policy = {}) {
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!(counts[i].scale > 0.0) || !std::isfinite(counts[i].scale)) throw InvalidInput("scales must be positive");
    if (!(counts[i].count > 0.0)) throw InvalidInput("counts must be positive");
    if (i > 0 && !(counts[i].scale < counts[i - 1].scale))
      throw InvalidInput("scales must be strictly decreasing");
  }
  FitWindow win;
  std::size_t start = 0;
  if (policy.set_diameter) {
    while (start < counts.size() && counts[start].scale > *policy.set_diameter) ++start;
  }
  win.k_E = static_cast<int>(start);
  start = std::max(start, policy.discard_coarsest);
  std::size_t stop = start;
  while (stop < counts.size() && counts[stop].scale >= policy.min_scale) ++stop;
  if (stop < start + 3 || start >= counts.size())
    throw InvalidInput("fewer than 3 usable scales in the fit window");
  win.first = start;
  win.last = stop - 1;
  win.scales = stop - start;
  win.scale_max = counts[start].scale;
  win.scale_min = counts[stop - 1].scale;

  std::vector<double> x, y;
  for (std::size_t i = start; i < stop; ++i) {
    x.push_back(std::log(1.0 / counts[i].scale));
    y.push_back(std::log(counts[i].count));
  }
  LineFit fit = least_squares(x, y);
  DimensionEstimate est;
  est.fit_window = win;
  est.intercept = fit.intercept;
  est.residual = fit.residual;
  est.count_source = policy.count_source;
  est.slope = fit.slope;
  if (est.slope < 0.0) {
    est.notes = "negative fitted slope " + std::to_string(est.slope) + " clamped to 0";
    est.slope = 0.0;
  }
  return est;
}

struct CoverDimensionOptions {
  double ratio = 0.5;
  std::optional<double> r0;  // defaults to diam E
  std::size_t discard_coarsest = 2;
  double floor_factor = 5.0;  // scales below floor_factor * min gap are saturated
};

struct DimensionRun {
  std::vector<CoverReport> table;
  DimensionEstimate estimate;
  double set_diameter = 0.0;
  double min_gap = 0.0;
};

// Geometric scale schedule r0 * ratio^k down to the saturation floor.
inline std::vector<double> geometric_scales(double r0, double ratio, double floor, std::size_t max_count = 256) {
  if (!(r0 > 0.0)) throw InvalidInput("initial scale must be positive");
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidInput("scale ratio must lie in (0,1)");
  std::vector<double> out;
  for (std::size_t k = 0; k < max_count; ++k) {
    double r = r0 * std::pow(ratio, static_cast<double>(k));
    if (r < floor) break;
    out.push_back(r);
  }
  return out;
}

inline DimensionRun dimension_from_covers(const SpaceSample& space, std::span<const PointId> subset,
                                          const CoverDimensionOptions& opt = {}) {
  PointSet set = normalized(PointSet(subset.begin(), subset.end()));
  if (set.size() < 2) throw InvalidInput("dimension estimate needs at least two points");
  DimensionRun run;
  run.set_diameter = diameter(space, set);
  run.min_gap = min_gap(space, set);
  double floor = opt.floor_factor * run.min_gap;
  double r0 = opt.r0.value_or(run.set_diameter);
  std::vector<double> scales = geometric_scales(r0, opt.ratio, floor);
  run.table = cover_counts(space, set, scales);
  std::vector<ScaleCount> counts;
  for (const auto& c : run.table) counts.push_back({c.scale, static_cast<double>(c.upper)});
  FitPolicy policy;
  policy.discard_coarsest = opt.discard_coarsest;
  policy.min_scale = floor;
  policy.set_diameter = run.set_diameter;
  policy.count_source = "covers";
  run.estimate = estimate_dim_box(counts, policy);
  return run;
}

// Per-level N_k(E) for k in [k_lo, k_hi].
inline std::vector<std::size_t> cube_counts(const DyadicSystem& system, std::span<const PointId> subset, int k_lo,
                                            int k_hi) {
  if (k_lo < 0 || k_hi > system.k_max() || k_lo > k_hi) throw InvalidInput("level range outside the system");
  std::vector<std::size_t> out;
  for (int k = k_lo; k <= k_hi; ++k) out.push_back(cubes_intersecting(system, k, subset).count);
  return out;
}

struct CubeDimensionRun {
  std::vector<std::size_t> counts;  // N_k(E), k = 0..k_max
  DimensionEstimate estimate;
};

// Regression of log N_k(E) on k log(1/delta). Scales below the saturation
// floor are excluded; `discard_coarsest` counts levels after k_E.
inline CubeDimensionRun dimension_from_cubes(const DyadicSystem& system, const SpaceSample& space,
                                             std::span<const PointId> subset, std::size_t discard_coarsest = 1,
                                             double floor_factor = 5.0) {
  PointSet set = normalized(PointSet(subset.begin(), subset.end()));
  if (set.size() < 2) throw InvalidInput("dimension estimate needs at least two points");
  CubeDimensionRun run;
  run.counts = cube_counts(system, set, 0, system.k_max());
  std::vector<ScaleCount> seq;
  for (int k = 0; k <= system.k_max(); ++k)
    seq.push_back({system.params.scale(k), static_cast<double>(run.counts[static_cast<std::size_t>(k)])});
  FitPolicy policy;
  policy.discard_coarsest = discard_coarsest;
  policy.min_scale = floor_factor * min_gap(space, set);
  policy.set_diameter = diameter(space, set);
  policy.count_source = "cubes";
  run.estimate = estimate_dim_box(seq, policy);
  return run;
}

// Multiplicity constant relating dyadic counts to diameter covers:
// C' = C_d (c0 / (3 (4 C0 + 1)))^(-log2 C_d).
inline double c_prime(double C_d, double c0, double C0) {
  if (!(C_d >= 1.0) || !std::isfinite(C_d)) throw InvalidInput("doubling constant must be >= 1");
  if (!(c0 > 0.0 && c0 <= C0) || !std::isfinite(C0)) throw InvalidInput("cube constants must satisfy 0 < c0 <= C0");
  return C_d * std::pow(c0 / (3.0 * (4.0 * C0 + 1.0)), -std::log2(C_d));
}

struct SandwichReport {
  int k = 0;
  std::size_t cube_count = 0;       // N_k(E)
  double max_cube_diameter = 0.0;   // over all level-k cubes
  double diameter_bound = 0.0;      // 4 C0 delta^k
  bool left_holds = false;          // N(E, 4 C0 delta^k) <= N_k(E) witnessed by cube diameters
  std::size_t cover_upper = 0;      // greedy upper bound on N(E, delta^k)
  double c_prime = 0.0;
  double right_bound = 0.0;         // C' * cover_upper
  bool right_holds = false;         // N_k(E) <= C' * cover_upper
  bool passed() const { return left_holds && right_holds; }
};

inline SandwichReport sandwich_check(const DyadicSystem& system, const SpaceSample& space,
                                     std::span<const PointId> subset, int k, double C_d) {
  const DyadicLevel& lvl = system.level(k);
  SandwichReport rep;
  rep.k = k;
  rep.cube_count = cubes_intersecting(system, k, subset).count;
  rep.diameter_bound = 4.0 * system.params.C0 * system.params.scale(k);
  for (const Cube& c : lvl.cubes) rep.max_cube_diameter = std::max(rep.max_cube_diameter, diameter(space, c.members));
  rep.left_holds = rep.max_cube_diameter <= rep.diameter_bound;
  rep.cover_upper = covering_number_bounds(space, subset, system.params.scale(k)).upper;
  rep.c_prime = c_prime(C_d, system.params.c0, system.params.C0);
  rep.right_bound = rep.c_prime * static_cast<double>(rep.cover_upper);
  rep.right_holds = static_cast<double>(rep.cube_count) <= rep.right_bound;
  return rep;
}

}  // namespace fractal_lab
