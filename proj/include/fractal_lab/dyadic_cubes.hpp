#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fractal_lab/error.hpp"
#include "fractal_lab/metric_core.hpp"
#include "fractal_lab/parallel.hpp"
#include "fractal_lab/space_sample.hpp"

namespace fractal_lab {

// Scale ratio delta and the separation/covering constants c0 <= C0 of a
// dyadic system, plus the deepest level built.
struct CubeParams {
  double delta = 1.0 / 24.0;
  double c0 = 1.0;
  double C0 = 2.0;
  int k_max = 3;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in (0,1)");
    if (!(c0 > 0.0) || !std::isfinite(C0) || !(c0 <= C0))
      throw InvalidInput("cube constants must satisfy 0 < c0 <= C0 < inf");
    if (k_max < 0) throw InvalidInput("k_max must be nonnegative");
    if (12.0 * C0 * delta > c0) {
      std::ostringstream msg;
      msg << "cube constants violate 12*C0*delta <= c0 (12*C0*delta = " << 12.0 * C0 * delta << ", c0 = " << c0
          << ")";
      throw InvalidInput(msg.str());
    }
  }

  double scale(int k) const { return std::pow(delta, k); }
  double separation(int k) const { return c0 * scale(k); }
  double inner_radius(int k) const { return c0 * scale(k) / 3.0; }
  double outer_radius(int k) const { return 2.0 * C0 * scale(k); }
};

struct Cube {
  int level = 0;
  PointId center = 0;
  PointSet members;
  std::optional<std::size_t> parent;  // index into the previous level
  std::vector<std::size_t> children;  // indices into the next level
};

struct DyadicLevel {
  int k = 0;
  std::vector<Cube> cubes;
};

struct DyadicSystem {
  CubeParams params;
  std::size_t sample_size = 0;
  std::vector<DyadicLevel> levels;
  std::size_t max_children = 0;

  const DyadicLevel& level(int k) const {
    if (k < 0 || static_cast<std::size_t>(k) >= levels.size())
      throw InvalidInput("level " + std::to_string(k) + " outside the built range 0.." +
                         std::to_string(static_cast<int>(levels.size()) - 1));
    return levels[static_cast<std::size_t>(k)];
  }
  int k_max() const { return static_cast<int>(levels.size()) - 1; }
};

namespace detail {

inline FarthestFirst level_net(const SpaceSample& space, int k, const CubeParams& params) {
  PointSet all = space.all_points();
  double sep = params.separation(k);
  return farthest_first(space, all, PointId{0}, sep, sep);
}

}  // namespace detail

// Maximal c0*delta^k-separated set of centers by farthest-point traversal
// seeded at point 0, in selection order.
inline std::vector<PointId> build_net(const SpaceSample& space, int k, const CubeParams& params) {
  params.validate();
  if (space.empty()) throw InvalidInput("cannot build a net on an empty sample");
  if (k < 0) throw InvalidInput("levels are nonnegative");
  return detail::level_net(space, k, params).centers;
}

// Finest-level points go to their nearest center; every center at level
// k+1 is attached to its nearest level-k center, and a coarse cube is the
// union of its children. Nearest-center parents sit within c0*delta^k/2 of
// the parent center whenever any center does, which is what keeps the
// inner balls inside their cubes under 12*C0*delta <= c0.
inline DyadicSystem build_system(const SpaceSample& space, const CubeParams& params) {
  params.validate();
  if (space.empty()) throw InvalidInput("cannot build a dyadic system on an empty sample");
  const std::size_t n = space.size();
  const auto levels = static_cast<std::size_t>(params.k_max) + 1;

  std::vector<FarthestFirst> nets(levels);
  parallel_for(levels, [&](std::size_t k) { nets[k] = detail::level_net(space, static_cast<int>(k), params); });

  // label[k][x] = index of the level-k cube containing x
  std::vector<std::vector<std::size_t>> label(levels, std::vector<std::size_t>(n));
  label[levels - 1] = nets[levels - 1].nearest_center;
  std::vector<std::vector<std::size_t>> parent_of(levels);
  for (std::size_t k = levels - 1; k-- > 0;) {
    const auto& fine_centers = nets[k + 1].centers;
    parent_of[k + 1].resize(fine_centers.size());
    for (std::size_t j = 0; j < fine_centers.size(); ++j) parent_of[k + 1][j] = nets[k].nearest_center[fine_centers[j]];
    for (std::size_t x = 0; x < n; ++x) label[k][x] = parent_of[k + 1][label[k + 1][x]];
  }

  DyadicSystem sys;
  sys.params = params;
  sys.sample_size = n;
  sys.levels.resize(levels);
  for (std::size_t k = 0; k < levels; ++k) {
    DyadicLevel& lvl = sys.levels[k];
    lvl.k = static_cast<int>(k);
    lvl.cubes.resize(nets[k].centers.size());
    for (std::size_t i = 0; i < lvl.cubes.size(); ++i) {
      lvl.cubes[i].level = lvl.k;
      lvl.cubes[i].center = nets[k].centers[i];
    }
    for (PointId x = 0; x < n; ++x) lvl.cubes[label[k][x]].members.push_back(x);
    for (std::size_t i = 0; i < lvl.cubes.size(); ++i) {
      const Cube& c = lvl.cubes[i];
      if (c.members.empty() || label[k][c.center] != i)
        throw ConstructionError("level " + std::to_string(k) + " cube " + std::to_string(i) +
                                    " does not contain its center after hierarchy repair",
                                lvl.k, i);
    }
    if (k > 0) {
      for (std::size_t j = 0; j < lvl.cubes.size(); ++j) {
        std::size_t p = parent_of[k][j];
        lvl.cubes[j].parent = p;
        sys.levels[k - 1].cubes[p].children.push_back(j);
      }
    }
  }
  for (const auto& lvl : sys.levels)
    for (const auto& c : lvl.cubes) sys.max_children = std::max(sys.max_children, c.children.size());
  return sys;
}

enum class CubeProperty { structure, partition, nesting, inner_ball, outer_ball, dilated_ball };

inline const char* to_string(CubeProperty p) {
  switch (p) {
    case CubeProperty::structure: return "structure";
    case CubeProperty::partition: return "partition";
    case CubeProperty::nesting: return "nesting";
    case CubeProperty::inner_ball: return "inner_ball";
    case CubeProperty::outer_ball: return "outer_ball";
    case CubeProperty::dilated_ball: return "dilated_ball";
  }
  return "?";
}

struct CubeViolation {
  CubeProperty property = CubeProperty::structure;
  int level = 0;
  std::size_t cube = 0;
  std::optional<PointId> point;
  std::string detail;
};

struct VerificationReport {
  std::vector<CubeViolation> violations;
  std::size_t cubes_checked = 0;

  bool ok() const { return violations.empty(); }
  std::size_t count(CubeProperty p) const {
    return static_cast<std::size_t>(
        std::count_if(violations.begin(), violations.end(), [&](const CubeViolation& v) { return v.property == p; }));
  }
};

// Exhaustive check of nesting, per-level partition, the inner and outer
// ball sandwich and dilated-ball containment. Membership
// lists are the only source of truth; nothing cached at build time is
// trusted.
inline VerificationReport verify_system(const DyadicSystem& system, const SpaceSample& space) {
  VerificationReport rep;
  const std::size_t n = space.size();
  if (system.sample_size != n) {
    rep.violations.push_back({CubeProperty::structure, 0, 0, std::nullopt, "system was built over a different sample"});
    return rep;
  }
  const std::size_t levels = system.levels.size();
  constexpr std::size_t unowned = static_cast<std::size_t>(-1);

  // Partition and ownership per level.
  std::vector<std::vector<std::size_t>> owner(levels, std::vector<std::size_t>(n, unowned));
  std::vector<std::vector<CubeViolation>> found(levels);
  parallel_for(levels, [&](std::size_t k) {
    const DyadicLevel& lvl = system.levels[k];
    auto& out = found[k];
    if (lvl.k != static_cast<int>(k))
      out.push_back({CubeProperty::structure, static_cast<int>(k), 0, std::nullopt, "level index mismatch"});
    std::vector<std::size_t> seen(n, 0);
    for (std::size_t i = 0; i < lvl.cubes.size(); ++i) {
      for (PointId x : lvl.cubes[i].members) {
        if (x >= n) {
          out.push_back({CubeProperty::structure, lvl.k, i, x, "member outside the sample"});
          continue;
        }
        if (seen[x]++ == 0) owner[k][x] = i;
      }
    }
    for (PointId x = 0; x < n; ++x) {
      if (seen[x] == 0)
        out.push_back({CubeProperty::partition, lvl.k, 0, x, "point belongs to no cube"});
      else if (seen[x] > 1)
        out.push_back({CubeProperty::partition, lvl.k, owner[k][x], x,
                       "point belongs to " + std::to_string(seen[x]) + " cubes"});
    }
  });

  // Geometric and cross-level properties.
  std::vector<std::vector<CubeViolation>> geometric(levels);
  parallel_for(levels, [&](std::size_t l) {
    const DyadicLevel& lvl = system.levels[l];
    const CubeParams& prm = system.params;
    auto& out = geometric[l];
    double outer = prm.outer_radius(lvl.k), inner = prm.inner_radius(lvl.k);
    for (std::size_t j = 0; j < lvl.cubes.size(); ++j) {
      const Cube& cube = lvl.cubes[j];
      if (cube.center >= n) {
        out.push_back({CubeProperty::structure, lvl.k, j, std::nullopt, "center outside the sample"});
        continue;
      }
      // outer ball
      for (PointId x : cube.members)
        if (x < n && !(space.distance(cube.center, x) < outer))
          out.push_back({CubeProperty::outer_ball, lvl.k, j, x, "member outside B(z, 2 C0 delta^k)"});
      // inner ball
      space.for_each_within(cube.center, inner, false, [&](PointId q) {
        if (owner[l][q] != j) out.push_back({CubeProperty::inner_ball, lvl.k, j, q, "inner-ball point outside cube"});
      });
      // nesting against every coarser level
      for (std::size_t k = 0; k < l; ++k) {
        std::size_t first = unowned;
        bool split = false;
        for (PointId x : cube.members) {
          if (x >= n) continue;
          if (first == unowned) first = owner[k][x];
          else if (owner[k][x] != first) split = true;
        }
        if (split) {
          out.push_back({CubeProperty::nesting, lvl.k, j, std::nullopt,
                         "cube meets several cubes of level " + std::to_string(k)});
          continue;
        }
        if (first == unowned) continue;
        if (k + 1 == l && cube.parent && *cube.parent != first)
          out.push_back({CubeProperty::structure, lvl.k, j, std::nullopt, "parent link disagrees with membership"});
        // dilated balls of nested cubes
        const Cube& anc = system.levels[k].cubes[first];
        double big = prm.outer_radius(system.levels[k].k);
        if (space.distance(cube.center, anc.center) + outer <= big) continue;
        bool escaped = false;
        space.for_each_within(cube.center, outer, false, [&](PointId q) {
          if (!(space.distance(anc.center, q) < big)) escaped = true;
        });
        if (escaped)
          out.push_back({CubeProperty::dilated_ball, lvl.k, j, std::nullopt,
                         "B(Q) not inside B(ancestor) at level " + std::to_string(k)});
      }
    }
  });

  for (std::size_t k = 0; k < levels; ++k) {
    rep.cubes_checked += system.levels[k].cubes.size();
    rep.violations.insert(rep.violations.end(), found[k].begin(), found[k].end());
    rep.violations.insert(rep.violations.end(), geometric[k].begin(), geometric[k].end());
  }
  std::stable_sort(rep.violations.begin(), rep.violations.end(), [](const CubeViolation& a, const CubeViolation& b) {
    if (a.level != b.level) return a.level < b.level;
    return a.cube < b.cube;
  });
  return rep;
}

struct CubeIntersection {
  std::size_t count = 0;
  std::vector<std::size_t> cubes;
};

// N_k(E): level-k cubes meeting E.
inline CubeIntersection cubes_intersecting(const DyadicSystem& system, int k, std::span<const PointId> subset) {
  const DyadicLevel& lvl = system.level(k);
  std::vector<char> in_set(system.sample_size, 0);
  for (PointId p : subset) {
    if (p >= system.sample_size) throw InvalidInput("subset point " + std::to_string(p) + " outside the sample");
    in_set[p] = 1;
  }
  CubeIntersection out;
  for (std::size_t i = 0; i < lvl.cubes.size(); ++i) {
    const auto& members = lvl.cubes[i].members;
    if (std::any_of(members.begin(), members.end(), [&](PointId x) { return x < in_set.size() && in_set[x]; }))
      out.cubes.push_back(i);
  }
  out.count = out.cubes.size();
  return out;
}

}  // namespace fractal_lab
