#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fractal_lab/fractal_lab.hpp"
#include "oracles.hpp"

using namespace fractal_lab;

namespace {

CubeParams params(double delta, double c0, double C0, int k_max) {
  CubeParams p;
  p.delta = delta;
  p.c0 = c0;
  p.C0 = C0;
  p.k_max = k_max;
  return p;
}

}  // namespace

TEST(CubeParams, Validation) {
  EXPECT_NO_THROW(params(1.0 / 24, 1, 2, 3).validate());
  EXPECT_THROW(params(0.0417, 1, 2, 3).validate(), InvalidInput);
  EXPECT_THROW(params(1.0 / 24, 2, 1, 3).validate(), InvalidInput);
  EXPECT_THROW(params(1.5, 1, 1, 3).validate(), InvalidInput);
  EXPECT_THROW(params(0.01, 1, 1, -1).validate(), InvalidInput);
}

TEST(DyadicCubes, NetOnInterval) {
  auto s = generate("grid:1001");
  // c0 delta^1 = 0.25
  auto net = build_net(s, 1, params(0.25 / 3.0, 3.0, 3.0, 1));
  EXPECT_EQ(net.size(), 5u);
  for (std::size_t i = 0; i < net.size(); ++i)
    for (std::size_t j = i + 1; j < net.size(); ++j) EXPECT_GE(s.distance(net[i], net[j]), 0.25);
}

TEST(DyadicCubes, IntervalPartitionAndDiameters) {
  auto s = generate("grid:1000");
  auto p = params(1.0 / 24, 1, 2, 2);
  DyadicSystem sys = build_system(s, p);
  for (const auto& lvl : sys.levels) {
    std::vector<int> owner(s.size(), 0);
    for (const auto& c : lvl.cubes) {
      for (PointId x : c.members) ++owner[x];
      EXPECT_LE(oracle::diameter(s, c.members), 4 * p.C0 * p.scale(lvl.k));
    }
    for (int o : owner) EXPECT_EQ(o, 1);
  }
  EXPECT_TRUE(verify_system(sys, s).ok());
}

TEST(DyadicCubes, NestingByMembership) {
  auto s = generate("cantor:7");
  DyadicSystem sys = build_system(s, params(1.0 / 24, 1, 2, 3));
  for (int k = 1; k <= sys.k_max(); ++k)
    for (const auto& c : sys.level(k).cubes) {
      ASSERT_TRUE(c.parent);
      const auto& par = sys.level(k - 1).cubes[*c.parent];
      std::set<PointId> pm(par.members.begin(), par.members.end());
      for (PointId x : c.members) EXPECT_TRUE(pm.count(x));
    }
}

TEST(DyadicCubes, TwoPoints) {
  auto s = SpaceSample::euclidean({0.0, 1.0}, 1);
  DyadicSystem sys = build_system(s, params(1.0 / 24, 1, 2, 1));
  // Separation exactly 1 admits both points as level-0 centers.
  EXPECT_EQ(sys.level(0).cubes.size(), 2u);
  EXPECT_TRUE(verify_system(sys, s).ok());

  DyadicSystem coarse = build_system(s, params(1.0 / 48, 1.5, 2, 1));
  ASSERT_EQ(coarse.level(0).cubes.size(), 1u);
  const Cube& c = coarse.level(0).cubes[0];
  for (PointId x : c.members) EXPECT_LE(s.distance(c.center, x), 2.0);
  EXPECT_TRUE(verify_system(coarse, s).ok());
}

TEST(DyadicCubes, VerifyOnFixtures) {
  for (const char* spec : {"grid:1000", "cantor:8", "grid:100:2", "carpet:3", "grid:500+snowflake:0.5"}) {
    auto s = generate(spec);
    DyadicSystem sys = build_system(s, params(1.0 / 24, 1, 2, 3));
    VerificationReport rep = verify_system(sys, s);
    EXPECT_TRUE(rep.ok()) << spec << ": " << (rep.ok() ? "" : rep.violations.front().detail);
    EXPECT_GT(rep.cubes_checked, 0u);
  }
}

TEST(DyadicCubes, VerifyDetectsTampering) {
  auto s = generate("grid:300");
  DyadicSystem sys = build_system(s, params(1.0 / 24, 1, 2, 2));
  DyadicSystem broken = sys;
  // Move a point between two level-2 cubes with different parents.
  auto& cubes = broken.levels[2].cubes;
  std::size_t a = 0, b = cubes.size() - 1;
  ASSERT_NE(cubes[a].parent, cubes[b].parent);
  cubes[b].members.push_back(cubes[a].members.back());
  cubes[a].members.pop_back();
  std::sort(cubes[b].members.begin(), cubes[b].members.end());
  VerificationReport rep = verify_system(broken, s);
  EXPECT_FALSE(rep.ok());
  EXPECT_GT(rep.count(CubeProperty::nesting), 0u);

  DyadicSystem dup = sys;
  dup.levels[1].cubes[0].members.push_back(dup.levels[1].cubes[1].members.front());
  EXPECT_GT(verify_system(dup, s).count(CubeProperty::partition), 0u);
}

TEST(DyadicCubes, CantorCountsScaleLikeTwoToTheK) {
  // delta = 1/27 with C0 = 2 is the triadic-compatible choice allowed by
  // 12 C0 delta <= c0; counts then grow by 2^3 per level.
  auto s = generate("cantor:10");
  DyadicSystem sys = build_system(s, params(1.0 / 27, 1, 2, 3));
  PointSet all = s.all_points();
  auto counts = cube_counts(sys, all, 0, 3);
  for (int k = 1; k <= 3; ++k) {
    double ratio = static_cast<double>(counts[k]) / static_cast<double>(counts[k - 1]);
    if (k >= 2) EXPECT_NEAR(std::log(ratio) / std::log(27.0), std::log(2.0) / std::log(3.0), 0.08) << k;
  }
}

TEST(DyadicCubes, IntersectionCounts) {
  auto s = generate("grid:1000");
  DyadicSystem sys = build_system(s, params(1.0 / 24, 1, 2, 2));
  PointSet left;
  for (PointId p = 0; p < 500; ++p) left.push_back(p);
  auto all = cubes_intersecting(sys, 1, s.all_points());
  auto half = cubes_intersecting(sys, 1, left);
  EXPECT_EQ(all.count, sys.level(1).cubes.size());
  EXPECT_LT(half.count, all.count);
  EXPECT_THROW(cubes_intersecting(sys, 5, left), InvalidInput);
}
