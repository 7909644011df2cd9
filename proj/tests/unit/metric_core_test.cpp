#include <gtest/gtest.h>

#include <cmath>

#include "fractal_lab/fractal_lab.hpp"
#include "oracles.hpp"

using namespace fractal_lab;

TEST(MetricCore, DiameterAgreesWithPairScan) {
  for (const char* spec : {"grid:200", "cantor:5", "grid:12:2", "carpet:2", "grid:9:2+snowflake:0.5"}) {
    auto s = generate(spec);
    PointSet all = s.all_points();
    EXPECT_NEAR(diameter(s, all), oracle::diameter(s, all), 1e-12) << spec;
    EXPECT_NEAR(min_gap(s, all), oracle::min_gap(s, all), 1e-12) << spec;
    PointSet part;
    for (PointId p = 0; p < s.size(); p += 3) part.push_back(p);
    EXPECT_NEAR(diameter(s, part), oracle::diameter(s, part), 1e-12) << spec;
  }
}

TEST(MetricCore, PlaneHullDiameter) {
  // Above the hull threshold the hull path is taken.
  auto s = generate("grid:40:2");
  PointSet all = s.all_points();
  EXPECT_NEAR(diameter(s, all), std::sqrt(2.0), 1e-12);
}

TEST(MetricCore, NoTriangleViolationsOnValidMetrics) {
  EXPECT_EQ(count_triangle_violations(generate("grid:50:2"), 5000, 1), 0u);
  EXPECT_EQ(count_triangle_violations(generate("cantor:6+snowflake:0.3"), 5000, 2), 0u);
}

TEST(MetricCore, FarthestFirstOnInterval) {
  auto s = generate("grid:1001");
  PointSet all = s.all_points();
  FarthestFirst ff = farthest_first(s, all, 0, 0.25, 0.25);
  // 0, 1, 1/2, 1/4, 3/4; the next candidate sits at 1/8.
  ASSERT_EQ(ff.centers.size(), 5u);
  EXPECT_EQ(ff.centers[0], 0u);
  EXPECT_EQ(ff.centers[1], 1000u);
  EXPECT_EQ(ff.centers[2], 500u);
  for (std::size_t i = 0; i < ff.centers.size(); ++i)
    for (std::size_t j = i + 1; j < ff.centers.size(); ++j)
      EXPECT_GE(s.distance(ff.centers[i], ff.centers[j]), 0.25);
  for (PointId p : all) EXPECT_LT(ff.nearest_distance[p], 0.25);
}

TEST(MetricCore, DoublingConstantInterval) {
  auto s = generate("grid:1001");
  std::vector<double> scales{0.2, 0.05, 0.01};
  PointSet centers;
  for (PointId p = 0; p < s.size(); p += 25) centers.push_back(p);
  auto est = estimate_doubling_constant(s, scales, centers);
  EXPECT_LE(est.constant, 4.0);
  EXPECT_GE(est.constant, 2.0);
}

TEST(MetricCore, DoublingConstantPlane) {
  auto s = generate("grid:60:2");
  std::vector<double> scales{0.3, 0.1};
  PointSet centers;
  for (PointId p = 0; p < s.size(); p += 97) centers.push_back(p);
  auto est = estimate_doubling_constant(s, scales, centers);
  EXPECT_LE(est.constant, 16.0);
  EXPECT_GE(est.constant, 4.0);
}

TEST(MetricCore, HomogeneityOnPlaneGrid) {
  auto s = generate("grid:80:2+weight:unit");
  PointSet region;
  for (PointId p = 0; p < s.size(); p += 211) region.push_back(p);
  double step = 1.0 / 79.0;
  std::vector<ScalePair> pairs{{10 * step, 20 * step}, {12 * step, 36 * step}};
  auto rep = check_homogeneity(s, 2.0, region, pairs);
  EXPECT_GT(rep.tested, 0u);
  EXPECT_LE(rep.worst_constant, 4.0);
  EXPECT_GE(rep.worst_constant, 0.25);
}

TEST(MetricCore, HomogeneityNeedsWeights) {
  auto s = generate("grid:10");
  PointSet region{0};
  std::vector<ScalePair> pairs{{0.1, 0.2}};
  EXPECT_THROW(check_homogeneity(s, 1.0, region, pairs), InvalidInput);
}

TEST(MetricCore, AhlforsInterval) {
  // Uniform mass: mu(B(x, r)) = 2r away from the ends and r at an end, so
  // C_A is 2 in the limit.
  auto s = generate("grid:2001+weight:uniform");
  std::vector<double> scales{0.2, 0.1, 0.05, 0.02};
  PointSet centers;
  for (PointId p = 0; p < s.size(); p += 100) centers.push_back(p);
  auto rep = check_ahlfors_regularity(s, 1.0, scales, centers);
  EXPECT_TRUE(rep.regular);
  EXPECT_NEAR(rep.fitted_exponent, 1.0, 0.05);
  EXPECT_LE(rep.C_A_estimate, 2.1);
}

TEST(MetricCore, AhlforsCantor) {
  auto s = generate("cantor:10+weight:uniform");
  double Q = std::log(2.0) / std::log(3.0);
  std::vector<double> scales;
  for (int j = 1; j <= 6; ++j) scales.push_back(std::pow(3.0, -j) * 1.0000001);
  PointSet centers;
  for (PointId p = 0; p < s.size(); p += 37) centers.push_back(p);
  auto rep = check_ahlfors_regularity(s, Q, scales, centers);
  EXPECT_TRUE(rep.regular);
  EXPECT_TRUE(std::isfinite(rep.C_A_estimate));
  EXPECT_LE(rep.C_A_estimate, 4.0);
}
