#include <gtest/gtest.h>

#include <cmath>

#include "fractal_lab/fractal_lab.hpp"
#include "oracles.hpp"

using namespace fractal_lab;

namespace {

std::vector<double> coords(const SpaceSample& s) {
  return std::vector<double>(s.all_coordinates().begin(), s.all_coordinates().end());
}

SampledMap square_map(const SpaceSample& s) {
  std::vector<double> img;
  for (double x : coords(s)) img.push_back(x * x);
  return detail::coordinate_map(s, img, "square");
}

}  // namespace

TEST(HolderCoefficient, SquareOnInterval) {
  auto s = generate("grid:201");
  SampledMap f = square_map(s);
  double c = holder_coefficient(f, s.all_points(), 0.5);
  // sup of (x + y) sqrt(x - y) over 0 <= y < x <= 1 is at x = 1, y = 1/3.
  EXPECT_NEAR(c, 4.0 * std::sqrt(6.0) / 9.0, 1e-3);
  EXPECT_LE(c, 4.0 * std::sqrt(6.0) / 9.0 + 1e-12);
  EXPECT_NEAR(c, oracle::holder_sup(coords(s), [](double x) { return x * x; }, 0.5), 1e-12);
}

TEST(HolderCoefficient, BallsAndEdgeCases) {
  auto s = generate("grid:101");
  SampledMap f = make_map("power:0.5", s);
  for (PointId c : {PointId{0}, PointId{10}, PointId{60}}) {
    Ball b(c, 0.15);
    PointSet members = s.points_within(c, 0.15);
    std::vector<double> xs;
    for (PointId p : members) xs.push_back(s.coordinates(p)[0]);
    double expect = oracle::holder_sup(xs, [](double x) { return std::sqrt(x); }, 0.5);
    EXPECT_NEAR(holder_coefficient(f, b, 0.5), expect, 1e-12);
  }
  PointSet single{3};
  EXPECT_EQ(holder_coefficient(f, single, 0.5), 0.0);
  EXPECT_THROW(diam_ratio_coefficient(f, single, 0.5), InvalidInput);
  EXPECT_THROW(holder_coefficient(f, s.all_points(), 1.5), InvalidInput);
}

TEST(HolderCoefficient, SnowflakeIdentityIsOne) {
  auto s = generate("grid:301");
  SampledMap f = make_map("snowflake_id:0.5", s);
  EXPECT_NEAR(holder_coefficient(f, s.all_points(), 0.5), 1.0, 1e-12);
  EXPECT_NEAR(holder_coefficient(f, Ball(150, 0.1), 0.5), 1.0, 1e-12);
}

TEST(SeparatedCover, IntervalCount) {
  auto s = generate("grid:1001");
  SeparatedCover cover = build_separated_cover(s, s.all_points(), 0.1, 0.4);
  EXPECT_GE(cover.balls.size(), 5u);
  EXPECT_LE(cover.balls.size(), 14u);
  std::vector<int> hit(s.size(), 0);
  for (const Ball& b : cover.balls) {
    for (PointId p : oracle::ball(s, b.center, b.radius)) hit[p] = 1;
    for (const Ball& o : cover.balls)
      if (o.center != b.center) EXPECT_GE(s.distance(o.center, b.center), 0.08 - 1e-12);
  }
  for (int h : hit) EXPECT_EQ(h, 1);
}

TEST(SeparatedCover, InfeasibleWhenCoresCannotSeparate) {
  auto s = generate("grid:1001");
  // Open r-balls cannot cover the line with centers 2 eps r = 1.9 r apart.
  EXPECT_THROW(build_separated_cover(s, s.all_points(), 0.1, 0.95), InfeasibleCover);
  EXPECT_THROW(build_separated_cover(s, s.all_points(), 0.1, 1.0), InvalidInput);
}

TEST(PSum, OrderAndValidation) {
  std::vector<double> c{1.0, 2.0, 0.5};
  EXPECT_DOUBLE_EQ(p_sum(c, 2.0), 5.25);
  EXPECT_THROW(p_sum(c, 1.0), InvalidInput);
  std::vector<double> neg{-1.0};
  EXPECT_THROW(p_sum(neg, 2.0), InvalidInput);
}

TEST(Certify, SnowflakeIdentityDiverges) {
  auto s = generate("grid:1025");
  SampledMap f = make_map("snowflake_id:0.5", s);
  HolderCertificate cert = certify_compactly_holder(f, s.all_points(), 2.0, 0.5);
  EXPECT_EQ(cert.verdict, Verdict::diverging);
  EXPECT_NEAR(cert.growth_exponent, 1.0, 0.2);
  // Every coefficient is 1, so each p-sum is the ball count.
  for (const auto& row : cert.evidence)
    if (!row.skipped) EXPECT_NEAR(row.p_sum_strong, static_cast<double>(row.ball_count), 1e-9);
}

TEST(Certify, IdentityBounded) {
  auto s = generate("grid:1025");
  SampledMap f = make_map("identity", s);
  HolderCertificate cert = certify_compactly_holder(f, s.all_points(), 3.0, 0.5);
  EXPECT_EQ(cert.verdict, Verdict::bounded);
  EXPECT_LT(cert.tail_growth, 0.0);
}

TEST(Certify, SquareRootBoundedAndStabilizing) {
  auto s = generate("grid:1025");
  SampledMap f = make_map("power:0.5", s);
  HolderCertificate cert = certify_compactly_holder(f, s.all_points(), 4.0, 0.5);
  EXPECT_EQ(cert.verdict, Verdict::bounded);
  double lo = INFINITY, hi = 0;
  for (const auto& row : cert.evidence)
    if (!row.skipped) {
      lo = std::min(lo, row.p_sum_strong);
      hi = std::max(hi, row.p_sum_strong);
    }
  EXPECT_LE(hi / lo, 1.5);
}

TEST(Certify, TooFewRadii) {
  auto s = generate("grid:40");
  SampledMap f = make_map("identity", s);
  HolderCertificate cert = certify_compactly_holder(f, s.all_points(), 3.0, 0.5);
  EXPECT_EQ(cert.verdict, Verdict::inconclusive);
}

TEST(Quasisymmetry, IdentityModulus) {
  auto s = generate("grid:200");
  SampledMap f = make_map("affine:2:1", s);
  QuasisymmetryEstimate q = estimate_quasisymmetry_modulus(f, 2000, 7);
  for (std::size_t i = 0; i < q.t.size(); ++i) EXPECT_NEAR(q.t[i], q.ratio[i], 1e-9);
  EXPECT_LE(q.eta_at_1, 1.0 + 1e-9);
  EXPECT_THROW(estimate_quasisymmetry_modulus(f, 10), InvalidInput);
}
