#include <gtest/gtest.h>

#include <cmath>

#include "fractal_lab/fractal_lab.hpp"
#include "oracles.hpp"

using namespace fractal_lab;

namespace {

SpaceSample line(std::vector<double> xs) { return SpaceSample::euclidean(std::move(xs), 1); }

}  // namespace

TEST(SpaceSample, EuclideanDistances) {
  auto s = SpaceSample::euclidean({0, 0, 3, 4, 6, 8}, 2);
  EXPECT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s.distance(0, 1), 5.0);
  EXPECT_DOUBLE_EQ(s.distance(0, 2), 10.0);
  EXPECT_DOUBLE_EQ(s.distance(1, 1), 0.0);
  EXPECT_EQ(s.kind(), MetricKind::euclidean);
}

TEST(SpaceSample, RejectsBadInput) {
  EXPECT_THROW(SpaceSample::euclidean({0, 1, 0}, 2), InvalidInput);
  EXPECT_THROW(line({0.0, NAN}), InvalidInput);
  EXPECT_THROW(line({0.5, 0.25, 0.5}), InvalidInput);
  EXPECT_THROW(SpaceSample::euclidean({0, 1}, 0), InvalidInput);
}

TEST(SpaceSample, SnowflakeExponentsCompose) {
  auto s = line({0.0, 0.25});
  auto a = s.snowflake(0.5);
  EXPECT_EQ(a.kind(), MetricKind::snowflake);
  EXPECT_DOUBLE_EQ(a.distance(0, 1), 0.5);
  auto b = a.snowflake(0.5);
  EXPECT_DOUBLE_EQ(b.exponent(), 0.25);
  EXPECT_NEAR(b.distance(0, 1), std::pow(0.25, 0.25), 1e-15);
  EXPECT_THROW(s.snowflake(1.5), InvalidInput);
  EXPECT_THROW(s.snowflake(0.0), InvalidInput);
}

TEST(SpaceSample, TableMetric) {
  auto t = SpaceSample::from_table({0, 1, 2, 1, 0, 1, 2, 1, 0}, 3);
  EXPECT_EQ(t.kind(), MetricKind::table);
  EXPECT_FALSE(t.has_coordinates());
  EXPECT_DOUBLE_EQ(t.distance(0, 2), 2.0);
  EXPECT_EQ(t.points_within(1, 1.0, true).size(), 3u);
  EXPECT_EQ(t.points_within(1, 1.0, false).size(), 1u);
}

TEST(SpaceSample, OpenBallMatchesScan) {
  auto s = generate("grid:1001");
  // Perturbed radius keeps the boundary points 0.4 and 0.6 outside in
  // spite of rounding in the grid coordinates.
  auto ball = s.points_within(500, 0.1 - 1e-9);
  EXPECT_EQ(ball.size(), 199u);
  EXPECT_EQ(ball.front(), 401u);
  EXPECT_EQ(ball.back(), 599u);
  for (PointId c : {PointId{0}, PointId{17}, PointId{500}, PointId{1000}})
    for (double r : {0.003, 0.05, 0.1 - 1e-9, 0.37})
      EXPECT_EQ(s.points_within(c, r), oracle::ball(s, c, r)) << c << " " << r;
}

TEST(SpaceSample, ClosedBallIncludesBoundary) {
  auto s = line({0.0, 0.5, 1.0});
  EXPECT_EQ(s.points_within(0, 0.5, false).size(), 1u);
  EXPECT_EQ(s.points_within(0, 0.5, true).size(), 2u);
}

TEST(SpaceSample, PlaneBallMatchesScan) {
  auto s = generate("grid:30:2");
  for (PointId c : {PointId{0}, PointId{455}, PointId{899}})
    for (double r : {0.05, 0.2, 0.5}) EXPECT_EQ(s.points_within(c, r), oracle::ball(s, c, r));
  auto sf = s.snowflake(0.5);
  for (double r : {0.2, 0.5}) EXPECT_EQ(sf.points_within(455, r), oracle::ball(sf, 455, r));
}

TEST(SpaceSample, WeightsAndIds) {
  auto s = line({0.0, 1.0}).with_weights({0.25, 0.75});
  EXPECT_TRUE(s.has_weights());
  EXPECT_DOUBLE_EQ(s.weight(1), 0.75);
  EXPECT_THROW(line({0.0, 1.0}).with_weights({1.0}), InvalidInput);
  EXPECT_THROW(line({0.0, 1.0}).with_weights({1.0, -1.0}), InvalidInput);
  auto named = s.with_ids({"a", "b"});
  EXPECT_EQ(named.id(1), "b");
  EXPECT_FALSE(s.without_weights().has_weights());
}

TEST(Ball, Validation) {
  EXPECT_THROW(Ball(0, -1.0), InvalidInput);
  EXPECT_THROW(Ball(0, 0.0), InvalidInput);
  EXPECT_DOUBLE_EQ(Ball(3, 0.5).scaled(4.0).radius, 2.0);
}

TEST(NumericText, Parsing) {
  EXPECT_DOUBLE_EQ(parse_real("1/24"), 1.0 / 24.0);
  EXPECT_DOUBLE_EQ(parse_real("0.25"), 0.25);
  EXPECT_THROW(parse_real("1/0"), InvalidInput);
  EXPECT_THROW(parse_real("abc"), InvalidInput);
  EXPECT_EQ(parse_integer("42"), 42);
  EXPECT_THROW(parse_integer("4.2"), InvalidInput);
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(split("a,b,,c", ',').size(), 4u);
}

TEST(Regression, ExactLine) {
  std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  LineFit f = least_squares(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.residual, 0.0, 1e-12);
}
