#include <gtest/gtest.h>

#include <cmath>

#include "fractal_lab/fractal_lab.hpp"

using namespace fractal_lab;

TEST(Bounds, ClosedForms) {
  EXPECT_NEAR(ch_bound(4, 0.5, 1.0), 4.0 / 3.0, 1e-15);
  EXPECT_EQ(ch_bound(4, 0.5, 0.0), 0.0);
  EXPECT_NEAR(sobolev_bound(4, 2, 1), 4.0 / 3.0, 1e-15);
  QsBounds b = qs_bounds(4, 2, 1);
  EXPECT_NEAR(b.lower, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(b.upper, 4.0 / 3.0, 1e-15);
}

TEST(Bounds, InvalidInputs) {
  EXPECT_THROW(ch_bound(1.0, 0.5, 1), InvalidInput);
  EXPECT_THROW(ch_bound(2, 1.5, 1), InvalidInput);
  EXPECT_THROW(ch_bound(2, 0.5, -1), InvalidInput);
  EXPECT_THROW(sobolev_bound(2, 2, 1), InvalidInput);
  EXPECT_THROW(sobolev_bound(3, 2, 2), InvalidInput);
  EXPECT_THROW(qs_bounds(3, 1, 0.5), InvalidInput);
  EXPECT_THROW(qs_bounds(3, 2, 0), InvalidInput);
}

TEST(Bounds, AlgebraOnRationalGrid) {
  for (int i = 1; i <= 10; ++i)
    for (int j = 1; j <= 10; ++j)
      for (int k = 1; k <= 10; ++k) {
        double Q = 1.0 + j / 5.0;
        double p = Q + i / 3.0;
        double d = Q * k / 11.0;
        double alpha = j / 11.0;
        EXPECT_LT(ch_bound(p, alpha, d), d / alpha);
        EXPECT_LT(sobolev_bound(p, Q, d), Q);
        QsBounds b = qs_bounds(p, Q, d);
        EXPECT_GT(b.lower, 0.0);
        EXPECT_LE(b.lower, b.upper);
        EXPECT_NEAR(sobolev_bound(p, Q, b.lower), d, 1e-10);
      }
}

TEST(KR, Brackets) {
  double delta = 1.0 / 24, d = 1.0, D = 0.5;
  for (double r : {0.9, 0.2, 0.04, 0.003, 1e-5}) {
    int k = compute_k_r(delta, d, D, r);
    EXPECT_LE(r, std::pow(delta, k * d / D) * (1 + 1e-12));
    EXPECT_GT(r, std::pow(delta, (k + 1) * d / D));
  }
  EXPECT_EQ(compute_k_r(delta, d, D, 1.0), 0);
  EXPECT_THROW(compute_k_r(delta, d, D, 1.5), ScaleOutOfRange);
  EXPECT_THROW(compute_k_r(delta, d, D, 0.01, 3), ScaleOutOfRange);
}

TEST(MajorMinor, IdentityTerminates) {
  auto s = generate("grid:1000");
  SampledMap f = make_map("identity", s);
  CubeParams p;
  DyadicSystem sys = build_system(s, p);
  MajorMinorTrace t = classify_major_minor(sys, f, s.all_points(), 0.05, 1.0, 1.0);
  ASSERT_FALSE(t.M.empty());
  EXPECT_EQ(t.M.back(), 0u);
  EXPECT_GT(t.cover_size_for_fE, 0u);
  for (const auto& m : t.minor_cover) {
    PointSet img = f.image(sys.level(m.level).cubes[m.cube].members);
    EXPECT_LT(diameter(f.target, img), 0.05);
  }
}

TEST(MajorMinor, ResolutionExhausted) {
  auto s = generate("grid:1000");
  SampledMap f = make_map("snowflake_id:0.5", s);
  CubeParams p;
  p.k_max = 2;
  DyadicSystem sys = build_system(s, p);
  try {
    classify_major_minor(sys, f, s.all_points(), 0.01, 1.0, 2.0);
    FAIL() << "expected ResolutionExhausted";
  } catch (const ResolutionExhausted& e) {
    EXPECT_FALSE(e.partial().M.empty());
  }
}

TEST(Distortion, SnowflakeImageDimension) {
  auto s = generate("grid:16385");
  SampledMap f = make_map("snowflake_id:0.5", s);
  BoundInputs in;
  in.kind = BoundKind::ch;
  in.p = 4;
  in.alpha = 0.5;
  DistortionOptions opt;
  opt.certify.schedule = {0.25, 0.125, 0.0625};
  opt.trace_scales = 0;
  DistortionReport rep = run_distortion_experiment(f, s.all_points(), in, opt);
  EXPECT_NEAR(rep.image.estimate.slope, 2.0, 0.1);
  EXPECT_NEAR(rep.source.estimate.slope, 1.0, 0.05);
}

TEST(Distortion, SobolevHypothesisViolation) {
  // A planar sample has dimension near 2, above Q = 1.
  auto s = generate("grid:60:2");
  SampledMap f = make_map("identity", s);
  BoundInputs in;
  in.kind = BoundKind::sobolev;
  in.p = 3;
  in.Q = 1.0;
  DistortionReport rep = run_distortion_experiment(f, s.all_points(), in);
  EXPECT_TRUE(rep.hypothesis_violation);
  EXPECT_FALSE(rep.bound_value);
}

TEST(Distortion, ConstantMapHasPointImage) {
  auto s = generate("grid:500");
  SampledMap f = make_map("affine:0:0.5", s);
  BoundInputs in;
  in.p = 3;
  in.alpha = 0.5;
  DistortionOptions opt;
  opt.certify.schedule = {0.2, 0.1, 0.05};
  DistortionReport rep = run_distortion_experiment(f, s.all_points(), in, opt);
  EXPECT_EQ(rep.image.estimate.slope, 0.0);
  EXPECT_TRUE(rep.within_tolerance);
}

TEST(BoundKind, Parse) {
  EXPECT_EQ(parse_bound_kind("qs"), BoundKind::qs);
  EXPECT_THROW(parse_bound_kind("x"), InvalidInput);
}
