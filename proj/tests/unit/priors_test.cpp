#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "mvrl/errors.hpp"
#include "mvrl/priors.hpp"

namespace mvrl {
namespace {

constexpr double kPi = std::numbers::pi;

// Arc parameter t of a point on the S-manifold.
double recover_t(double x1, double x3) {
  if (x3 < 0) {
    double t = std::atan2(x1, x3 + 1.0);
    if (t < 0) t += 2 * kPi;
    return t;
  }
  double t = std::atan2(x1, 1.0 - x3);
  if (t > 0) t -= 2 * kPi;
  return t;
}

TEST(Prior, GaussianMoments) {
  Rng rng(1);
  const Tensor2 s = Prior::standard_gaussian(2).sample(100000, rng);
  for (std::size_t d = 0; d < 2; ++d) {
    double m = 0, m2 = 0;
    for (std::size_t i = 0; i < s.rows(); ++i) {
      m += s(i, d);
      m2 += s(i, d) * s(i, d);
    }
    m /= double(s.rows());
    const double var = m2 / double(s.rows()) - m * m;
    EXPECT_NEAR(m, 0.0, 0.02);
    EXPECT_NEAR(var, 1.0, 0.03);
  }
}

TEST(Prior, UniformBoxQuadrants) {
  Rng rng(2);
  const Tensor2 s = Prior::uniform_box(2).sample(100000, rng);
  std::array<int, 4> counts{};
  for (std::size_t i = 0; i < s.rows(); ++i) {
    ASSERT_GE(s(i, 0), -1.0);
    ASSERT_LT(s(i, 0), 1.0);
    ASSERT_GE(s(i, 1), -1.0);
    ASSERT_LT(s(i, 1), 1.0);
    counts[(s(i, 0) >= 0 ? 1 : 0) + (s(i, 1) >= 0 ? 2 : 0)]++;
  }
  for (int c : counts) EXPECT_NEAR(c / 100000.0, 0.25, 0.01);
}

TEST(Prior, SManifoldIdentityAndWidth) {
  Rng rng(3);
  const Prior p = Prior::s_manifold(0.5, 1.5);
  const Tensor2 s = p.sample(20000, rng);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const double x1 = s(i, 0), x2 = s(i, 1), x3 = s(i, 2);
    ASSERT_NEAR(x1 * x1 + (1.0 - std::abs(x3)) * (1.0 - std::abs(x3)), 1.0, 1e-12);
    ASSERT_GE(x2, 0.5);
    ASSERT_LE(x2, 1.5);
  }
}

TEST(Prior, SManifoldArcParameterIsUniform) {
  Rng rng(4);
  const Tensor2 s = Prior::s_manifold().sample(100000, rng);
  std::array<int, 8> bins{};
  const double span = 2 * kSManifoldHalfSpan;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const double t = recover_t(s(i, 0), s(i, 2));
    ASSERT_GE(t, -kSManifoldHalfSpan - 1e-9);
    ASSERT_LE(t, kSManifoldHalfSpan + 1e-9);
    bins[std::min<std::size_t>(7, std::size_t((t + kSManifoldHalfSpan) / span * 8))]++;
  }
  for (int b : bins) EXPECT_NEAR(b / 100000.0, 0.125, 0.01);
}

TEST(Prior, SamplingIsReproducible) {
  for (const Prior& p : {Prior::standard_gaussian(3), Prior::uniform_box(2, -2, 3), Prior::s_manifold()}) {
    Rng a(9), b(9);
    EXPECT_EQ(p.sample(50, a), p.sample(50, b));
  }
}

TEST(Prior, InvalidParameters) {
  EXPECT_THROW(Prior::standard_gaussian(0), DimensionError);
  EXPECT_THROW(Prior::uniform_box(0), DimensionError);
  EXPECT_THROW(Prior::uniform_box(2, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Prior::s_manifold(2.0, 0.0), std::invalid_argument);
  EXPECT_EQ(Prior::s_manifold().dim(), 3u);
}

TEST(Prior, KindNames) {
  for (auto k : {PriorKind::kStandardGaussian, PriorKind::kUniformBox, PriorKind::kSManifold}) {
    EXPECT_EQ(parse_prior_kind(to_string(k)), k);
  }
  EXPECT_FALSE(parse_prior_kind("laplace").has_value());
}

TEST(SManifoldDistance, ZeroOnSamples) {
  Rng rng(5);
  const Tensor2 s = Prior::s_manifold().sample(2000, rng);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    EXPECT_LT(distance_to_s_manifold({s(i, 0), s(i, 1), s(i, 2)}), 1e-9);
  }
}

// Brute force: minimum over a dense sampling of the surface.
double brute_distance(const std::array<double, 3>& p) {
  double best = 1e9;
  const int nt = 20000;
  for (int k = 0; k <= nt; ++k) {
    const double t = -kSManifoldHalfSpan + 2 * kSManifoldHalfSpan * k / nt;
    const double x1 = std::sin(t), x3 = (t < 0 ? -1.0 : 1.0) * (std::cos(t) - 1.0);
    const double w = std::clamp(p[1], 0.0, 2.0);
    best = std::min(best, std::hypot(p[0] - x1, p[1] - w, p[2] - x3));
  }
  return best;
}

TEST(SManifoldDistance, MatchesBruteForce) {
  Rng rng(6);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int i = 0; i < 200; ++i) {
    const std::array<double, 3> p{u(rng), u(rng) + 1.0, u(rng)};
    EXPECT_NEAR(distance_to_s_manifold(p), brute_distance(p), 2e-3) << p[0] << " " << p[1] << " " << p[2];
  }
}

TEST(SManifoldDistance, KnownOffsets) {
  EXPECT_NEAR(distance_to_s_manifold({0.0, 1.0, -2.0}), 0.0, 1e-12);  // t = pi
  EXPECT_NEAR(distance_to_s_manifold({-1.0, 1.0, -1.0}), 0.0, 1e-12);  // endpoint t = 3pi/2
  EXPECT_NEAR(distance_to_s_manifold({-2.0, 1.0, -1.0}), 1.0, 1e-12);
  EXPECT_NEAR(distance_to_s_manifold({0.0, 3.0, 0.0}), 1.0, 1e-12);  // width overshoot only
  EXPECT_NEAR(distance_to_s_manifold({0.0, 1.0, -1.0}), 1.0, 1e-12);  // center of the lower arc
}

}  // namespace
}  // namespace mvrl
