#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spindle/geometry.hpp"

using namespace spindle;

TEST(Geometry, SpindleRhoValues) {
  EXPECT_DOUBLE_EQ(spindle_rho(0.0, 0.3), 1.0);
  EXPECT_NEAR(spindle_rho(0.75, std::numbers::pi / 2), 0.5, 1e-15);
}

TEST(Geometry, CosineRuleResidual) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ur(0.0, 30.0), uphi(0.0, std::numbers::pi);
  for (int i = 0; i < 1000; ++i) {
    const double r = ur(rng), phi = uphi(rng);
    const double rho = spindle_rho(r, phi);
    const double R2 = 1.0 + r * r;
    EXPECT_LT(std::abs(R2 - (rho * rho + r * r + 2 * r * rho * std::sin(phi))), 1e-12 * R2);
    EXPECT_GT(rho, 0.0);
    EXPECT_LE(rho, 1.0);
  }
}

TEST(Geometry, AppleRhoAndProduct) {
  EXPECT_DOUBLE_EQ(apple_rho(0.0, 1.1), 1.0);
  EXPECT_NEAR(apple_rho(0.75, std::numbers::pi / 2), 2.0, 1e-15);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ur(0.0, 10.0), uphi(0.0, std::numbers::pi);
  for (int i = 0; i < 1000; ++i) {
    const double r = ur(rng), phi = uphi(rng);
    EXPECT_NEAR(spindle_rho(r, phi) * apple_rho(r, phi), 1.0, 1e-12);
    EXPECT_LE(spindle_rho(r, phi), 1.0);
    EXPECT_GE(apple_rho(r, phi), 1.0);
    EXPECT_LE(apple_rho(r, phi), std::sqrt(1 + r * r) + r + 1e-12);
    EXPECT_NEAR(spindle_rho(r, phi), spindle_rho(r, std::numbers::pi - phi), 1e-12);
  }
}

TEST(Geometry, ArcElement) {
  EXPECT_DOUBLE_EQ(arc_element(0.0, 0.4, 1.0), 1.0);
  EXPECT_NEAR(arc_element(0.75, std::numbers::pi / 2, 0.5), 0.5, 1e-15);
  for (double phi = 0.05; phi < 3.1; phi += 0.1) EXPECT_GT(arc_element(2.0, phi, spindle_rho(2.0, phi)), 0.0);
}

TEST(Geometry, DeltaForEpsilon) {
  EXPECT_EQ(delta_for_epsilon(1.0, true), 0.0);
  EXPECT_EQ(delta_for_epsilon(0.5, true), 0.75);
  EXPECT_EQ(delta_for_epsilon(2.0, false), 0.75);
  EXPECT_NEAR(spindle_rho(delta_for_epsilon(0.3, true), std::numbers::pi / 2), 0.3, 1e-14);
  EXPECT_NEAR(apple_rho(delta_for_epsilon(3.0, false), std::numbers::pi / 2), 3.0, 1e-14);
  EXPECT_THROW(delta_for_epsilon(0.0, true), std::domain_error);
  EXPECT_THROW(delta_for_epsilon(1.5, true), std::domain_error);
  EXPECT_THROW(delta_for_epsilon(0.5, false), std::domain_error);
}

TEST(Geometry, HeightMapping) {
  EXPECT_EQ(r_for_height(1.0), 0.0);
  EXPECT_NEAR(r_for_height(0.02), 24.99, 1e-12);
  for (double r : {0.0, 0.1, 0.75, 3.0, 24.99}) {
    const auto t = TorusParams::from_offset(r);
    EXPECT_NEAR(r_for_height(t.height()), r, 1e-12 * (1 + r));
  }
  EXPECT_THROW(r_for_height(0.0), std::domain_error);
  EXPECT_THROW(r_for_height(1.01), std::domain_error);
  EXPECT_THROW(TorusParams::from_offset(-1.0), std::invalid_argument);
}

TEST(Geometry, ScaledCurveComposition) {
  const double delta = 0.75;
  const auto curve = SymmetricCurve::spindle(delta);
  for (double r = 0.0; r <= 1.0; r += 0.125)
    for (double phi = 0.0; phi <= std::numbers::pi; phi += 0.2)
      EXPECT_NEAR(curve.rho(r, phi), spindle_rho(delta * r, phi), 1e-12);
  const auto apple = SymmetricCurve::apple(delta);
  EXPECT_NEAR(apple.rho(0.6, 1.0), apple_rho(0.45, 1.0), 1e-12);
}

TEST(Geometry, CurveDerivativeMatchesFiniteDifference) {
  for (const auto& curve : {SymmetricCurve::spindle(0.75), SymmetricCurve::apple(1.5)})
    for (double phi : {0.2, 0.9, 1.4, 2.5}) {
      const double h = 1e-6, r = 0.6;
      const double fd = (curve.rho(r, phi + h) - curve.rho(r, phi - h)) / (2 * h);
      EXPECT_NEAR(curve.rho_prime(r, phi), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
}
