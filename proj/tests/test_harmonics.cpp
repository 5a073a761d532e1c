#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spindle/harmonics.hpp"
#include "spindle/quadrature.hpp"

using namespace spindle;

namespace {

std::vector<double> sample(const SphereGrid& g, const std::function<double(double, double)>& f) {
  std::vector<double> s(g.size());
  for (std::size_t k = 0; k < g.n_theta; ++k)
    for (std::size_t j = 0; j < g.n_phi; ++j) s[k * g.n_phi + j] = f(g.theta[k], g.phi[j]);
  return s;
}

HarmonicCoefficients random_real_coeffs(int lmax, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  HarmonicCoefficients c(lmax);
  for (int l = 0; l <= lmax; ++l) {
    c.at(l, 0) = n(rng);
    for (int m = 1; m <= l; ++m) {
      c.at(l, m) = {n(rng), n(rng)};
      c.at(l, -m) = (m % 2 ? -1.0 : 1.0) * std::conj(c.at(l, m));
    }
  }
  return c;
}

}  // namespace

TEST(Quadrature, GaussLegendreExactness) {
  const auto rule = gauss_legendre(6, 0.0, 2.0);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], 11);
  EXPECT_NEAR(s, std::pow(2.0, 12) / 12, 1e-10);
  const auto one = gauss_legendre(1);
  EXPECT_EQ(one.nodes[0], 0.0);
  EXPECT_EQ(one.weights[0], 2.0);
}

TEST(Quadrature, ChebyshevIntegratesWeight) {
  const auto rule = gauss_chebyshev_unit(16);
  double s = 0.0, t = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    s += rule.weights[i];
    t += rule.weights[i] * rule.nodes[i];
  }
  EXPECT_NEAR(s, std::numbers::pi, 1e-14);
  EXPECT_NEAR(t, std::numbers::pi / 2, 1e-14);
}

TEST(Harmonics, LegendreValues) {
  EXPECT_EQ(legendre_p(0, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(legendre_p(2, 0.0), -0.5);
  EXPECT_DOUBLE_EQ(legendre_p(4, 0.0), 3.0 / 8.0);
  for (int l = 0; l < 30; ++l) EXPECT_NEAR(legendre_p(l, 1.0), 1.0, 1e-13);
}

TEST(Harmonics, ConstantHarmonic) {
  EXPECT_NEAR(std::abs(sph_harm(0, 0, 0.4, 1.2) - 1.0 / std::sqrt(4 * std::numbers::pi)), 0.0, 1e-15);
  EXPECT_THROW(sph_harm(2, 3, 0.0, 0.0), std::invalid_argument);
}

TEST(Harmonics, AgreesWithClosedFormY21) {
  // Y_2^1 = -sqrt(15/(8 pi)) sin cos e^{i theta} in the Condon-Shortley convention,
  // which is the same function once both (-1)^m factors are combined.
  const double th = 0.7, ph = 1.1;
  const complex ref = -std::sqrt(15.0 / (8 * std::numbers::pi)) * std::sin(ph) * std::cos(ph) * std::polar(1.0, th);
  EXPECT_LT(std::abs(std::abs(sph_harm(2, 1, th, ph)) - std::abs(ref)), 1e-14);
}

TEST(Harmonics, GramMatrixIsIdentity) {
  const int lmax = 8;
  const auto g = SphereGrid::for_band_limit(2 * lmax);
  const double dth = 2 * std::numbers::pi / g.n_theta;
  double worst = 0.0;
  for (int l = 0; l <= lmax; ++l)
    for (int m = -l; m <= l; ++m)
      for (int l2 = 0; l2 <= lmax; ++l2)
        for (int m2 = -l2; m2 <= l2; ++m2) {
          complex s{};
          for (std::size_t k = 0; k < g.n_theta; ++k)
            for (std::size_t j = 0; j < g.n_phi; ++j)
              s += g.phi_weights[j] * dth * sph_harm(l, m, g.theta[k], g.phi[j]) *
                   std::conj(sph_harm(l2, m2, g.theta[k], g.phi[j]));
          worst = std::max(worst, std::abs(s - complex(l == l2 && m == m2 ? 1.0 : 0.0)));
        }
  EXPECT_LT(worst, 1e-9);
}

TEST(Harmonics, AnalyzeConstant) {
  const auto g = SphereGrid::for_band_limit(6);
  const auto c = analyze(sample(g, [](double, double) { return 1.0; }), g, 6);
  EXPECT_NEAR(c.at(0, 0).real(), std::sqrt(4 * std::numbers::pi), 1e-12);
  for (int l = 1; l <= 6; ++l)
    for (int m = -l; m <= l; ++m) EXPECT_LT(std::abs(c.at(l, m)), 1e-10);
}

TEST(Harmonics, AnalyzeRealPartOfY32) {
  // Re Y_3^2 = (Y_3^2 + conj Y_3^2)/2 = (Y_3^2 + Y_3^{-2})/2
  const auto g = SphereGrid::for_band_limit(5);
  const auto c = analyze(sample(g, [](double t, double p) { return sph_harm(3, 2, t, p).real(); }), g, 5);
  EXPECT_NEAR(c.at(3, 2).real(), 0.5, 1e-12);
  EXPECT_NEAR(c.at(3, -2).real(), 0.5, 1e-12);
  double other = 0.0;
  for (int l = 0; l <= 5; ++l)
    for (int m = -l; m <= l; ++m)
      if (!(l == 3 && std::abs(m) == 2)) other = std::max(other, std::abs(c.at(l, m)));
  EXPECT_LT(other, 1e-10);
}

TEST(Harmonics, RoundTrip) {
  const int lmax = 8;
  const auto c = random_real_coeffs(lmax, 3);
  const auto g = SphereGrid::for_band_limit(lmax);
  const auto back = analyze(sample(g, [&](double t, double p) { return synthesize_real(c, t, p); }), g, lmax);
  double err = 0.0;
  for (std::size_t i = 0; i < c.values().size(); ++i) err = std::max(err, std::abs(c.values()[i] - back.values()[i]));
  EXPECT_LT(err, 1e-9);
  EXPECT_NEAR(synthesize(c, 0.3, 0.8).imag(), 0.0, 1e-12);
  EXPECT_NEAR(synthesize(c, 0.3, 0.8).real(), synthesize_real(c, 0.3, 0.8), 1e-12);
}

TEST(Harmonics, UndersampledGridThrows) {
  const auto g = SphereGrid::make(9, 5);
  std::vector<double> s(g.size(), 1.0);
  EXPECT_THROW(analyze(s, g, 5), std::invalid_argument);
  EXPECT_THROW(analyze(std::vector<double>(3), g, 2), std::invalid_argument);
}

TEST(Harmonics, SynthesisTrivialCases) {
  HarmonicCoefficients c(4);
  EXPECT_EQ(synthesize_real(c, 0.1, 0.2), 0.0);
  c.at(0, 0) = std::sqrt(4 * std::numbers::pi);
  EXPECT_NEAR(synthesize_real(c, 0.1, 0.2), 1.0, 1e-14);
}

TEST(Harmonics, LegendreParity) {
  for (int l = 0; l <= 10; ++l)
    for (int m = 0; m <= l; ++m)
      for (double x : {0.1, 0.45, 0.9})
        EXPECT_NEAR(assoc_legendre_normalized(l, m, -x), ((l + m) % 2 ? -1.0 : 1.0) * assoc_legendre_normalized(l, m, x),
                    1e-13);
}

TEST(Harmonics, EvenSymmetrizationOfUpperHalfField) {
  // F = cos^2(phi) (1 + sin(phi) cos(theta)) on the upper half, zero below; not band limited,
  // so compare the even-only reconstruction with the truncated full series at high degree.
  auto F = [](double t, double p) {
    return p <= std::numbers::pi / 2 ? std::pow(std::cos(p), 4) * (1.0 + 0.5 * std::sin(p) * std::cos(t)) : 0.0;
  };
  const int lmax = 24;
  const auto g = SphereGrid::make(128, 200);
  const auto c = analyze(sample(g, F), g, lmax);
  HarmonicCoefficients even(lmax);
  for (int l = 0; l <= lmax; l += 2)
    for (int m = -l; m <= l; ++m) even.at(l, m) = c.at(l, m);
  for (double p : {0.3, 0.8, 1.2})
    for (double t : {0.0, 2.0}) {
      EXPECT_NEAR(symmetrize_even(even, t, p), F(t, p), 2e-3);
      EXPECT_NEAR(symmetrize_even(even, t, p), synthesize_real(c, t, p), 2e-3);
    }
  EXPECT_EQ(symmetrize_even(even, 0.0, 2.0), 0.0);
  EXPECT_THROW(symmetrize_even(c, 0.0, 0.5), std::invalid_argument);
  EXPECT_EQ(symmetrize_even(HarmonicCoefficients(4), 0.0, 0.5), 0.0);
}
