#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace spindle {

using complex = std::complex<double>;

/// Legendre polynomial P_l(x) by the three-term recurrence.
double legendre_p(int l, double x);

/// Orthonormal associated Legendre function for m >= 0:
///   sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) (1-x^2)^{m/2} d^m/dx^m P_l(x).
/// The two (-1)^m factors of the harmonic definition cancel, so no
/// Condon-Shortley phase appears here.
double assoc_legendre_normalized(int l, int m, double x);

/// All normalized P_l^m(x) for 0 <= m <= l <= lmax, stored at l(l+1)/2 + m.
std::vector<double> assoc_legendre_table(int lmax, double x);
inline std::size_t legendre_table_index(int l, int m) {
  return static_cast<std::size_t>(l) * (l + 1) / 2 + m;
}

/// Y_l^m(theta, phi) with theta the azimuth and phi the colatitude.
/// Negative orders follow Y_l^{-m} = (-1)^m conj(Y_l^m).
complex sph_harm(int l, int m, double theta, double phi);

/// Coefficients c_lm for 0 <= l <= lmax, |m| <= l.
class HarmonicCoefficients {
 public:
  HarmonicCoefficients() = default;
  explicit HarmonicCoefficients(int lmax);

  int lmax() const { return lmax_; }
  static std::size_t index(int l, int m) { return static_cast<std::size_t>(l * l + l + m); }
  complex& at(int l, int m);
  const complex& at(int l, int m) const;
  std::span<const complex> values() const { return values_; }
  std::span<complex> values() { return values_; }

 private:
  int lmax_ = -1;
  std::vector<complex> values_;
};

/// Tensor grid on S^2: uniform azimuths theta_k = 2 pi k / n_theta and
/// colatitudes phi_j = acos(x_j) at Gauss-Legendre nodes x_j.
/// Sample (k, j) lives at flat index k * n_phi + j.
struct SphereGrid {
  std::size_t n_theta = 0;
  std::size_t n_phi = 0;
  std::vector<double> theta;
  std::vector<double> phi;
  std::vector<double> cos_phi;
  std::vector<double> phi_weights;  // Gauss-Legendre weights in cos(phi)

  static SphereGrid make(std::size_t n_theta, std::size_t n_phi);
  /// Smallest grid that analyzes band limit lmax exactly.
  static SphereGrid for_band_limit(int lmax);

  std::size_t size() const { return n_theta * n_phi; }
  bool resolves(int lmax) const;
};

/// c_lm = int F conj(Y_l^m) over the sphere for a real F sampled on grid.
/// Throws std::invalid_argument when the grid under-samples lmax.
HarmonicCoefficients analyze(std::span<const double> samples, const SphereGrid& grid, int lmax);

/// Truncated series sum_{l <= lmax} sum_m c_lm Y_l^m(theta, phi).
complex synthesize(const HarmonicCoefficients& coeffs, double theta, double phi);
/// Real part of the truncated series, using conjugate symmetry of a real field.
double synthesize_real(const HarmonicCoefficients& coeffs, double theta, double phi);

/// Reconstruction of a field supported in the upper half space from its even
/// degree coefficients: 2 sum_{even l} c_lm Y_l^m on phi <= pi/2 and zero below.
/// Throws std::invalid_argument if odd-degree energy exceeds odd_tolerance times
/// the total coefficient energy.
double symmetrize_even(const HarmonicCoefficients& coeffs, double theta, double phi,
                       double odd_tolerance = 1e-12);

/// Fraction of coefficient energy carried by odd degrees.
double odd_energy_fraction(const HarmonicCoefficients& coeffs);

/// Radial profiles F_lm(x) sampled on an ascending grid.
struct HarmonicProfileSet {
  int lmax = 0;
  std::vector<double> grid;
  std::vector<std::vector<complex>> profiles;  // [HarmonicCoefficients::index(l, m)][grid point]

  HarmonicProfileSet() = default;
  HarmonicProfileSet(int lmax, std::vector<double> grid);

  std::vector<complex>& at(int l, int m) { return profiles[HarmonicCoefficients::index(l, m)]; }
  const std::vector<complex>& at(int l, int m) const { return profiles[HarmonicCoefficients::index(l, m)]; }
  /// Coefficients at one grid point.
  HarmonicCoefficients slice(std::size_t i) const;
};

}  // namespace spindle
