#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spindle/forward.hpp"
#include "spindle/geometry.hpp"
#include "spindle/volume.hpp"

namespace spindle {

inline constexpr double kElectronRestEnergyKeV = 510.99895;
/// metres
inline constexpr double kClassicalElectronRadius = 2.8179403262e-15;
inline constexpr double kHcKeVAngstrom = 12.398419843;

/// Compton formula: energy after scattering a photon of energy e_lambda by omega.
double scattered_energy(double e_lambda, double omega);
/// Inverse: initial energy of a photon detected at e_s after scattering by omega.
/// Throws std::domain_error when no initial energy produces e_s at that angle.
double initial_energy(double e_s, double omega);

/// Scattering angle of the spindle with offset r: cos omega = r / sqrt(1 + r^2).
/// The apple (backscatter) branch is pi minus that angle.
double omega_from_r(double r, bool backscatter = false);

/// Klein-Nishina differential cross section (m^2 / sr). Throws
/// std::invalid_argument if e_s is not the Compton energy of (e_lambda, omega)
/// to 1e-9 relative.
double klein_nishina(double e_s, double e_lambda, double omega);
double klein_nishina(double e_lambda, double omega);

/// q = (E / hc) sin(omega / 2), inverse angstroms.
double momentum_transfer(double e_lambda, double omega);

/// Tabulated spectrum W_k(E): relative flux, linear between samples, zero outside.
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(std::vector<double> energies, std::vector<double> flux);
  /// CSV with header, rows "energy_keV,flux".
  static Spectrum read_csv(const std::filesystem::path& path);
  static Spectrum parse_csv(std::istream& in, const std::string& source = "spectrum");

  double operator()(double energy) const;
  double max_energy() const { return energies_.back(); }
  double min_energy() const { return energies_.front(); }
  /// Flux-weighted mean energy.
  double mean_energy() const;
  bool empty() const { return energies_.empty(); }
  const std::vector<double>& energies() const { return energies_; }
  const std::vector<double>& flux() const { return flux_; }

 private:
  std::vector<double> energies_, flux_;
};

/// Incoherent scattering function S(q, Z): CSV rows "q_inverse_angstrom,Z,S".
/// Interpolation is linear in log q (linear on an interval starting at q = 0)
/// and linear in Z between the tabulated elements. Requests outside the q (or Z)
/// range are clamped to the end values and counted; the first clamp per table
/// writes a warning to std::clog.
class ScatteringFactorTable {
 public:
  static ScatteringFactorTable read_csv(const std::filesystem::path& path);
  static ScatteringFactorTable parse_csv(std::istream& in, const std::string& source = "scattering factor");

  double operator()(double q, double z) const;
  std::size_t clamped() const { return clamped_->load(); }
  std::vector<double> elements() const;

 private:
  struct Curve {
    std::vector<double> q, s;
  };
  double curve_value(const Curve& c, double q, bool& clamped) const;

  std::map<double, Curve> by_z_;
  std::shared_ptr<std::atomic<std::size_t>> clamped_ = std::make_shared<std::atomic<std::size_t>>(0);
};

/// Source and detector model. Energies in keV, lengths in metres except scale_cm.
struct PhysicsConfig {
  /// Monochromatic source energy; ignored when a spectrum is set.
  double source_kev = 2824.0;
  std::optional<Spectrum> spectrum;
  std::string spectrum_path;
  double detector_area = 1e-4;
  double distance = 1.0;
  double emission_time = 1.0;
  /// The constant thickness c of the intensity model.
  double thickness = 1.0;
  /// Edge length of the scanned cube [-1, 1]^3 in centimetres.
  double scale_cm = 20.0;
  double z_avg = 7.0;
  bool attenuation = false;
  std::string materials_dir;

  void validate() const;
  /// Spectrum mean for polychromatic sources, else source_kev.
  double effective_energy() const;
  double cm_per_unit() const { return 0.5 * scale_cm; }
  std::string to_json() const;
  /// FNV-1a of the canonical JSON, 16 hex digits.
  std::string hash() const;
};

/// Detector solid angle times inverse-square source falloff (A in m^2):
///   w = A (1 - rho cos phi) / (4 pi [(1 - rho cos phi)^2 + rho^2 sin^2 phi][(rho cos phi + 1)^2 + rho^2 sin^2 phi])
/// on the spindle rho = spindle_rho(r, phi), source at -e3 and detector at e3.
/// Throws std::domain_error at the detector-coincident point.
double geometric_weight(double r, double phi, double detector_area);
Weighting geometric_weighting(double detector_area);

/// dsigma_c/dOmega(r) = KN(E_s, E, omega(r)) S(q, Z_avg) for a monochromatic
/// source of energy E; S is taken as 1 (free electrons) without a table.
double compton_factor(double r, double e_lambda, double z_avg, const ScatteringFactorTable* table);

/// r-only physics factor c t D^2 W_k(E) dsigma_c/dOmega(r), W_k = 1 for
/// monochromatic sources.
double physics_factor(double r, const PhysicsConfig& cfg, const ScatteringFactorTable* table);

/// Monochromatic intensity: physics_factor(r) times the spindle transform of f
/// (trilinear samples) weighted by geometric_weight.
double mono_intensity(const VoxelVolume& f, double r, double alpha, double beta, const PhysicsConfig& cfg,
                      const ScatteringFactorTable* table, const SurfaceQuadrature& q = {});

/// w1 sampled on t_j = r' j / (n_t - 1) for each r', its average
/// w_avg(r') = (1/r') int_0^{r'} w1 dt (trapezoid on the samples) and the bound
/// max_t w1 - min_t w1.
struct PolyWeighting {
  std::vector<double> r_prime;
  std::size_t n_t = 0;
  std::vector<double> w1;  // r' major, n_t samples each
  std::vector<double> w_avg;
  std::vector<double> bound;

  double t(std::size_t i, std::size_t j) const;
  double w1_at(std::size_t i, std::size_t j) const { return w1[i * n_t + j]; }
  /// max over samples of |w_avg - w1| - bound (<= 0 when the bound holds).
  double worst_violation() const;
};

PolyWeighting average_weighting(const std::function<double(double, double)>& w1, std::span<const double> r_prime,
                                std::size_t n_t = 257);

/// w1(r', t) = W_k(E(t)) KN S for a polychromatic source: the measured energy
/// E_s is the one reached from the spectrum end point E_m on the spindle with
/// offset 1/r', and t in [0, r'] indexes the spindle with offset 1/t whose
/// scatterers started at E(t) = initial_energy(E_s, omega(1/t)).
std::function<double(double, double)> spectrum_w1(const PhysicsConfig& cfg, const ScatteringFactorTable* table);

/// Throws std::invalid_argument without a spectrum or when W_k(E_m) != 0.
PolyWeighting poly_weighting(const PhysicsConfig& cfg, const ScatteringFactorTable* table,
                             std::span<const double> r_prime, std::size_t n_t = 257);

/// Polychromatic intensity at tube offset r (r' = 1/r):
///   c t D^2 int_0^{r'} w1(r', t) (1 + t^2)^{-1/2} S_w ftilde(1 / t) dt
/// with w1 = spectrum_w1, S_w the spindle transform weighted by
/// geometric_weight and ftilde = (1 - |x|^2) / 2 f; n_t Gauss-Legendre nodes in t.
double poly_intensity(const VoxelVolume& f, double r, double alpha, double beta, const PhysicsConfig& cfg,
                      const ScatteringFactorTable* table, const SurfaceQuadrature& q = {}, std::size_t n_t = 16);

/// Linear attenuation coefficient table mu(E) (1/cm), log-log interpolated and
/// clamped to the end samples.
class AttenuationTable {
 public:
  AttenuationTable() = default;
  AttenuationTable(std::string name, std::vector<double> energies, std::vector<double> mu);
  /// CSV with header, rows "energy_keV,mu_per_cm".
  static AttenuationTable read_csv(const std::filesystem::path& path);

  double operator()(double energy) const;
  const std::string& name() const { return name_; }
  AttenuationTable scaled(double factor) const;

 private:
  std::string name_;
  std::vector<double> energies_, mu_;
};

/// Attenuation tables per label id of a label volume.
struct MaterialMap {
  std::map<int, AttenuationTable> by_label;

  /// Reads DIR/materials.json, {"labels": {"<label name>": "<csv path>", ...}},
  /// paths relative to DIR, and binds every named label of the volume. Throws
  /// std::invalid_argument for a label without a table.
  static MaterialMap load(const std::filesystem::path& dir, const std::map<int, std::string>& label_names);
  /// Zero attenuation for every label.
  static MaterialMap vacuum(const std::map<int, std::string>& label_names);
};

/// Path lengths (normalized units) of the segment a -> b inside each label of
/// the volume, by voxel traversal with exact cell intersections. Index 0 is
/// the background; the vector has max label id + 1 entries.
std::vector<double> label_path_lengths(const VoxelVolume& labels, const Vec3& a, const Vec3& b);

/// exp(-sum_l mu_l(E) L_l cm_per_unit).
double transmission(std::span<const double> lengths, const MaterialMap& materials, double energy, double cm_per_unit);

/// Matrix-free forward over the transform's quadrature nodes with trilinear
/// density samples. With attenuation each node is scaled by the transmission
/// from the source (-axis) at the source energy and to the detector (+axis) at
/// the Compton energy of the node's own scattering angle.
ScatterData physics_forward(TransformKind kind, const VoxelVolume& f, const ScanGrid& grid,
                            const SurfaceQuadrature& q, const VoxelVolume* labels = nullptr,
                            const MaterialMap* materials = nullptr, double energy = 0.0, double cm_per_unit = 1.0,
                            unsigned threads = 0);

/// Applies the attenuation of f's materials to data: each sample is multiplied
/// by the ratio of attenuated to unattenuated physics_forward on the data grid.
/// Samples whose unattenuated forward is zero are left unchanged, as is all
/// data when cfg.attenuation is off.
ScatterData attenuate(const ScatterData& data, TransformKind kind, const VoxelVolume& f, const VoxelVolume& labels,
                      const MaterialMap& materials, const PhysicsConfig& cfg, const SurfaceQuadrature& q,
                      unsigned threads = 0);

}  // namespace spindle
