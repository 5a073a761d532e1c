#include "spindle/physics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "spindle/io.hpp"
#include "spindle/quadrature.hpp"

namespace spindle {

namespace {

void check_energy(double e, const char* what) {
  if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument(std::string(what) + " must be a positive energy");
}

void check_angle(double omega) {
  if (!(omega >= 0.0 && omega <= std::numbers::pi)) throw std::invalid_argument("scattering angle must lie in [0, pi]");
}

// index i with x[i] <= v < x[i + 1], for x[0] <= v <= x.back()
std::size_t bracket(const std::vector<double>& x, double v) {
  const auto it = std::upper_bound(x.begin(), x.end(), v);
  const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - x.begin() - 1));
  return std::min(i, x.size() - 2);
}

unsigned worker_count(unsigned requested, std::size_t work) {
  const unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(t, work)));
}

template <class Fn>
void parallel_rows(std::size_t rows, unsigned threads, Fn&& fn) {
  const unsigned t = worker_count(threads, rows);
  if (t == 1) {
    for (std::size_t i = 0; i < rows; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < t; ++k)
    pool.emplace_back([&, k] {
      for (std::size_t i = k; i < rows; i += t) fn(i);
    });
  for (auto& th : pool) th.join();
}

struct LabelGrid {
  VolumeShape shape;
  std::vector<int> ids;
  int max_id = 0;

  explicit LabelGrid(const VoxelVolume& labels) : shape(labels.shape), ids(labels.values.size()) {
    for (std::size_t v = 0; v < ids.size(); ++v) {
      const double x = labels.values[v];
      if (!(x >= 0.0) || x != std::floor(x)) throw std::invalid_argument("label volume must hold integer ids >= 0");
      ids[v] = static_cast<int>(x);
      max_id = std::max(max_id, ids[v]);
    }
  }

  // Adds the length of a -> b inside every label to `lengths` (max_id + 1 entries).
  void traverse(const Vec3& a, const Vec3& b, std::vector<double>& lengths) const {
    std::fill(lengths.begin(), lengths.end(), 0.0);
    const double e = shape.extent, h = shape.spacing();
    Vec3 d{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if (len == 0.0) return;
    // clip t in [0, 1] to the cube
    double t0 = 0.0, t1 = 1.0;
    for (int k = 0; k < 3; ++k) {
      if (d[k] == 0.0) {
        if (a[k] < -e || a[k] > e) return;
        continue;
      }
      double lo = (-e - a[k]) / d[k], hi = (e - a[k]) / d[k];
      if (lo > hi) std::swap(lo, hi);
      t0 = std::max(t0, lo);
      t1 = std::min(t1, hi);
    }
    if (!(t1 > t0)) return;
    const auto n = static_cast<long>(shape.n);
    std::array<long, 3> idx{}, step{};
    std::array<double, 3> t_max{}, t_delta{};
    const double probe = t0 + 1e-9 * (t1 - t0);
    for (int k = 0; k < 3; ++k) {
      const double p = a[k] + probe * d[k];
      idx[k] = std::clamp(static_cast<long>(std::floor((p + e) / h)), 0L, n - 1);
      if (d[k] > 0.0) {
        step[k] = 1;
        t_max[k] = (-e + (idx[k] + 1) * h - a[k]) / d[k];
        t_delta[k] = h / d[k];
      } else if (d[k] < 0.0) {
        step[k] = -1;
        t_max[k] = (-e + idx[k] * h - a[k]) / d[k];
        t_delta[k] = -h / d[k];
      } else {
        step[k] = 0;
        t_max[k] = std::numeric_limits<double>::infinity();
        t_delta[k] = std::numeric_limits<double>::infinity();
      }
    }
    double t = t0;
    while (true) {
      const int k = t_max[0] < t_max[1] ? (t_max[0] < t_max[2] ? 0 : 2) : (t_max[1] < t_max[2] ? 1 : 2);
      const double t_next = std::min(t_max[k], t1);
      if (t_next > t) lengths[ids[shape.index(idx[0], idx[1], idx[2])]] += (t_next - t) * len;
      if (t_max[k] >= t1) break;
      t = t_next;
      idx[k] += step[k];
      if (idx[k] < 0 || idx[k] >= n) break;
      t_max[k] += t_delta[k];
    }
  }
};

double angle_between(const Vec3& u, const Vec3& v) {
  const double uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
  const double vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  const double c = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / std::sqrt(uu * vv);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace

double scattered_energy(double e_lambda, double omega) {
  check_energy(e_lambda, "source energy");
  check_angle(omega);
  return e_lambda / (1.0 + (e_lambda / kElectronRestEnergyKeV) * (1.0 - std::cos(omega)));
}

double initial_energy(double e_s, double omega) {
  check_energy(e_s, "scattered energy");
  check_angle(omega);
  const double den = 1.0 - (e_s / kElectronRestEnergyKeV) * (1.0 - std::cos(omega));
  if (!(den > 0.0))
    throw std::domain_error("no initial energy scatters to " + std::to_string(e_s) + " keV at this angle");
  return e_s / den;
}

double omega_from_r(double r, bool backscatter) {
  if (!(r >= 0.0)) throw std::invalid_argument("tube offset r must be >= 0");
  // acos(r / sqrt(1 + r^2)) without cancellation
  const double w = std::atan2(1.0, r);
  return backscatter ? std::numbers::pi - w : w;
}

double klein_nishina(double e_s, double e_lambda, double omega) {
  check_energy(e_s, "scattered energy");
  const double expected = scattered_energy(e_lambda, omega);
  if (std::abs(expected - e_s) > 1e-9 * expected)
    throw std::invalid_argument("inconsistent Compton kinematics: E_s = " + std::to_string(e_s) + " keV, expected " +
                                std::to_string(expected));
  const double ratio = e_s / e_lambda;
  const double c = std::cos(omega);
  return 0.5 * kClassicalElectronRadius * kClassicalElectronRadius * ratio * ratio *
         (ratio + 1.0 / ratio - 1.0 + c * c);
}

double klein_nishina(double e_lambda, double omega) {
  return klein_nishina(scattered_energy(e_lambda, omega), e_lambda, omega);
}

double momentum_transfer(double e_lambda, double omega) {
  check_energy(e_lambda, "source energy");
  check_angle(omega);
  return e_lambda / kHcKeVAngstrom * std::sin(0.5 * omega);
}

Spectrum::Spectrum(std::vector<double> energies, std::vector<double> flux)
    : energies_(std::move(energies)), flux_(std::move(flux)) {
  if (energies_.size() != flux_.size()) throw std::invalid_argument("spectrum energy and flux counts differ");
  if (energies_.size() < 2) throw std::invalid_argument("spectrum needs at least two samples");
  double total = 0.0;
  for (std::size_t i = 0; i < energies_.size(); ++i) {
    if (!(energies_[i] > 0.0)) throw std::invalid_argument("spectrum energies must be positive");
    if (i > 0 && !(energies_[i] > energies_[i - 1])) throw std::invalid_argument("spectrum energies must ascend");
    if (!(flux_[i] >= 0.0) || !std::isfinite(flux_[i])) throw std::invalid_argument("spectrum flux must be >= 0");
    total += flux_[i];
  }
  if (total == 0.0) throw std::invalid_argument("spectrum has no flux");
}

Spectrum Spectrum::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spectrum " + path.string());
  return parse_csv(in, path.string());
}

Spectrum Spectrum::parse_csv(std::istream& in, const std::string& source) {
  std::vector<double> e, w;
  for (const auto& row : read_numeric_csv(in, 2, source)) {
    e.push_back(row[0]);
    w.push_back(row[1]);
  }
  if (e.empty()) throw std::invalid_argument(source + ": empty spectrum");
  return Spectrum(std::move(e), std::move(w));
}

double Spectrum::operator()(double energy) const {
  if (energies_.empty() || energy < energies_.front() || energy > energies_.back()) return 0.0;
  const std::size_t i = bracket(energies_, energy);
  const double t = (energy - energies_[i]) / (energies_[i + 1] - energies_[i]);
  return flux_[i] + t * (flux_[i + 1] - flux_[i]);
}

double Spectrum::mean_energy() const {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i + 1 < energies_.size(); ++i) {
    const double h = energies_[i + 1] - energies_[i];
    // exact integrals of the linear pieces of W and E W
    den += 0.5 * h * (flux_[i] + flux_[i + 1]);
    num += h / 6.0 * (flux_[i] * (2.0 * energies_[i] + energies_[i + 1]) +
                      flux_[i + 1] * (energies_[i] + 2.0 * energies_[i + 1]));
  }
  return num / den;
}

ScatteringFactorTable ScatteringFactorTable::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scattering factor table " + path.string());
  return parse_csv(in, path.string());
}

ScatteringFactorTable ScatteringFactorTable::parse_csv(std::istream& in, const std::string& source) {
  ScatteringFactorTable t;
  for (const auto& row : read_numeric_csv(in, 3, source)) {
    if (!(row[0] >= 0.0) || !(row[1] > 0.0) || !(row[2] >= 0.0))
      throw std::invalid_argument(source + ": need q >= 0, Z > 0, S >= 0");
    auto& c = t.by_z_[row[1]];
    c.q.push_back(row[0]);
    c.s.push_back(row[2]);
  }
  if (t.by_z_.empty()) throw std::invalid_argument(source + ": empty scattering factor table");
  for (auto& [z, c] : t.by_z_) {
    std::vector<std::size_t> order(c.q.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c.q[a] < c.q[b]; });
    Curve sorted;
    for (auto i : order) {
      if (!sorted.q.empty() && c.q[i] == sorted.q.back())
        throw std::invalid_argument(source + ": repeated q for Z = " + std::to_string(z));
      sorted.q.push_back(c.q[i]);
      sorted.s.push_back(c.s[i]);
    }
    if (sorted.q.size() < 2) throw std::invalid_argument(source + ": Z = " + std::to_string(z) + " has one sample");
    c = std::move(sorted);
  }
  return t;
}

std::vector<double> ScatteringFactorTable::elements() const {
  std::vector<double> z;
  for (const auto& [k, c] : by_z_) z.push_back(k);
  return z;
}

double ScatteringFactorTable::curve_value(const Curve& c, double q, bool& clamped) const {
  if (q <= c.q.front()) {
    clamped |= q < c.q.front();
    return c.s.front();
  }
  if (q >= c.q.back()) {
    clamped |= q > c.q.back();
    return c.s.back();
  }
  const std::size_t i = bracket(c.q, q);
  const double t = c.q[i] > 0.0 ? std::log(q / c.q[i]) / std::log(c.q[i + 1] / c.q[i])
                                : (q - c.q[i]) / (c.q[i + 1] - c.q[i]);
  return c.s[i] + t * (c.s[i + 1] - c.s[i]);
}

double ScatteringFactorTable::operator()(double q, double z) const {
  if (by_z_.empty()) throw std::logic_error("empty scattering factor table");
  bool clamped = false;
  double value;
  auto hi = by_z_.lower_bound(z);
  if (hi == by_z_.end()) {
    clamped = true;
    value = curve_value(std::prev(hi)->second, q, clamped);
  } else if (hi->first == z) {
    value = curve_value(hi->second, q, clamped);
  } else if (hi == by_z_.begin()) {
    clamped = true;
    value = curve_value(hi->second, q, clamped);
  } else {
    const auto lo = std::prev(hi);
    const double t = (z - lo->first) / (hi->first - lo->first);
    value = (1.0 - t) * curve_value(lo->second, q, clamped) + t * curve_value(hi->second, q, clamped);
  }
  if (clamped && clamped_->fetch_add(1) == 0)
    std::clog << "warning: scattering factor requested outside the table (q = " << q << ", Z = " << z
              << "); using end values\n";
  return value;
}

void PhysicsConfig::validate() const {
  if (!spectrum) check_energy(source_kev, "source energy");
  if (!(detector_area >= 0.0)) throw std::invalid_argument("detector area must be >= 0");
  if (!(distance > 0.0) || !(emission_time > 0.0) || !(thickness > 0.0))
    throw std::invalid_argument("distance, emission time and thickness must be positive");
  if (!(scale_cm > 0.0)) throw std::invalid_argument("scale must be positive");
  if (!(z_avg > 0.0)) throw std::invalid_argument("Z_avg must be positive");
}

double PhysicsConfig::effective_energy() const { return spectrum ? spectrum->mean_energy() : source_kev; }

std::string PhysicsConfig::to_json() const {
  nlohmann::json j{{"detector_area_m2", detector_area}, {"distance_m", distance},   {"emission_time_s", emission_time},
                   {"thickness", thickness},            {"scale_cm", scale_cm},     {"z_avg", z_avg},
                   {"attenuation", attenuation},        {"materials", materials_dir}};
  if (spectrum) {
    j["source"] = "spectrum:" + spectrum_path;
    j["spectrum_energy_keV"] = spectrum->energies();
    j["spectrum_flux"] = spectrum->flux();
  } else {
    j["source"] = "mono";
    j["source_keV"] = source_kev;
  }
  return j.dump();
}

std::string PhysicsConfig::hash() const { return fnv1a_hex(to_json()); }

double geometric_weight(double r, double phi, double detector_area) {
  const double rho = spindle_rho(r, phi);
  const double c = rho * std::cos(phi), s = rho * std::sin(phi);
  const double near = 1.0 - c;
  const double to_detector = near * near + s * s;
  const double to_source = (c + 1.0) * (c + 1.0) + s * s;
  if (to_detector == 0.0 || to_source == 0.0)
    throw std::domain_error("scattering point coincides with the source or detector");
  return detector_area * near / (4.0 * std::numbers::pi * to_detector * to_source);
}

Weighting geometric_weighting(double detector_area) {
  return Weighting{[detector_area](double r, double phi) { return geometric_weight(r, phi, detector_area); }};
}

double compton_factor(double r, double e_lambda, double z_avg, const ScatteringFactorTable* table) {
  const double omega = omega_from_r(r);
  const double kn = klein_nishina(scattered_energy(e_lambda, omega), e_lambda, omega);
  return table ? kn * (*table)(momentum_transfer(e_lambda, omega), z_avg) : kn;
}

double physics_factor(double r, const PhysicsConfig& cfg, const ScatteringFactorTable* table) {
  cfg.validate();
  const double e = cfg.effective_energy();
  const double flux = cfg.spectrum ? (*cfg.spectrum)(e) : 1.0;
  return cfg.thickness * cfg.emission_time * cfg.distance * cfg.distance * flux *
         compton_factor(r, e, cfg.z_avg, table);
}

double mono_intensity(const VoxelVolume& f, double r, double alpha, double beta, const PhysicsConfig& cfg,
                      const ScatteringFactorTable* table, const SurfaceQuadrature& q) {
  const Density density = [&f](const Vec3& x) { return f.sample(x); };
  const auto w = geometric_weighting(cfg.detector_area);
  return physics_factor(r, cfg, table) * weighted_spindle_forward_quad(density, w, r, alpha, beta, q);
}

double PolyWeighting::t(std::size_t i, std::size_t j) const {
  return r_prime[i] * static_cast<double>(j) / static_cast<double>(n_t - 1);
}

double PolyWeighting::worst_violation() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r_prime.size(); ++i)
    for (std::size_t j = 0; j < n_t; ++j) worst = std::max(worst, std::abs(w_avg[i] - w1_at(i, j)) - bound[i]);
  return worst;
}

PolyWeighting average_weighting(const std::function<double(double, double)>& w1, std::span<const double> r_prime,
                                std::size_t n_t) {
  if (n_t < 2) throw std::invalid_argument("need at least two t samples");
  PolyWeighting pw;
  pw.r_prime.assign(r_prime.begin(), r_prime.end());
  pw.n_t = n_t;
  pw.w1.resize(r_prime.size() * n_t);
  for (std::size_t i = 0; i < r_prime.size(); ++i) {
    if (!(r_prime[i] >= 0.0)) throw std::invalid_argument("r' must be >= 0");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    for (std::size_t j = 0; j < n_t; ++j) {
      const double v = w1(r_prime[i], pw.t(i, j));
      pw.w1[i * n_t + j] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += (j == 0 || j + 1 == n_t ? 0.5 : 1.0) * v;
    }
    // trapezoid mean: a convex combination of the samples
    pw.w_avg.push_back(sum / static_cast<double>(n_t - 1));
    pw.bound.push_back(hi - lo);
  }
  return pw;
}

std::function<double(double, double)> spectrum_w1(const PhysicsConfig& cfg, const ScatteringFactorTable* table) {
  if (!cfg.spectrum || cfg.spectrum->empty()) throw std::invalid_argument("polychromatic weighting needs a spectrum");
  const Spectrum spectrum = *cfg.spectrum;
  const double z_avg = cfg.z_avg;
  return [spectrum, z_avg, table](double r_prime, double t) {
    // omega of the spindle with offset 1/x is atan(x)
    const double e_s = scattered_energy(spectrum.max_energy(), std::atan(r_prime));
    const double omega = std::atan(t);
    const double e = std::min(initial_energy(e_s, omega), spectrum.max_energy());
    const double kn = klein_nishina(scattered_energy(e, omega), e, omega);
    const double s = table ? (*table)(momentum_transfer(e, omega), z_avg) : 1.0;
    return spectrum(e) * kn * s;
  };
}

PolyWeighting poly_weighting(const PhysicsConfig& cfg, const ScatteringFactorTable* table,
                             std::span<const double> r_prime, std::size_t n_t) {
  if (!cfg.spectrum || cfg.spectrum->empty()) throw std::invalid_argument("polychromatic weighting needs a spectrum");
  if (cfg.spectrum->flux().back() != 0.0)
    throw std::invalid_argument("spectrum flux must vanish at its maximum energy");
  return average_weighting(spectrum_w1(cfg, table), r_prime, n_t);
}

double poly_intensity(const VoxelVolume& f, double r, double alpha, double beta, const PhysicsConfig& cfg,
                      const ScatteringFactorTable* table, const SurfaceQuadrature& q, std::size_t n_t) {
  cfg.validate();
  if (!(r > 0.0)) throw std::invalid_argument("polychromatic data need r > 0");
  const auto w1 = spectrum_w1(cfg, table);
  const auto w2 = geometric_weighting(cfg.detector_area);
  const Density tilde = [&f](const Vec3& x) {
    return 0.5 * (1.0 - (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])) * f.sample(x);
  };
  const double rp = 1.0 / r;
  const auto rule = gauss_legendre(n_t, 0.0, rp);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double t = rule.nodes[k];
    sum += rule.weights[k] * w1(rp, t) / std::sqrt(1.0 + t * t) *
           weighted_spindle_forward_quad(tilde, w2, 1.0 / t, alpha, beta, q);
  }
  return cfg.thickness * cfg.emission_time * cfg.distance * cfg.distance * sum;
}

AttenuationTable::AttenuationTable(std::string name, std::vector<double> energies, std::vector<double> mu)
    : name_(std::move(name)), energies_(std::move(energies)), mu_(std::move(mu)) {
  if (energies_.size() != mu_.size() || energies_.empty())
    throw std::invalid_argument("attenuation table '" + name_ + "' needs matching energy and mu samples");
  for (std::size_t i = 0; i < energies_.size(); ++i) {
    if (!(energies_[i] > 0.0) || (i > 0 && !(energies_[i] > energies_[i - 1])))
      throw std::invalid_argument("attenuation table '" + name_ + "' energies must be positive and ascending");
    if (!(mu_[i] >= 0.0) || !std::isfinite(mu_[i]))
      throw std::invalid_argument("attenuation table '" + name_ + "' needs mu >= 0");
  }
}

AttenuationTable AttenuationTable::read_csv(const std::filesystem::path& path) {
  std::vector<double> e, mu;
  for (const auto& row : read_numeric_csv(path, 2)) {
    e.push_back(row[0]);
    mu.push_back(row[1]);
  }
  return AttenuationTable(path.stem().string(), std::move(e), std::move(mu));
}

double AttenuationTable::operator()(double energy) const {
  if (energies_.empty()) return 0.0;
  if (energy <= energies_.front()) return mu_.front();
  if (energy >= energies_.back()) return mu_.back();
  const std::size_t i = bracket(energies_, energy);
  if (mu_[i] > 0.0 && mu_[i + 1] > 0.0) {
    const double t = std::log(energy / energies_[i]) / std::log(energies_[i + 1] / energies_[i]);
    return mu_[i] * std::pow(mu_[i + 1] / mu_[i], t);
  }
  const double t = (energy - energies_[i]) / (energies_[i + 1] - energies_[i]);
  return mu_[i] + t * (mu_[i + 1] - mu_[i]);
}

AttenuationTable AttenuationTable::scaled(double factor) const {
  auto out = *this;
  for (auto& m : out.mu_) m *= factor;
  return out;
}

MaterialMap MaterialMap::load(const std::filesystem::path& dir, const std::map<int, std::string>& label_names) {
  const auto file = dir / "materials.json";
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(file.string() + ": " + e.what());
  }
  if (!j.contains("labels") || !j["labels"].is_object())
    throw std::runtime_error(file.string() + ": missing \"labels\" object");
  MaterialMap m;
  for (const auto& [id, name] : label_names) {
    if (!j["labels"].contains(name))
      throw std::invalid_argument("missing attenuation table for label '" + name + "' in " + file.string());
    m.by_label[id] = AttenuationTable::read_csv(dir / j["labels"][name].get<std::string>());
  }
  return m;
}

MaterialMap MaterialMap::vacuum(const std::map<int, std::string>& label_names) {
  MaterialMap m;
  for (const auto& [id, name] : label_names) m.by_label[id] = AttenuationTable(name, {1.0}, {0.0});
  return m;
}

std::vector<double> label_path_lengths(const VoxelVolume& labels, const Vec3& a, const Vec3& b) {
  const LabelGrid grid(labels);
  std::vector<double> lengths(grid.max_id + 1, 0.0);
  grid.traverse(a, b, lengths);
  return lengths;
}

double transmission(std::span<const double> lengths, const MaterialMap& materials, double energy,
                    double cm_per_unit) {
  double tau = 0.0;
  for (std::size_t l = 0; l < lengths.size(); ++l) {
    if (lengths[l] == 0.0) continue;
    const auto it = materials.by_label.find(static_cast<int>(l));
    if (it == materials.by_label.end()) {
      if (l == 0) continue;  // background is empty space
      throw std::invalid_argument("missing attenuation table for label id " + std::to_string(l));
    }
    tau += it->second(energy) * lengths[l];
  }
  return std::exp(-tau * cm_per_unit);
}

ScatterData physics_forward(TransformKind kind, const VoxelVolume& f, const ScanGrid& grid,
                            const SurfaceQuadrature& q, const VoxelVolume* labels, const MaterialMap* materials,
                            double energy, double cm_per_unit, unsigned threads) {
  grid.validate();
  const bool attenuating = labels && materials;
  if (attenuating) {
    if (!(labels->shape == f.shape)) throw std::invalid_argument("label and density volumes differ in shape");
    check_energy(energy, "source energy");
  }
  std::optional<LabelGrid> lg;
  std::vector<double> mu_in;
  if (attenuating) {
    lg.emplace(*labels);
    std::vector<char> present(lg->max_id + 1, 0);
    for (int id : lg->ids) present[id] = 1;
    mu_in.assign(lg->max_id + 1, 0.0);
    for (int l = 1; l <= lg->max_id; ++l) {
      const auto it = materials->by_label.find(l);
      if (it != materials->by_label.end())
        mu_in[l] = it->second(energy);
      else if (present[l])
        throw std::invalid_argument("missing attenuation table for label id " + std::to_string(l));
    }
  }
  ScatterData out(grid);
  const std::size_t na = grid.alpha_values.size(), nb = grid.beta_values.size();
  parallel_rows(grid.size(), threads, [&](std::size_t row) {
    const std::size_t ir = row / (na * nb), ia = (row / nb) % na, ib = row % nb;
    const double alpha = grid.alpha_values[ia], beta = grid.beta_values[ib];
    const Vec3 axis = Rotation::euler(alpha, beta).axis();
    const Vec3 src{-axis[0], -axis[1], -axis[2]};
    std::vector<double> len_in, len_out;
    if (attenuating) {
      len_in.resize(lg->max_id + 1);
      len_out.resize(lg->max_id + 1);
    }
    double total = 0.0;
    for_each_node(kind, grid.r_values[ir], alpha, beta, q, nullptr, [&](const Vec3& x, double w) {
      const double fx = f.sample(x);
      if (fx == 0.0) return;
      if (!attenuating) {
        total += w * fx;
        return;
      }
      lg->traverse(src, x, len_in);
      lg->traverse(x, axis, len_out);
      const double omega = angle_between({x[0] - src[0], x[1] - src[1], x[2] - src[2]},
                                         {axis[0] - x[0], axis[1] - x[1], axis[2] - x[2]});
      const double e_s = scattered_energy(energy, omega);
      double tau = 0.0;
      for (std::size_t l = 1; l < len_in.size(); ++l) {
        if (len_in[l] != 0.0) tau += mu_in[l] * len_in[l];
        if (len_out[l] != 0.0) {
          tau += materials->by_label.at(static_cast<int>(l))(e_s) * len_out[l];
        }
      }
      total += w * fx * std::exp(-tau * cm_per_unit);
    });
    out.values[row] = total;
  });
  return out;
}

ScatterData attenuate(const ScatterData& data, TransformKind kind, const VoxelVolume& f, const VoxelVolume& labels,
                      const MaterialMap& materials, const PhysicsConfig& cfg, const SurfaceQuadrature& q,
                      unsigned threads) {
  if (data.values.size() != data.grid.size()) throw std::invalid_argument("data payload does not match its grid");
  if (!cfg.attenuation) return data;
  cfg.validate();
  const double e = cfg.effective_energy();
  const auto plain = physics_forward(kind, f, data.grid, q, nullptr, nullptr, 0.0, 1.0, threads);
  const auto att = physics_forward(kind, f, data.grid, q, &labels, &materials, e, cfg.cm_per_unit(), threads);
  ScatterData out = data;
  for (std::size_t k = 0; k < out.values.size(); ++k)
    if (plain.values[k] != 0.0) out.values[k] *= att.values[k] / plain.values[k];
  return out;
}

}  // namespace spindle
