#include "spindle/recon.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace spindle {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

constexpr double kRoundoffTol = 1e-12;

}  // namespace

double GaussianStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // (k + 1) / 2^53 lies in (0, 1], so the logarithm is finite.
  auto uniform = [this] { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; };
  const double u1 = uniform(), u2 = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  spare_ = rad * std::sin(ang);
  has_spare_ = true;
  return rad * std::cos(ang);
}

std::vector<double> add_noise(std::span<const double> b, double eps, std::uint64_t seed) {
  if (b.empty()) throw std::invalid_argument("cannot add noise to an empty data vector");
  if (!(eps >= 0.0)) throw std::invalid_argument("noise level must be >= 0");
  std::vector<double> out(b.begin(), b.end());
  if (eps == 0.0) return out;
  const double scale = eps * std::sqrt(dot(b, b)) / std::sqrt(static_cast<double>(b.size()));
  GaussianStream g(seed);
  for (auto& v : out) v += scale * g.next();
  return out;
}

CglsResult cgls_solve(const LinearOperator& A, std::span<const double> b, const CglsConfig& cfg,
                      const std::function<void(int, std::span<const double>)>& on_iterate) {
  if (b.size() != A.rows())
    throw std::invalid_argument("data length " + std::to_string(b.size()) + " does not match operator rows " +
                                std::to_string(A.rows()));
  if (!(cfg.lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  const double l2 = cfg.lambda * cfg.lambda;
  const std::size_t n = A.cols();

  CglsResult res;
  res.x.assign(n, 0.0);
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> s = A.apply_adjoint(r);
  std::vector<double> p = s, q(A.rows());
  double gamma = dot(s, s);
  const double gamma0 = gamma;
  double rr = dot(r, r), xx = 0.0;
  res.trace.push_back({0, std::sqrt(rr), 0.0});

  for (int it = 1; it <= cfg.max_iters; ++it) {
    if (gamma == 0.0) break;
    A.apply(p, q);
    const double delta = dot(q, q) + l2 * dot(p, p);
    if (!std::isfinite(delta) || delta <= 0.0)
      throw std::runtime_error("CGLS breakdown at iteration " + std::to_string(it) + ": curvature " +
                               std::to_string(delta));
    const double alpha = gamma / delta;
    for (std::size_t i = 0; i < n; ++i) res.x[i] += alpha * p[i];
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= alpha * q[i];
    A.apply_adjoint(r, s);
    for (std::size_t i = 0; i < n; ++i) s[i] -= l2 * res.x[i];
    const double gamma_new = dot(s, s);
    if (!std::isfinite(gamma_new)) throw std::runtime_error("CGLS produced NaN at iteration " + std::to_string(it));
    const double beta = gamma_new / gamma;
    for (std::size_t i = 0; i < n; ++i) p[i] = s[i] + beta * p[i];
    gamma = gamma_new;
    rr = dot(r, r);
    xx = dot(res.x, res.x);
    res.trace.push_back({it, std::sqrt(rr + l2 * xx), std::sqrt(xx)});
    res.iterations = it;
    if (on_iterate) on_iterate(it, res.x);
    if (cfg.rel_tol > 0.0 && std::sqrt(gamma) <= cfg.rel_tol * std::sqrt(gamma0)) break;
    // converged to roundoff: further steps only lose conjugacy and drift
    if (std::sqrt(gamma) <= kRoundoffTol * std::sqrt(gamma0)) break;
  }
  return res;
}

void write_trace_csv(const std::string& path, const std::vector<CglsTraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "iter,residual,solution_norm\n";
  for (const auto& t : trace) out << t.iter << ',' << t.residual << ',' << t.solution_norm << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

VoxelVolume postprocess(std::span<const double> x, const VolumeShape& shape, const PostprocessOptions& opts) {
  if (x.size() != shape.voxels())
    throw std::invalid_argument("volume vector has length " + std::to_string(x.size()) + ", expected " +
                                std::to_string(shape.voxels()));
  VoxelVolume v(shape);
  v.values.assign(x.begin(), x.end());
  const std::size_t n = shape.n;
  if (opts.fold) {
    // The antipode of voxel (i, j, k) is (n-1-i, n-1-j, n-1-k).
    for (std::size_t k = 0; k < n; ++k) {
      if (!(shape.center(k) < 0.0)) continue;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          double& lower = v.at(i, j, k);
          v.at(n - 1 - i, n - 1 - j, n - 1 - k) += lower;
          lower = 0.0;
        }
    }
  }
  if (opts.clip_negative)
    for (auto& e : v.values) e = std::max(e, 0.0);
  if (opts.zero_lower)
    for (std::size_t k = 0; k < n; ++k) {
      if (!(shape.center(k) < 0.0)) continue;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) v.at(i, j, k) = 0.0;
    }
  return v;
}

double relative_l2_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("vectors differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

}  // namespace spindle
