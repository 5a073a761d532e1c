#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spindle/phantom.hpp"
#include "spindle/recon.hpp"
#include "spindle/sparse.hpp"

using namespace spindle;

namespace {

constexpr double pi = std::numbers::pi;

class DenseOperator : public LinearOperator {
 public:
  DenseOperator(std::size_t m, std::size_t n, std::vector<double> a) : m_(m), n_(n), a_(std::move(a)) {}
  std::size_t rows() const override { return m_; }
  std::size_t cols() const override { return n_; }
  void apply(std::span<const double> x, std::span<double> y) const override {
    for (std::size_t i = 0; i < m_; ++i) {
      y[i] = 0.0;
      for (std::size_t j = 0; j < n_; ++j) y[i] += a_[i * n_ + j] * x[j];
    }
  }
  void apply_adjoint(std::span<const double> y, std::span<double> x) const override {
    for (std::size_t j = 0; j < n_; ++j) {
      x[j] = 0.0;
      for (std::size_t i = 0; i < m_; ++i) x[j] += a_[i * n_ + j] * y[i];
    }
  }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

 private:
  std::size_t m_, n_;
  std::vector<double> a_;
};

DenseOperator random_dense(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(m * n);
  for (auto& x : a) x = u(rng);
  return DenseOperator(m, n, std::move(a));
}

// (A^T A + lambda^2 I) x = A^T b by Cholesky
std::vector<double> direct_solve(const DenseOperator& a, std::span<const double> b, double lambda) {
  const std::size_t n = a.cols(), m = a.rows();
  std::vector<double> g(n * n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += a(k, i) * a(k, j);
      g[i * n + j] = s + (i == j ? lambda * lambda : 0.0);
    }
    for (std::size_t k = 0; k < m; ++k) rhs[i] += a(k, i) * b[k];
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) g[j * n + j] -= g[j * n + k] * g[j * n + k];
    g[j * n + j] = std::sqrt(g[j * n + j]);
    for (std::size_t i = j + 1; i < n; ++i) {
      for (std::size_t k = 0; k < j; ++k) g[i * n + j] -= g[i * n + k] * g[j * n + k];
      g[i * n + j] /= g[j * n + j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) rhs[i] -= g[i * n + k] * rhs[k];
    rhs[i] /= g[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) rhs[i] -= g[k * n + i] * rhs[k];
    rhs[i] /= g[i * n + i];
  }
  return rhs;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST(Sparse, TripletsAreSortedAndSummed) {
  const auto a = SparseOperator::from_triplets(3, 4, {{2, 1, 1.0}, {0, 3, 2.0}, {2, 1, 0.5}, {0, 0, -1.0}});
  EXPECT_EQ(a.nnz(), 3u);
  const auto t = a.triplets();
  EXPECT_EQ(t[0].col, 0u);
  EXPECT_EQ(t[2].value, 1.5);
  EXPECT_EQ(a.row_sum(1), 0.0);
  EXPECT_EQ(a.apply(std::vector<double>{1, 1, 1, 1}), (std::vector<double>{1.0, 0.0, 1.5}));
}

TEST(Sparse, AdjointIdentity) {
  const auto grid = ScanGrid::acquisition(3, 4, 3);
  const VolumeShape shape{8, 1.0};
  for (auto kind : {TransformKind::spindle, TransformKind::apple_interior}) {
    MatrixOptions opts;
    opts.quad = {48, 24, 12};
    const auto a = build_matrix(kind, grid, shape, opts);
    ASSERT_EQ(a.rows(), grid.size());
    ASSERT_EQ(a.cols(), shape.voxels());
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> x(a.cols()), y(a.rows());
    for (auto& v : x) v = g(rng);
    for (auto& v : y) v = g(rng);
    const double lhs = dot(a.apply(x), y), rhs = dot(x, a.apply_adjoint(y));
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(lhs));
  }
}

TEST(Sparse, RowsMatchQuadratureOnSmoothDensity) {
  const auto grid = ScanGrid::acquisition(4, 3, 3);
  const VolumeShape shape{24, 1.0};
  const Density f = [](const Vec3& x) { return std::exp(-2.0 * (x[0] * x[0] + x[1] * x[1] + (x[2] - 0.3) * (x[2] - 0.3))); };
  std::vector<double> fv(shape.voxels());
  for (std::size_t v = 0; v < fv.size(); ++v) fv[v] = f(shape.center_of(v));
  const auto a = build_matrix(TransformKind::spindle, grid, shape);
  const auto ax = a.apply(fv);
  const auto ref = forward_quad(TransformKind::spindle, f, grid);
  EXPECT_LE(relative_l2_error(ax, ref.values), 0.02);
}

TEST(Sparse, OnlyRowsLeavesOthersEmpty) {
  const auto grid = ScanGrid::acquisition(2, 2, 2);
  MatrixOptions opts;
  opts.quad = {32, 16, 8};
  opts.only_rows = {1, 6};
  const auto a = build_matrix(TransformKind::spindle, grid, VolumeShape{6, 1.0}, opts);
  for (std::size_t i = 0; i < a.rows(); ++i) EXPECT_EQ(a.row_cols(i).empty(), i != 1 && i != 6) << i;
  EXPECT_EQ(auto_quadrature(50).n_theta, 360u);
  EXPECT_EQ(auto_quadrature(50).n_phi, 180u);
}

TEST(Phantom, EmptySpecIsZero) {
  PhantomSpec s;
  s.n = 6;
  const auto p = build_phantom(s);
  for (double v : p.density.values) EXPECT_EQ(v, 0.0);
  for (double v : p.labels.values) EXPECT_EQ(v, 0.0);
}

TEST(Phantom, HollowBallShellVolume) {
  PhantomSpec s;
  s.n = 50;
  s.objects.push_back({HollowBall{{0.0, 0.0, 0.5}, 0.35, 0.27}, 2.0, "ball"});
  const auto p = build_phantom(s);
  std::size_t count = 0;
  for (double v : p.density.values) count += v == 2.0;
  const double h = 2.0 / 50;
  const double shell = 4.0 / 3.0 * pi * (std::pow(0.35, 3) - std::pow(0.27, 3));
  EXPECT_NEAR(count * h * h * h / shell, 1.0, 0.05);
  EXPECT_EQ(p.density.sample({0.0, 0.0, 0.5}), 0.0);
}

TEST(Phantom, PresetInventoryAndInvariants) {
  const auto s = PhantomSpec::preset("paper", 50);
  const auto p = build_phantom(s);
  EXPECT_EQ(p.labels.labels.size(), 4u);
  std::map<std::string, std::size_t> voxels;
  for (std::size_t v = 0; v < p.labels.values.size(); ++v) {
    EXPECT_GE(p.density.values[v], 0.0);
    if (p.density.shape.center_of(v)[2] <= 0.0) EXPECT_EQ(p.density.values[v], 0.0);
    const int id = static_cast<int>(p.labels.values[v]);
    if (id) ++voxels[p.labels.labels.at(id)];
  }
  for (const char* name : {"ball", "stairs", "block", "sheet"}) EXPECT_GT(voxels[name], 0u) << name;
  const auto again = build_phantom(PhantomSpec::from_json(s.to_json()));
  EXPECT_EQ(again.density.values, p.density.values);
  EXPECT_EQ(again.labels.values, p.labels.values);
  EXPECT_THROW(PhantomSpec::preset("other", 10), std::invalid_argument);
}

TEST(Phantom, LowerHalfObjectsAreClipped) {
  PhantomSpec s;
  s.n = 10;
  s.objects.push_back({Box{{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}}, 1.0, ""});
  const auto p = build_phantom(s);
  EXPECT_GT(p.clipped, 0u);
  for (std::size_t v = 0; v < p.density.values.size(); ++v)
    if (p.density.shape.center_of(v)[2] < 0.0) EXPECT_EQ(p.density.values[v], 0.0);
}

TEST(Recon, NoiseModel) {
  std::vector<double> b(50625);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = 1.0 + std::sin(0.01 * i);
  EXPECT_EQ(add_noise(b, 0.0, 7), b);
  EXPECT_EQ(add_noise(b, 0.01, 7), add_noise(b, 0.01, 7));
  EXPECT_NE(add_noise(b, 0.01, 7), add_noise(b, 0.01, 8));
  const auto n = add_noise(b, 0.01, 7);
  std::vector<double> d(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) d[i] = n[i] - b[i];
  const double rel = norm(d) / norm(b);
  EXPECT_GE(rel, 0.009);
  EXPECT_LE(rel, 0.011);
}

TEST(Recon, GaussianStreamMoments) {
  GaussianStream g(11);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = g.next();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Recon, IdentityConvergesInOneStep) {
  const auto id = SparseOperator::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
  const std::vector<double> b{1.0, -2.0, 0.5};
  CglsConfig cfg;
  cfg.max_iters = 1;
  const auto r = cgls_solve(id, b, cfg);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.x[i], b[i], 1e-15);
  const auto z = cgls_solve(id, std::vector<double>(3, 0.0), cfg);
  for (double v : z.x) EXPECT_EQ(v, 0.0);
}

TEST(Recon, MatchesDirectSolveAndIsMonotone) {
  const auto a = random_dense(50, 30, 5);
  std::vector<double> b(50);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (auto& v : b) v = g(rng);
  CglsConfig cfg;
  cfg.lambda = 0.1;
  cfg.max_iters = 200;
  const auto r = cgls_solve(a, b, cfg);
  const auto ref = direct_solve(a, b, 0.1);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(r.x[i], ref[i], 1e-8);
  for (std::size_t k = 1; k < r.trace.size(); ++k)
    EXPECT_LE(r.trace[k].residual, r.trace[k - 1].residual * (1 + 1e-12) + 1e-12);
  const auto free = cgls_solve(a, b, {0.0, 200, 0.0});
  const auto heavy = cgls_solve(a, b, {1e3, 200, 0.0});
  EXPECT_LT(norm(heavy.x), 1e-3 * norm(free.x));
  EXPECT_THROW(cgls_solve(a, std::vector<double>(49, 0.0), cfg), std::invalid_argument);
}

TEST(Recon, Postprocess) {
  const VolumeShape shape{4, 1.0};
  std::vector<double> neg(shape.voxels(), -1.0);
  const auto z = postprocess(neg, shape, {false, true, false});
  for (double v : z.values) EXPECT_EQ(v, 0.0);
  std::vector<double> x(shape.voxels());
  for (std::size_t v = 0; v < x.size(); ++v) x[v] = std::cos(1.7 * v);
  const PostprocessOptions all{true, true, true};
  const auto once = postprocess(x, shape, all);
  EXPECT_EQ(postprocess(once.values, shape, all).values, once.values);
  for (std::size_t v = 0; v < x.size(); ++v)
    if (shape.center_of(v)[2] < 0.0) EXPECT_EQ(once.values[v], 0.0);
  // folding adds each lower voxel to its antipode
  const auto folded = postprocess(x, shape, {true, false, false});
  const std::size_t up = shape.index(1, 2, 3), down = shape.index(2, 1, 0);
  EXPECT_DOUBLE_EQ(folded.values[up], x[up] + x[down]);
  EXPECT_EQ(folded.values[down], 0.0);
}
