#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "glh/gl_space.hpp"

using namespace glh;

namespace {

constexpr double kPi = std::numbers::pi;

Field flat_metric(const ChartGrid& g, double scale = 1.0) {
  const int n = g.dim();
  return sample_metric(g, [n, scale](auto) { return Mat(scale * scale * Mat::Identity(n, n)); });
}

ChartGrid sphere_chart(int nodes) {
  return ChartGrid({{0.5, kPi - 0.5}, {0.0, 2 * kPi}}, {nodes, nodes}, {false, true});
}

Field sphere_metric(const ChartGrid& g) {
  return sample_metric(g, [](auto x) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = std::sin(x[0]) * std::sin(x[0]);
    return m;
  });
}

Vec vec2(double a, double b) { return Eigen::Vector2d(a, b); }

TangentFunction zero_sigma() {
  return [](std::span<const double>, std::span<const double>) { return 0.0; };
}

} // namespace

TEST(DeltaDerivative, FiberIndependentFunctionGivesPlainPartial) {
  const ChartGrid g = sphere_chart(33);
  const ConformalGLSpace space(curvature_package(sphere_metric(g)), zero_sigma());
  auto F = [&](std::size_t nd, const Vec&) { return std::sin(g.coord(nd, 0)) * std::cos(g.coord(nd, 1)); };
  const std::size_t node = g.size() / 2 + 3;
  const Vec d = delta_derivative(space, F, node, vec2(0.4, -1.2));
  EXPECT_NEAR(d(0), fd_at(g, node, 0, 2, [&](std::size_t nb) { return F(nb, Vec()); }), 1e-14);
  EXPECT_NEAR(d(1), fd_at(g, node, 1, 2, [&](std::size_t nb) { return F(nb, Vec()); }), 1e-14);
}

TEST(DeltaDerivative, FlatMetricHasNoConnection) {
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {17, 17});
  const ConformalGLSpace space(curvature_package(flat_metric(g)), zero_sigma());
  auto F = [&](std::size_t nd, const Vec& y) { return g.coord(nd, 0) * y(0) * y(0) + g.coord(nd, 1) * y(1); };
  const Vec y = vec2(0.7, 0.3);
  const std::size_t node = 40;
  const Vec d = delta_derivative(space, F, node, y);
  EXPECT_NEAR(d(0), y(0) * y(0), 1e-12);
  EXPECT_NEAR(d(1), y(1), 1e-12);
}

TEST(DeltaDerivative, MetricEnergyIsHorizontallyConstant) {
  // F = gamma_kl(x) y^k y^l has d_i F = 2 Gamma^m_ik gamma_ml y^k y^l, so delta F = 0.
  for (int nodes : {33, 65}) {
    const ChartGrid g = sphere_chart(nodes);
    const ConformalGLSpace space(curvature_package(sphere_metric(g)), zero_sigma());
    auto F = [&](std::size_t nd, const Vec& y) { return y.dot(space.gamma(nd) * y); };
    double worst = 0.0;
    for (std::size_t node = 0; node < g.size(); node += 5)
      worst = std::max(worst, delta_derivative(space, F, node, vec2(0.8, 1.1)).cwiseAbs().maxCoeff());
    const double h = g.spacing(0);
    EXPECT_LT(worst, 3.0 * h * h) << nodes;
  }
}

TEST(HvCovariant, ZeroCovector) {
  const ChartGrid g = sphere_chart(17);
  const ConformalGLSpace space(curvature_package(sphere_metric(g)), zero_sigma());
  const auto d = hv_covariant(space, [](std::size_t, const Vec&) { return Vec(Vec::Zero(2)); }, 20, vec2(1, 0));
  EXPECT_EQ(d.h.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(d.v.cwiseAbs().maxCoeff(), 0.0);
}

TEST(HvCovariant, FlatFiberIndependentCovector) {
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {9, 9});
  const ConformalGLSpace space(curvature_package(flat_metric(g)), zero_sigma());
  auto X = [&](std::size_t nd, const Vec&) { return Vec(vec2(2 * g.coord(nd, 0) + g.coord(nd, 1), -3 * g.coord(nd, 1))); };
  const auto d = hv_covariant(space, X, 30, vec2(0.2, 0.9));
  EXPECT_NEAR(d.h(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(d.h(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(d.h(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(d.h(1, 1), -3.0, 1e-12);
  EXPECT_EQ(d.v.cwiseAbs().maxCoeff(), 0.0);
}

TEST(HvCovariant, ChristoffelConnectionIsMetricCompatible) {
  const ChartGrid g = sphere_chart(65);
  const ConformalGLSpace space(curvature_package(sphere_metric(g)), zero_sigma());
  double worst = 0.0;
  for (std::size_t node = 0; node < g.size(); node += 11) {
    const auto d = hv_covariant_2(space, [&](std::size_t nd, const Vec&) { return space.gamma(nd); }, node, vec2(0.3, 0.4));
    worst = std::max(worst, d.h.max_abs());
    EXPECT_EQ(d.v.max_abs(), 0.0);
  }
  const double h = g.spacing(0);
  EXPECT_LT(worst, 3.0 * h * h);
}

TEST(SigmaBlocks, ZeroSigmaGivesZeroBlocks) {
  const ChartGrid g = sphere_chart(17);
  const ConformalGLSpace space(curvature_package(sphere_metric(g)), zero_sigma());
  const SigmaBlocks b = sigma_blocks(space, 40, vec2(0.5, 0.5));
  EXPECT_EQ(b.sigma_i.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b.sigma_dot_i.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b.sigma_ij.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b.sigma_dot_ab.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b.sigmaH, 0.0);
  EXPECT_EQ(b.sigmaV, 0.0);
  EXPECT_EQ(b.sigma_bar, 0.0);
  EXPECT_EQ(b.sigma_dot, 0.0);
}

TEST(SigmaBlocks, FiberIndependentSigma) {
  const ChartGrid g = sphere_chart(33);
  const ConformalGLSpace space(curvature_package(sphere_metric(g)),
                               [](auto x, auto) { return 0.3 * std::cos(x[0]) + 0.1 * std::sin(x[1]); });
  const std::size_t node = 17 * 33 + 5;
  const SigmaBlocks b = sigma_blocks(space, node, vec2(1.0, -0.5));
  EXPECT_EQ(b.sigma_dot_i.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b.sigmaV, 0.0);
  EXPECT_EQ(b.sigma_dot_ab.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b.sigma_dot, 0.0);
  const double th = g.coord(node, 0), ph = g.coord(node, 1);
  const double h = g.spacing(0);
  EXPECT_NEAR(b.sigma_i(0), -0.3 * std::sin(th), h * h);
  EXPECT_NEAR(b.sigma_i(1), 0.1 * std::cos(ph), h * h);
  EXPECT_GE(b.sigmaH, 0.0);
}

TEST(SigmaBlocks, LogConformalClosedForms) {
  // sigma = ln(|A(y)| / |A|) on flat gamma: sigma-dot_i = A_i / A(y), sigmaV = |A|^2 / A(y)^2.
  const Vec A = vec2(0.6, -1.1);
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {9, 9});
  const ConformalGLSpace space(curvature_package(flat_metric(g)), [&](auto, auto y) {
    return std::log(std::abs(A(0) * y[0] + A(1) * y[1]) / A.norm());
  });
  const Vec y = vec2(1.3, 0.2);
  const double Ay = A.dot(y);
  const SigmaBlocks b = sigma_blocks(space, 40, y);
  // Central fiber differences leave an O(step^2) truncation error.
  EXPECT_NEAR(b.sigma_dot_i(0), A(0) / Ay, 1e-6);
  EXPECT_NEAR(b.sigma_dot_i(1), A(1) / Ay, 1e-6);
  EXPECT_NEAR(b.sigmaV, A.squaredNorm() / (Ay * Ay), 1e-5);
  // sigma-dot_a|_b = -A_a A_b / A(y)^2, so sigma-dot_ab = -gamma_ab sigmaV / 2.
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(b.sigma_dot_ab(a, c), -(a == c) * 0.5 * b.sigmaV, 1e-5);
  EXPECT_EQ(b.sigma_i.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SigmaBlocks, AntisymmetricPartComesFromHorizontalDerivative) {
  const ChartGrid g = sphere_chart(33);
  const ConformalGLSpace space(curvature_package(sphere_metric(g)), [](auto x, auto y) {
    return 0.2 * std::sin(x[0]) * y[0] + 0.1 * std::cos(x[1]) * y[1] * y[1];
  });
  const std::size_t node = 12 * 33 + 9;
  const Vec y = vec2(0.7, -0.4);
  const SigmaBlocks b = sigma_blocks(space, node, y);
  const Mat sij = hv_covariant(space, [&](std::size_t nd, const Vec& yy) { return sigma_horizontal(space, nd, yy); }, node, y).h;
  EXPECT_NEAR(b.sigma_ij(0, 1) - b.sigma_ij(1, 0), sij(0, 1) - sij(1, 0), 1e-12);

  // Fiber-independent sigma on a flat chart: sigma_{i|j} is a symmetric Hessian.
  const ChartGrid flat = ChartGrid::box({{0, 1}, {0, 1}}, {33, 33});
  const ConformalGLSpace fs(curvature_package(flat_metric(flat)), [](auto x, auto) { return std::sin(x[0] * x[1]) + x[0] * x[0]; });
  const SigmaBlocks fb = sigma_blocks(fs, 16 * 33 + 16, y);
  EXPECT_LT(std::abs(fb.sigma_ij(0, 1) - fb.sigma_ij(1, 0)), 1e-10);
}

TEST(SigmaBlocks, InvariantUnderSampleReordering) {
  const ChartGrid g = sphere_chart(17);
  const ConformalGLSpace space(curvature_package(sphere_metric(g)), [](auto x, auto y) {
    return 0.1 * std::sin(x[0] + y[0]) + 0.05 * y[1] * y[1];
  });
  std::vector<TangentSample> s{{40, vec2(1, 0)}, {70, vec2(0.3, 0.8)}, {100, vec2(-0.5, 0.5)}};
  std::vector<TangentSample> r{s[2], s[0], s[1]};
  const auto a = sigma_blocks(space, s);
  const auto b = sigma_blocks(space, r);
  EXPECT_EQ(a[0].sigma_bar, b[1].sigma_bar);
  EXPECT_EQ(a[1].sigma_dot, b[2].sigma_dot);
  EXPECT_EQ(a[2].sigma_dot, b[0].sigma_dot);
}

TEST(SigmaBlocks, ConstantRescalingOfGamma) {
  // gamma -> c^2 gamma leaves Gamma, N, sigma_i, sigma-dot_i unchanged and scales sigmaH, sigmaV by 1/c^2.
  const double c = 1.7;
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {17, 17});
  auto sigma = [](auto x, auto y) { return 0.3 * x[0] * x[1] + 0.2 * std::log(1.0 + y[0] * y[0] + 0.5 * y[1] * y[1]); };
  auto curved = [&](double s) {
    return sample_metric(g, [s](auto x) {
      Mat m(2, 2);
      m << 1.0 + 0.2 * x[0], 0.1 * x[1], 0.1 * x[1], 1.2 + 0.1 * x[0] * x[1];
      return Mat(s * s * m);
    });
  };
  const ConformalGLSpace a(curvature_package(curved(1.0)), sigma);
  const ConformalGLSpace b(curvature_package(curved(c)), sigma);
  const Vec y = vec2(0.4, 0.9);
  const std::size_t node = 8 * 17 + 8;
  EXPECT_LT((a.nonlinear_connection(node, y) - b.nonlinear_connection(node, y)).cwiseAbs().maxCoeff(), 1e-12);
  const SigmaBlocks ba = sigma_blocks(a, node, y), bb = sigma_blocks(b, node, y);
  EXPECT_LT((ba.sigma_i - bb.sigma_i).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((ba.sigma_dot_i - bb.sigma_dot_i).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(bb.sigmaH, ba.sigmaH / (c * c), 1e-12);
  EXPECT_NEAR(bb.sigmaV, ba.sigmaV / (c * c), 1e-12);
}
