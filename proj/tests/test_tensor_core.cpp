#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "glh/tensor_core.hpp"

using namespace glh;

namespace {

constexpr double kPi = std::numbers::pi;

ChartGrid unit_interval(int nodes, int order = 2) { return ChartGrid::box({{0.0, 1.0}}, {nodes}, order); }

Mat random_spd(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = u(rng);
  return a * a.transpose() + n * Mat::Identity(n, n);
}

} // namespace

TEST(ChartGrid, SpacingFollowsPeriodicity) {
  const ChartGrid closed = ChartGrid::box({{0.0, 2.0}}, {9});
  const ChartGrid torus = ChartGrid::torus({{0.0, 2.0}}, {8});
  EXPECT_DOUBLE_EQ(closed.spacing(0), 0.25);
  EXPECT_DOUBLE_EQ(torus.spacing(0), 0.25);
  EXPECT_DOUBLE_EQ(closed.coord(8, 0), 2.0);
  EXPECT_DOUBLE_EQ(torus.coord(7, 0), 1.75);
}

TEST(ChartGrid, RejectsTooFewNodes) {
  EXPECT_THROW(ChartGrid::box({{0.0, 1.0}}, {4}), StencilSupportError);
  EXPECT_THROW(ChartGrid::box({{0.0, 1.0}}, {8}, 3), Error);
}

TEST(ChartGrid, IndexRoundTrip) {
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 2}, {-1, 1}}, {5, 6, 7});
  for (std::size_t n = 0; n < g.size(); ++n) EXPECT_EQ(g.flat_index(g.multi_index(n)), n);
  const auto [nb, wraps] = ChartGrid::torus({{0, 1}}, {8}).shifted(0, 0, -2);
  EXPECT_EQ(nb, 6u);
  EXPECT_EQ(wraps, -1);
}

TEST(FdPartial, LinearFieldIsExact) {
  for (int order : {2, 4}) {
    const ChartGrid g = unit_interval(33, order);
    const Field f = sample_scalar(g, [](auto x) { return 3.0 * x[0]; });
    const Field d = fd_partial(f, 0);
    for (std::size_t n = 0; n < g.size(); ++n) EXPECT_NEAR(d(n, 0), 3.0, 1e-12);
  }
}

TEST(FdPartial, ConstantHasZeroDerivative) {
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {9, 7});
  const Field f = sample_scalar(g, [](auto) { return 4.25; });
  for (int a = 0; a < 2; ++a) EXPECT_EQ(fd_partial(f, a).max_abs(), 0.0);
}

TEST(FdPartial, PolynomialExactnessUpToStencilOrder) {
  // Interior and one-sided stencils of order p differentiate degree-p polynomials exactly.
  for (int order : {2, 4}) {
    const ChartGrid g = ChartGrid::box({{-0.5, 1.5}}, {17}, order);
    const Field f = sample_scalar(g, [&](auto x) { return std::pow(x[0] + 0.3, order); });
    const Field d = fd_partial(f, 0);
    for (std::size_t n = 0; n < g.size(); ++n)
      EXPECT_NEAR(d(n, 0), order * std::pow(g.coord(n, 0) + 0.3, order - 1), 1e-11) << "order " << order;
  }
}

TEST(FdPartial, PeriodicSineFourthOrder) {
  // The order-4 central stencil maps sin(ka) to (8 sin(kh) - sin(2kh))/(6h) cos(ka),
  // so the largest error is the modified-wavenumber gap k - (8 sin kh - sin 2kh)/(6h).
  const ChartGrid g = ChartGrid::torus({{0.0, 1.0}}, {64}, 4);
  const double k = 2 * kPi;
  const Field f = sample_scalar(g, [&](auto x) { return std::sin(k * x[0]); });
  const Field d = fd_partial(f, 0);
  double worst = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) worst = std::max(worst, std::abs(d(n, 0) - k * std::cos(k * g.coord(n, 0))));
  const double h = g.spacing(0);
  const double modified_gap = k - (8 * std::sin(k * h) - std::sin(2 * k * h)) / (6 * h);
  EXPECT_NEAR(worst, modified_gap, 1e-10);
  EXPECT_LT(worst, 2e-5);

  const ChartGrid fine = ChartGrid::torus({{0.0, 1.0}}, {80}, 4);
  const Field ff = sample_scalar(fine, [&](auto x) { return std::sin(k * x[0]); });
  const Field fd = fd_partial(ff, 0);
  double fine_worst = 0.0;
  for (std::size_t n = 0; n < fine.size(); ++n)
    fine_worst = std::max(fine_worst, std::abs(fd(n, 0) - k * std::cos(k * fine.coord(n, 0))));
  EXPECT_LT(fine_worst, 1e-5);
}

TEST(FdPartial, SeamJumpDifferentiatesLiftedIdentity) {
  const ChartGrid g = ChartGrid::torus({{0.0, 2 * kPi}}, {16}, 4);
  const Field f = sample_scalar(g, [](auto x) { return x[0]; });
  const double jump = 2 * kPi;
  const Field d = fd_partial(f, 0, 4, std::span<const double>(&jump, 1));
  for (std::size_t n = 0; n < g.size(); ++n) EXPECT_NEAR(d(n, 0), 1.0, 1e-12);
}

TEST(InvertMetric, IdentityAndDiagonal) {
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {5, 5});
  const Field id = sample_metric(g, [](auto) { return Mat::Identity(2, 2); });
  const Field id_inv = invert_metric(id);
  EXPECT_EQ(id_inv.values(), id.values());
  const Field diag = sample_metric(g, [](auto) { return Mat(Eigen::Vector2d(4.0, 9.0).asDiagonal()); });
  const Field inv = invert_metric(diag);
  for (std::size_t n = 0; n < g.size(); ++n) {
    EXPECT_DOUBLE_EQ(inv.at(n, {0, 0}), 0.25);
    EXPECT_DOUBLE_EQ(inv.at(n, {1, 1}), 1.0 / 9.0);
    EXPECT_EQ(inv.at(n, {0, 1}), 0.0);
  }
  EXPECT_EQ(inv.shape().kinds[0], Variance::Up);
}

TEST(InvertMetric, RandomSpdProductIsIdentity) {
  std::mt19937 rng(7);
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {6, 6});
  Field m(g, metric_shape(3));
  for (std::size_t n = 0; n < g.size(); ++n) m.set_matrix(n, random_spd(rng, 3));
  const Field inv = invert_metric(m);
  for (std::size_t n = 0; n < g.size(); ++n)
    EXPECT_LT((m.matrix(n) * inv.matrix(n) - Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  // Inverting twice returns the input.
  EXPECT_LT((invert_metric(inv) - m).max_abs(), 1e-10);
}

TEST(InvertMetric, SingularMetricNamesNode) {
  const ChartGrid g = unit_interval(5);
  Field m = sample_metric(g, [](auto) { return Mat::Identity(2, 2); });
  m.set_matrix(3, Mat::Zero(2, 2));
  try {
    invert_metric(m);
    FAIL() << "expected SingularMetricError";
  } catch (const SingularMetricError& e) {
    EXPECT_EQ(e.node(), 3u);
    EXPECT_NEAR(e.coordinates().at(0), 0.75, 1e-15);
  }
  Field ill = sample_metric(g, [](auto) { return Mat(Eigen::Vector2d(1.0, 1e-14).asDiagonal()); });
  EXPECT_THROW(invert_metric(ill), SingularMetricError);
}

TEST(Quadrature, ConstantsAndPeriodicTrig) {
  const ChartGrid square = ChartGrid::box({{0, 1}, {0, 1}}, {11, 7});
  EXPECT_NEAR(quadrature(sample_scalar(square, [](auto) { return 1.0; })), 1.0, 1e-15);
  const ChartGrid circle = ChartGrid::torus({{0, 2 * kPi}}, {64});
  EXPECT_NEAR(quadrature(sample_scalar(circle, [](auto) { return 1.0; })), 2 * kPi, 1e-13);
  EXPECT_NEAR(quadrature(sample_scalar(circle, [](auto x) { return std::pow(std::sin(x[0]), 2); })), kPi, 1e-10);
}

TEST(Quadrature, ConstantTimesVolume) {
  const ChartGrid g({{-1, 2}, {0, 0.5}, {3, 7}}, {5, 9, 6}, {false, true, false});
  EXPECT_NEAR(quadrature(sample_scalar(g, [](auto) { return 2.5; })), 2.5 * 3 * 0.5 * 4, 1e-13);
}

TEST(Contract, KroneckerAndInverse) {
  const ChartGrid g = unit_interval(5);
  Field delta(g, Shape({3, 3}, {Variance::Up, Variance::Down}));
  Field v(g, vector_shape(3));
  for (std::size_t n = 0; n < g.size(); ++n)
    for (int i = 0; i < 3; ++i) {
      delta.at(n, {i, i}) = 1.0;
      v.at(n, {i}) = n + 0.5 * i;
    }
  EXPECT_EQ((contract(delta, v, {{1, 0}}) - v).max_abs(), 0.0);

  std::mt19937 rng(3);
  Field gam(g, metric_shape(3));
  for (std::size_t n = 0; n < g.size(); ++n) gam.set_matrix(n, random_spd(rng, 3));
  const Field mixed = contract(invert_metric(gam), gam, {{1, 0}});
  for (std::size_t n = 0; n < g.size(); ++n)
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(mixed.at(n, {i, k}), i == k ? 1.0 : 0.0, 1e-12);
}

TEST(Contract, VarianceMismatchRejected) {
  const ChartGrid g = unit_interval(5);
  Field a(g, covector_shape(2)), b(g, covector_shape(2));
  EXPECT_THROW(contract(a, b, {{0, 0}}), ContractionError);
  Field c(g, vector_shape(3));
  EXPECT_THROW(contract(a, c, {{0, 0}}), ContractionError);
}

TEST(Contract, FullContractionMatchesLoops) {
  // g^{ab} h_ij T^i_a T^j_b, with T stored as (i, a).
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {5, 5});
  const int m = 2, n = 3;
  Field ginv(g, inverse_metric_shape(m)), h(g, metric_shape(n));
  Field T(g, Shape({n, m}, {Variance::Up, Variance::Down}));
  for (std::size_t k = 0; k < g.size(); ++k) {
    ginv.set_matrix(k, random_spd(rng, m));
    h.set_matrix(k, random_spd(rng, n));
    for (auto& x : T.node(k)) x = u(rng);
  }
  const Field hT = contract(h, T, {{0, 0}});         // (j, i->?) : h_{j i} T^i_a -> slots (j, a)
  const Field hTT = contract(hT, T, {{0, 0}});       // (a, b)
  const Field s = contract(ginv, hTT, {{0, 0}, {1, 1}});
  for (std::size_t k = 0; k < g.size(); ++k) {
    double ref = 0.0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) ref += ginv.at(k, {a, b}) * h.at(k, {i, j}) * T.at(k, {i, a}) * T.at(k, {j, b});
    EXPECT_NEAR(s(k, 0), ref, 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Contract, Multilinear) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  const ChartGrid g = unit_interval(6);
  Field t1(g, Shape({2, 3}, {Variance::Up, Variance::Down})), t1b = t1, t2(g, vector_shape(3));
  for (auto* f : {&t1, &t1b, &t2})
    for (double& x : f->values()) x = u(rng);
  const double alpha = 0.7, beta = -1.3;
  const Field lhs = contract(alpha * t1 + beta * t1b, t2, {{1, 0}});
  const Field rhs = alpha * contract(t1, t2, {{1, 0}}) + beta * contract(t1b, t2, {{1, 0}});
  EXPECT_LT((lhs - rhs).max_abs(), 1e-14);
}

TEST(Parallel, ThreadCountDoesNotChangeResults) {
  std::vector<double> a(1000), b(1000);
  set_thread_count(1);
  parallel_for(a.size(), [&](std::size_t i) { a[i] = std::sin(0.1 * i); });
  set_thread_count(4);
  parallel_for(b.size(), [&](std::size_t i) { b[i] = std::sin(0.1 * i); });
  set_thread_count(1);
  EXPECT_EQ(a, b);
}
