#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "glh/interpretations.hpp"

using namespace glh;
using std::numbers::pi;

namespace {

Mat metric2(double a, double b, double c) {
  Mat m(2, 2);
  m << a, b, b, c;
  return m;
}

Field box_phi(const ChartGrid& g) {
  return sample_metric(g, [](auto a) { return metric2(1.0 + 0.2 * a[0], 0.05, 1.0 + 0.1 * a[1]); });
}

Mat wavy_psi(const Vec& x) {
  return metric2(1.2 + 0.3 * std::sin(x(0)), 0.1 * std::cos(x(0) + x(1)), 1.0 + 0.2 * std::cos(x(1)));
}

Mat one(const Vec&) { return Mat::Ones(1, 1); }

Vec rotation(const Vec& x) { return Vec(Eigen::Vector2d(-x(1), x(0))); }

// u(a) = 1 + a0 + 0.5 a1 + 0.2 sin(2 a0 + a1) and its exact differential.
double pfaff_u(double a0, double a1) { return 1.0 + a0 + 0.5 * a1 + 0.2 * std::sin(2 * a0 + a1); }

Field pfaff_A(const ChartGrid& g) {
  return Field::sample(g, covector_shape(2), [](auto a, auto o) {
    const double c = 0.2 * std::cos(2 * a[0] + a[1]);
    o[0] = 1.0 + 2 * c;
    o[1] = 0.5 + c;
  });
}

MapJet pfaff_solution(const ChartGrid& g) {
  return MapJet::sample(g, 1, [](auto a) { return Vec(Vec::Constant(1, pfaff_u(a[0], a[1]))); });
}

// Explicit index loops for <T, S>.
double loop_product(const Mat& phi_inv, const Mat& psi, const Mat& T, const Mat& S) {
  double acc = 0.0;
  for (int a = 0; a < T.cols(); ++a)
    for (int b = 0; b < T.cols(); ++b)
      for (int i = 0; i < T.rows(); ++i)
        for (int j = 0; j < T.rows(); ++j) acc += phi_inv(a, b) * psi(i, j) * T(i, a) * S(j, b);
  return acc;
}

} // namespace

TEST(ScalarProduct, MatchesIndexLoopsAndCauchySchwarz) {
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {7, 7});
  const Field phi = box_phi(g);
  const MapJet f = MapJet::sample(g, 2, [](auto a) { return Vec(Eigen::Vector2d(a[0] + a[1], a[0] * a[1])); });
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  const Shape s({2, 2}, {Variance::Up, Variance::Down});
  const Field T = Field::sample(g, s, [&](auto, auto o) { for (auto& v : o) v = nd(rng); });
  const Field S = Field::sample(g, s, [&](auto, auto o) { for (auto& v : o) v = nd(rng); });
  const Field ts = section_scalar_product(T, S, phi, wavy_psi, f);
  const Field tt = section_scalar_product(T, T, phi, wavy_psi, f);
  const Field ss = section_scalar_product(S, S, phi, wavy_psi, f);
  const Field st = section_scalar_product(S, T, phi, wavy_psi, f);
  for (std::size_t node = 0; node < g.size(); ++node) {
    const Mat pi_ = invert_symmetric(phi.matrix(node));
    EXPECT_NEAR(ts(node, 0), loop_product(pi_, wavy_psi(f.f(node)), T.matrix(node), S.matrix(node)), 1e-12);
    EXPECT_NEAR(ts(node, 0), st(node, 0), 1e-12);
    EXPECT_LE(ts(node, 0) * ts(node, 0), tt(node, 0) * ss(node, 0) * (1 + 1e-12));
  }
}

TEST(FunctionalLT, PfaffSolutionAttainsHalfVolume) {
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {33, 33}, 4);
  const Field phi = box_phi(g);
  const auto sys = FirstOrderSystem::pfaff(pfaff_A(g));
  const auto c = certify_theorem(pfaff_solution(g), sys, phi, one, 1e-6, 1e-3);
  EXPECT_TRUE(c.verdict);
  EXPECT_LT(std::abs(c.gap), 1e-6);
  EXPECT_NEAR(c.half_volume, 0.5 * quadrature(volume_density(phi)), 1e-15);
  EXPECT_NEAR(c.K_min, 1.0, 1e-3);
  EXPECT_NEAR(c.K_max, 1.0, 1e-3);
}

TEST(FunctionalLT, LowerBoundHoldsForRandomPerturbations) {
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {17, 17}, 4);
  const Field phi = box_phi(g);
  const auto sys = FirstOrderSystem::pfaff(pfaff_A(g));
  const MapJet f = pfaff_solution(g);
  const double half = half_volume(phi);
  std::mt19937_64 rng(11);
  int above = 0;
  for (int k = 0; k < 50; ++k) {
    const MapJet p = random_bump_perturbation(f, 0.1, rng);
    const double v = functional_LT(p, sys, phi, one);
    EXPECT_GE(v, half - 1e-9);
    if (v - half > 1e-6) ++above;
  }
  EXPECT_EQ(above, 50);
}

TEST(FunctionalLT, RescaledSolutionMinimizesWithoutSolving) {
  // d(2u) = 2A: still a minimizer (K = 2) but not a solution.
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {33, 33}, 4);
  const Field phi = box_phi(g);
  const auto sys = FirstOrderSystem::pfaff(pfaff_A(g));
  const MapJet f = MapJet::sample(g, 1, [](auto a) { return Vec(Vec::Constant(1, 2 * pfaff_u(a[0], a[1]))); });
  const auto c = certify_theorem(f, sys, phi, one, 1e-6, 1e-3);
  EXPECT_LT(std::abs(c.gap), 1e-6);
  EXPECT_GT(c.max_defect, 0.5);
  EXPECT_FALSE(c.verdict);
  EXPECT_NEAR(c.K_min, 2.0, 1e-3);
  EXPECT_NEAR(c.K_max, 2.0, 1e-3);
  EXPECT_LT(c.max_K_defect, 1e-3);
}

TEST(FunctionalLT, VanishingPairingIsADomainError) {
  const ChartGrid g = ChartGrid::box({{-1, 1}, {-1, 1}}, {5, 5});
  const Field phi = sample_metric(g, [](auto) { return Mat(Mat::Identity(2, 2)); });
  const Field A = Field::sample(g, covector_shape(2), [](auto, auto o) { o[0] = 1.0; o[1] = 0.0; });
  // f = a0^2 has df = 0 on the line a0 = 0.
  const MapJet f = MapJet::sample(g, 1, [](auto a) { return Vec(Vec::Constant(1, a[0] * a[0])); });
  try {
    functional_LT(f, FirstOrderSystem::pfaff(A), phi, one);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    ASSERT_EQ(e.nodes().size(), 5u);
    for (std::size_t node : e.nodes()) EXPECT_EQ(g.axis_index(node, 0), 2);
  }
}

TEST(FunctionalLT, DensityMatchesIndexLoops) {
  const ChartGrid g = ChartGrid::torus({{0, 2 * pi}, {0, 2 * pi}}, {9, 9});
  const Field phi = sample_metric(g, [](auto a) { return metric2(1.0 + 0.2 * std::sin(a[0]), 0.1, 1.1); });
  const Field A1 = Field::sample(g, covector_shape(2), [](auto a, auto o) { o[0] = 1.0; o[1] = 0.2 * std::sin(a[1]); });
  const Field A2 = Field::sample(g, covector_shape(2), [](auto a, auto o) { o[0] = 0.1 * std::cos(a[0]); o[1] = 1.0; });
  const std::vector<PointVector> xi{[](const Vec&) { return Vec(Eigen::Vector2d(1, 0)); },
                                    [](const Vec& x) { return Vec(Eigen::Vector2d(0.1 * x(0), 1)); }};
  const auto sys = FirstOrderSystem::group(2, xi, {A1, A2});
  const MapJet f = MapJet::sample(
      g, 2, [](auto a) { return Vec(Eigen::Vector2d(a[0] + 0.2 * std::sin(a[1]), a[1] + 0.1 * std::cos(a[0]))); },
      {2 * pi, 0, 0, 2 * pi});
  const LTDensity d = lt_density(f, sys, phi, wavy_psi);
  for (std::size_t node = 0; node < g.size(); ++node) {
    const Mat pi_ = invert_symmetric(phi.matrix(node));
    const Mat ps = wavy_psi(f.f(node));
    const Mat J = f.J(node);
    Mat T = xi[0](f.f(node)) * A1.vector(node).transpose() + xi[1](f.f(node)) * A2.vector(node).transpose();
    const double jt = loop_product(pi_, ps, J, T);
    const double expect = loop_product(pi_, ps, T, T) * loop_product(pi_, ps, J, J) / (jt * jt);
    EXPECT_NEAR(d.integrand(node, 0), expect, 1e-12 * expect);
    EXPECT_GE(d.integrand(node, 0), 1.0 - 1e-12);
  }
}

TEST(Orbit, MetricIsHomogeneousOfDegreeMinusTwoAndGuarded) {
  const TargetMetric h = orbit_metric(rotation, wavy_psi);
  const Vec x = Eigen::Vector2d(0.7, -0.3);
  const Vec y = Eigen::Vector2d(0.2, 0.9);
  EXPECT_LT((h(x, 2.0 * y) - 0.25 * h(x, y)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((h(x, -y) - h(x, y)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((orbit_metric([](const Vec& p) { return Vec(-3.0 * rotation(p)); }, wavy_psi)(x, y) - h(x, y)).cwiseAbs().maxCoeff(),
            1e-12);
  const Mat at_xi = h(x, rotation(x));
  const double n2 = rotation(x).dot(wavy_psi(x) * rotation(x));
  EXPECT_LT((at_xi - wavy_psi(x) / n2).cwiseAbs().maxCoeff(), 1e-12);
  // A direction annihilated by xi_flat.
  const Vec flat = wavy_psi(x) * rotation(x);
  const Vec bad = Eigen::Vector2d(-flat(1), flat(0));
  EXPECT_THROW(h(x, bad), SingularDirectionError);
}

TEST(Orbit, RK4OrbitOfRotationIsHarmonic) {
  const PointMetric psi = [](const Vec&) { return Mat(Mat::Identity(2, 2)); };
  double prev = 0.0;
  for (int nodes : {26, 51, 101}) {
    const ChartGrid line = ChartGrid::box({{0, pi / 2}}, {nodes}, 4);
    const MapJet c = integrate_orbit(rotation, Eigen::Vector2d(1, 0), line, line.spacing(0));
    EXPECT_NEAR(c.f(static_cast<std::size_t>(nodes - 1))(1), 1.0, 1e-6);
    const double r = orbit_geodesic_residual(c, rotation, psi).max_abs();
    EXPECT_LT(r, 1e-4);
    if (prev > 0.0) {
      EXPECT_GT(prev / r, 8.0);
    }
    prev = r;
  }
}

TEST(Orbit, ClosedFormMatchesFirstSpecialCase) {
  const ChartGrid line = ChartGrid::box({{0, 1}}, {41}, 4);
  const MapJet c = MapJet::sample(line, 2, [](auto t) {
    const double r = 1.0 + 0.5 * t[0] * t[0];
    return Vec(Eigen::Vector2d(r * std::cos(t[0]), r * std::sin(t[0])));
  });
  const Field a = orbit_geodesic_residual(c, rotation, wavy_psi);
  const Field b = el_residual_case_star(c, unit_metric(line), orbit_case_data(line, rotation, wavy_psi));
  EXPECT_GT(a.max_abs(), 1e-2);
  EXPECT_LT((a - b).max_abs(), 1e-6 * a.max_abs());
}

TEST(Orbit, ReparametrizedOrbitIsStillHarmonic) {
  // The orbit Lagrangian is homogeneous of degree zero in the velocity.
  const PointMetric psi = [](const Vec&) { return Mat(Mat::Identity(2, 2)); };
  const ChartGrid line = ChartGrid::box({{0, 1}}, {201}, 4);
  const MapJet fast = MapJet::sample(line, 2, [](auto t) {
    const double s = t[0] + t[0] * t[0];
    return Vec(Eigen::Vector2d(std::cos(s), std::sin(s)));
  });
  EXPECT_LT(orbit_geodesic_residual(fast, rotation, psi).max_abs(), 1e-5);
}

TEST(Orbit, SpiralIsNotHarmonic) {
  // Logarithmic spirals keep a constant angle with xi and are critical too;
  // a spiral whose angle varies is not.
  const PointMetric psi = [](const Vec&) { return Mat(Mat::Identity(2, 2)); };
  const ChartGrid line = ChartGrid::box({{0, 1}}, {201}, 4);
  const MapJet log_spiral = MapJet::sample(line, 2, [](auto t) {
    const double r = std::exp(0.5 * t[0]);
    return Vec(Eigen::Vector2d(r * std::cos(t[0]), r * std::sin(t[0])));
  });
  EXPECT_LT(orbit_geodesic_residual(log_spiral, rotation, psi).max_abs(), 1e-6);
  const MapJet spiral = MapJet::sample(line, 2, [](auto t) {
    const double r = 1.0 + 0.5 * t[0] * t[0];
    return Vec(Eigen::Vector2d(r * std::cos(t[0]), r * std::sin(t[0])));
  });
  EXPECT_GT(orbit_geodesic_residual(spiral, rotation, psi).max_abs(), 1e-2);
}

TEST(Orbit, OrbitSolvesTheSystemAndAttainsHalfVolume) {
  const ChartGrid line = ChartGrid::box({{0, pi / 2}}, {201}, 4);
  const MapJet c = integrate_orbit(rotation, Eigen::Vector2d(1, 0), line, 1e-3);
  const auto cert = certify_theorem(c, FirstOrderSystem::orbit(2, rotation), unit_metric(line), wavy_psi, 1e-8, 1e-6);
  EXPECT_TRUE(cert.verdict) << cert.gap << " " << cert.max_defect;
}

TEST(Pfaff, MetricHasTheProjectedForm) {
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {5, 5});
  const Field phi = box_phi(g);
  const Field A = pfaff_A(g);
  const SourceMetric gm = pfaff_metric(A, phi);
  const Vec b = Eigen::Vector2d(0.4, -0.1);
  for (std::size_t node = 0; node < g.size(); ++node) {
    const Vec a = A.vector(node);
    const double ab = a.dot(b);
    const double n2 = a.dot(invert_symmetric(phi.matrix(node)) * a);
    EXPECT_LT((gm(node, b) - ab * ab / n2 * phi.matrix(node)).cwiseAbs().maxCoeff(), 1e-13);
  }
  const Vec kernel = Eigen::Vector2d(-A.vector(0)(1), A.vector(0)(0));
  EXPECT_THROW(gm(0, kernel), SingularDirectionError);
}

TEST(Pfaff, DisplayPartialsNeedTheConformalPrefactor) {
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {17, 17}, 4);
  const Field phi = box_phi(g);
  const Field A = pfaff_A(g);
  const MapJet f = MapJet::sample(g, 1, [](auto a) { return Vec(Vec::Constant(1, 1 + 0.7 * a[0] + a[1] + 0.3 * a[0] * a[1])); });
  const Field ref = el_residual_case_dstar(f, phi, pfaff_case_data(A, phi));
  const Field general = el_residual(f, HarmonicMapProblem(phi, GLMetricPair::general(pfaff_metric(A, phi),
                                                                                     [](const Vec&, const Vec&) { return Mat(Mat::Ones(1, 1)); }),
                                                          ConnectionTensorP::base_from_form(2, 1, [](const Vec&) { return Vec(Vec::Ones(1)); })));
  const Field display = el_residual_from(pfaff_display_partials(f, A, phi), volume_density(phi));
  const Field literal = el_residual_from(pfaff_display_partials(f, A, phi, true), volume_density(phi));
  const double scale = ref.max_abs();
  EXPECT_GT(scale, 1e-2);
  EXPECT_LT((display - ref).max_abs(), 1e-6 * scale);
  EXPECT_LT((general - ref).max_abs(), 1e-5 * scale);
  EXPECT_GT((literal - ref).max_abs(), 1e-2 * scale);
}

TEST(Pfaff, SolutionIsCritical) {
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {33, 33}, 4);
  const Field phi = box_phi(g);
  const Field A = pfaff_A(g);
  const Field r = el_residual_case_dstar(pfaff_solution(g), phi, pfaff_case_data(A, phi));
  const MapJet other = MapJet::sample(g, 1, [](auto a) { return Vec(Vec::Constant(1, pfaff_u(a[0], a[1]) + 0.1 * a[0] * a[0])); });
  const Field r2 = el_residual_case_dstar(other, phi, pfaff_case_data(A, phi));
  EXPECT_LT(r.max_abs(), 1e-2 * r2.max_abs());
}

namespace {

struct Exponential {
  ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {65, 65});
  Eigen::Vector2d v{0.7, 0.4};
  double w = 0.1;
  Field phi = sample_metric(g, [](auto) { return Mat(Mat::Identity(2, 2)); });
  Field A = Field::sample(g, covector_shape(2), [this](auto a, auto o) {
    const double e = std::exp(v(0) * a[0] + v(1) * a[1] + w);
    o[0] = e * v(0);
    o[1] = e * v(1);
  });
  MapJet f = MapJet::sample(g, 1, [this](auto a) { return Vec(Vec::Constant(1, std::exp(v(0) * a[0] + v(1) * a[1] + w))); });
};

} // namespace

TEST(Pseudolinear, EnergyOfTheScenarioEqualsLT) {
  Exponential e;
  const auto s = pseudolinear_scenario(1, [](const Vec&) { return Vec(Vec::Ones(1)); }, e.A, e.phi, one);
  const MapJet other = MapJet::sample(e.g, 1, [](auto a) { return Vec(Vec::Constant(1, 1 + a[0] + 0.3 * a[1] * a[1])); });
  for (const MapJet* f : std::vector<const MapJet*>{&e.f, &other})
    EXPECT_NEAR(energy(*f, s.problem()), functional_LT(*f, s.system, e.phi, one), 1e-12);
}

TEST(Pseudolinear, ExponentialExampleIsCertified) {
  Exponential e;
  const auto s = pseudolinear_scenario(1, [](const Vec&) { return Vec(Vec::Ones(1)); }, e.A, e.phi, one);
  const auto c = certify_theorem(e.f, s.system, e.phi, one, 1e-6, 5e-3);
  EXPECT_TRUE(c.verdict) << c.gap << " " << c.max_defect;
  EXPECT_LT(level_set_turning(e.f.values()), 1e-8);
}

TEST(Pseudolinear, CurvedLevelSetsAreDetected) {
  const ChartGrid g = ChartGrid::box({{0, 1}, {0, 1}}, {65, 65});
  const Field f = sample_scalar(g, [](auto a) { return std::exp(a[0] * a[0] + a[1]); });
  EXPECT_GT(level_set_turning(f), 0.1);
}

TEST(Group, SingleGeneratorReducesToPseudolinearDensity) {
  Exponential e;
  const MapJet other = MapJet::sample(e.g, 1, [](auto a) { return Vec(Vec::Constant(1, 1 + a[0] + 0.3 * a[1] * a[1])); });
  const PointVector xi = [](const Vec&) { return Vec(Vec::Ones(1)); };
  const auto s = pseudolinear_scenario(1, xi, e.A, e.phi, one);
  const Field L = group_system_lagrangian({xi}, {e.A}, other, e.phi, one);
  const Field ref = lagrangian_density(other, s.problem());
  EXPECT_LT((L - ref).max_abs(), 1e-12 * ref.max_abs());
}

TEST(Group, TwoGeneratorsIntegrateToLT) {
  const ChartGrid g = ChartGrid::torus({{0, 2 * pi}, {0, 2 * pi}}, {12, 12});
  const Field phi = sample_metric(g, [](auto a) { return metric2(1.0 + 0.2 * std::sin(a[0]), 0.1, 1.1); });
  const Field A1 = Field::sample(g, covector_shape(2), [](auto a, auto o) { o[0] = 1.0; o[1] = 0.2 * std::sin(a[1]); });
  const Field A2 = Field::sample(g, covector_shape(2), [](auto a, auto o) { o[0] = 0.1 * std::cos(a[0]); o[1] = 1.0; });
  const std::vector<PointVector> xi{[](const Vec&) { return Vec(Eigen::Vector2d(1, 0)); },
                                    [](const Vec& x) { return Vec(Eigen::Vector2d(0.1 * std::sin(x(0)), 1)); }};
  const MapJet f = MapJet::sample(
      g, 2, [](auto a) { return Vec(Eigen::Vector2d(a[0] + 0.2 * std::sin(a[1]), a[1] + 0.1 * std::cos(a[0]))); },
      {2 * pi, 0, 0, 2 * pi});
  const Field L = group_system_lagrangian(xi, {A1, A2}, f, phi, wavy_psi);
  double integral = 0.0;
  const auto w = quadrature_weights(g);
  const Field sq = volume_density(phi);
  for (std::size_t node = 0; node < g.size(); ++node) integral += w[node] * sq(node, 0) * L(node, 0);
  const double lt = functional_LT(f, FirstOrderSystem::group(2, xi, {A1, A2}), phi, wavy_psi);
  EXPECT_NEAR(integral, lt, 1e-12 * lt);
  EXPECT_GE(lt, half_volume(phi) - 1e-12);
}

TEST(Perturbation, BumpIsCompactlySupported) {
  const ChartGrid g = ChartGrid::torus({{0, 1}, {0, 1}}, {20, 20});
  for (std::size_t node = 0; node < g.size(); ++node) {
    const double b = c2_bump(g, node, {0.95, 0.5}, 0.2);
    double dx = g.coord(node, 0) - 0.95;
    dx -= std::round(dx);
    const double r2 = dx * dx + std::pow(g.coord(node, 1) - 0.5, 2);
    if (r2 >= 0.04) EXPECT_EQ(b, 0.0);
    else EXPECT_NEAR(b, std::pow(1 - r2 / 0.04, 3), 1e-14);
  }
}
