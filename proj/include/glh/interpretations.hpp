#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "energy.hpp"

namespace glh {

inline constexpr double kDefaultSingularTolerance = 1e-8;

enum class SystemKind { general, orbit, pfaff, pseudolinear, group };

inline std::string to_string(SystemKind k) {
  switch (k) {
    case SystemKind::general: return "general";
    case SystemKind::orbit: return "orbit";
    case SystemKind::pfaff: return "pfaff";
    case SystemKind::pseudolinear: return "pseudolinear";
    case SystemKind::group: return "group";
  }
  return "?";
}

/// First-order system df^i/da^alpha = T^i_alpha(a, f).
/// T(node, x) returns the n x m matrix T^i_alpha. Factorized kinds keep their
/// factors: xi holds vector fields on N, A covector fields on M.
struct FirstOrderSystem {
  SystemKind kind = SystemKind::general;
  int m = 0;
  int n = 0;
  std::function<Mat(std::size_t node, const Vec& x)> T;
  std::vector<PointVector> xi;
  std::vector<Field> A;

  static FirstOrderSystem general(int m, int n, std::function<Mat(std::size_t, const Vec&)> T) {
    FirstOrderSystem s;
    s.m = m;
    s.n = n;
    s.T = std::move(T);
    return s;
  }

  /// dc/dt = xi(c) on an interval.
  static FirstOrderSystem orbit(int n, PointVector xi) {
    FirstOrderSystem s;
    s.kind = SystemKind::orbit;
    s.m = 1;
    s.n = n;
    s.xi = {xi};
    s.T = [xi](std::size_t, const Vec& x) { return Mat(xi(x)); };
    return s;
  }

  /// df = A for a real-valued f.
  static FirstOrderSystem pfaff(const Field& A) {
    FirstOrderSystem s;
    s.kind = SystemKind::pfaff;
    s.m = A.grid().dim();
    s.n = 1;
    s.A = {A};
    s.T = [A](std::size_t node, const Vec&) { return Mat(A.vector(node).transpose()); };
    return s;
  }

  /// T^k_beta = xi^k(x) A_beta(a).
  static FirstOrderSystem pseudolinear(int n, PointVector xi, const Field& A) {
    FirstOrderSystem s = group(n, {std::move(xi)}, {A});
    s.kind = SystemKind::pseudolinear;
    return s;
  }

  /// T^i_alpha = sum_r xi_r^i(x) A^r_alpha(a).
  static FirstOrderSystem group(int n, std::vector<PointVector> xi, std::vector<Field> A) {
    if (xi.empty() || xi.size() != A.size()) throw Error("FirstOrderSystem: generators and covectors differ in number");
    FirstOrderSystem s;
    s.kind = SystemKind::group;
    s.m = A.front().grid().dim();
    s.n = n;
    s.xi = xi;
    s.A = A;
    s.T = [xi, A](std::size_t node, const Vec& x) {
      Mat t = Mat::Zero(xi.front()(x).size(), A.front().components());
      for (std::size_t r = 0; r < xi.size(); ++r) t += xi[r](x) * A[r].vector(node).transpose();
      return t;
    };
    return s;
  }
};

/// <T, S> = phi^{alpha beta} psi_ij T^i_alpha S^j_beta for n x m matrices at one node.
inline double section_product(const Mat& phi_inv, const Mat& psi, const Mat& T, const Mat& S) {
  return (phi_inv * T.transpose() * psi * S).trace();
}

/// Nodewise scalar product of two sections of T*M (x) f^-1 TN along f.
/// T and S have shape (n, m) on M's grid; psi is evaluated at f(a).
inline Field section_scalar_product(const Field& T, const Field& S, const Field& phi, const PointMetric& psi,
                                    const MapJet& f) {
  const Field phi_inv = invert_metric(phi);
  Field out(phi.grid(), scalar_shape());
  for (std::size_t node = 0; node < out.nodes(); ++node)
    out(node, 0) = section_product(phi_inv.matrix(node), psi(f.f(node)), T.matrix(node), S.matrix(node));
  return out;
}

/// Samples T(a, f(a)) along a map as a field of shape (n, m).
inline Field system_section(const FirstOrderSystem& sys, const MapJet& f) {
  Field out(f.grid(), Shape({sys.n, sys.m}, {Variance::Up, Variance::Down}));
  for (std::size_t node = 0; node < out.nodes(); ++node) out.set_matrix(node, sys.T(node, f.f(node)));
  return out;
}

/// Integrand pieces of L_T at every node.
struct LTDensity {
  Field integrand;  // |T|^2 |df|^2 / <df, T>^2 (dimensionless, >= 1)
  Field pairing;    // <df, T>
  Field norm_df;    // |df|
  Field norm_T;     // |T|
  Field K;          // best-fit factor <df, T> / |T|^2
  Field defect;     // |df - T|
  Field K_defect;   // |df - K T|
};

/// Evaluates the L_T integrand. Nodes where |<df, T>| < eps_sing |df| |T|
/// are outside the functional's domain and raise DomainError listing them.
inline LTDensity lt_density(const MapJet& f, const FirstOrderSystem& sys, const Field& phi, const PointMetric& psi,
                            double eps_sing = kDefaultSingularTolerance) {
  if (f.source_dim() != sys.m || f.target_dim() != sys.n) throw Error("functional_LT: map and system dimensions differ");
  const ChartGrid& grid = f.grid();
  const Field phi_inv = invert_metric(phi);
  LTDensity d{Field(grid, scalar_shape()), Field(grid, scalar_shape()), Field(grid, scalar_shape()),
              Field(grid, scalar_shape()), Field(grid, scalar_shape()), Field(grid, scalar_shape()),
              Field(grid, scalar_shape())};
  std::vector<std::size_t> bad;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const Mat pi = phi_inv.matrix(node);
    const Mat ps = psi(f.f(node));
    const Mat J = f.J(node);
    const Mat T = sys.T(node, f.f(node));
    const double jj = section_product(pi, ps, J, J);
    const double tt = section_product(pi, ps, T, T);
    const double jt = section_product(pi, ps, J, T);
    const double nj = std::sqrt(std::max(jj, 0.0)), nt = std::sqrt(std::max(tt, 0.0));
    if (!(std::abs(jt) >= eps_sing * nj * nt) || jt == 0.0) {
      bad.push_back(node);
      continue;
    }
    const double K = jt / tt;
    const Mat r1 = J - T, rK = J - K * T;
    d.integrand(node, 0) = jj * tt / (jt * jt);
    d.pairing(node, 0) = jt;
    d.norm_df(node, 0) = nj;
    d.norm_T(node, 0) = nt;
    d.K(node, 0) = K;
    d.defect(node, 0) = std::sqrt(std::max(section_product(pi, ps, r1, r1), 0.0));
    d.K_defect(node, 0) = std::sqrt(std::max(section_product(pi, ps, rK, rK), 0.0));
  }
  if (!bad.empty()) {
    std::string msg = "functional_LT: <df, T> vanishes at " + std::to_string(bad.size()) + " node(s), first at node " +
                      std::to_string(bad.front()) + " " + detail::format_point(grid.coords(bad.front()));
    throw DomainError(msg, bad);
  }
  return d;
}

/// 1/2 Vol_phi(M).
inline double half_volume(const Field& phi) {
  return 0.5 * quadrature(volume_density(phi));
}

/// L_T(f) = 1/2 int |T|^2 / <df, T>^2 phi^{ab} psi_ij f^i_a f^j_b sqrt(phi) da.
inline double functional_LT(const MapJet& f, const FirstOrderSystem& sys, const Field& phi, const PointMetric& psi,
                            double eps_sing = kDefaultSingularTolerance) {
  const LTDensity d = lt_density(f, sys, phi, psi, eps_sing);
  const Field sq = volume_density(phi);
  const auto w = quadrature_weights(phi.grid());
  double acc = 0.0;
  for (std::size_t node = 0; node < w.size(); ++node) acc += w[node] * sq(node, 0) * d.integrand(node, 0);
  return 0.5 * acc;
}

struct TheoremCertificate {
  double functional_value = 0.0;
  double half_volume = 0.0;
  double gap = 0.0;         // functional_value - half_volume
  double max_defect = 0.0;  // max |df - T|
  Field K;                  // best-fit factor in df ~ K T
  double max_K_defect = 0.0;
  double K_min = 0.0;
  double K_max = 0.0;
  double tol_gap = 0.0;
  double tol_defect = 0.0;
  bool verdict = false;
};

/// Checks that f minimizes L_T: the value equals 1/2 Vol within tol_gap and
/// f solves df = T within tol_defect. The best-fit K separates maps with
/// df = K T (minimizers) from solutions of the system.
inline TheoremCertificate certify_theorem(const MapJet& f, const FirstOrderSystem& sys, const Field& phi,
                                          const PointMetric& psi, double tol_gap, double tol_defect,
                                          double eps_sing = kDefaultSingularTolerance) {
  const LTDensity d = lt_density(f, sys, phi, psi, eps_sing);
  const Field sq = volume_density(phi);
  const auto w = quadrature_weights(phi.grid());
  TheoremCertificate c;
  double acc = 0.0;
  for (std::size_t node = 0; node < w.size(); ++node) acc += w[node] * sq(node, 0) * d.integrand(node, 0);
  c.functional_value = 0.5 * acc;
  c.half_volume = half_volume(phi);
  c.gap = c.functional_value - c.half_volume;
  c.max_defect = d.defect.max_abs();
  c.K = d.K;
  c.max_K_defect = d.K_defect.max_abs();
  c.K_min = *std::min_element(d.K.values().begin(), d.K.values().end());
  c.K_max = *std::max_element(d.K.values().begin(), d.K.values().end());
  c.tol_gap = tol_gap;
  c.tol_defect = tol_defect;
  c.verdict = std::abs(c.gap) <= tol_gap && c.max_defect <= tol_defect;
  return c;
}

// ---------------------------------------------------------------------------
// Orbits

/// ||xi||_psi and the flat form xi_i = psi_ij xi^j at x.
inline std::pair<double, Vec> orbit_norm_and_flat(const PointVector& xi, const PointMetric& psi, const Vec& x) {
  const Vec v = xi(x);
  const Vec flat = psi(x) * v;
  return {std::sqrt(v.dot(flat)), flat};
}

namespace detail {

inline void require_direction(double pairing, double scale, double eps, std::vector<double> xs, const Vec& y,
                              const char* what) {
  if (!(std::abs(pairing) >= eps * scale) || pairing == 0.0) {
    std::vector<double> ys(y.data(), y.data() + y.size());
    throw SingularDirectionError(std::string(what) + ": direction " + format_point(ys) + " at " + format_point(xs) +
                                     " lies on the singular hyperplane",
                                 xs, ys);
  }
}

} // namespace detail

/// tau(x, y) = ln(||xi||_psi / |xi_flat(y)|). Directions with
/// |xi_flat(y)| < eps ||xi|| ||y|| raise SingularDirectionError.
inline TargetScalar orbit_tau(PointVector xi, PointMetric psi, double eps = kDefaultSingularTolerance) {
  return [xi = std::move(xi), psi = std::move(psi), eps](const Vec& x, const Vec& y) {
    const auto [norm, flat] = orbit_norm_and_flat(xi, psi, x);
    const double p = flat.dot(y);
    detail::require_direction(p, norm * std::sqrt(y.dot(psi(x) * y)), eps, std::vector<double>(x.data(), x.data() + x.size()), y,
                              "orbit_metric");
    return std::log(norm / std::abs(p));
  };
}

/// h_ij(x, y) = ||xi||^2 / [xi_flat(y)]^2 psi_ij(x).
inline TargetMetric orbit_metric(PointVector xi, PointMetric psi, double eps = kDefaultSingularTolerance) {
  return [xi = std::move(xi), psi = std::move(psi), eps](const Vec& x, const Vec& y) {
    const auto [norm, flat] = orbit_norm_and_flat(xi, psi, x);
    const Mat ps = psi(x);
    const double p = flat.dot(y);
    detail::require_direction(p, norm * std::sqrt(y.dot(ps * y)), eps, std::vector<double>(x.data(), x.data() + x.size()), y,
                              "orbit_metric");
    return Mat(norm * norm / (p * p) * ps);
  };
}

/// Data of the first special case that turns orbits of xi into harmonic curves:
/// sigma = 0, phi = 1, A = 1, tau = orbit_tau(xi, psi).
inline CaseStarData orbit_case_data(const ChartGrid& line, PointVector xi, PointMetric psi,
                                    double eps = kDefaultSingularTolerance) {
  const Field A = Field::sample(line, covector_shape(1), [](auto, auto o) { o[0] = 1.0; });
  return {[](std::size_t) { return 0.0; }, orbit_tau(xi, psi, eps), A, psi};
}

inline Field unit_metric(const ChartGrid& g) {
  const int m = g.dim();
  return sample_metric(g, [m](auto) { return Mat(Mat::Identity(m, m)); });
}

/// Residual of dL/dc^i - d/dt dL/dc-dot^i for L = 1/2 h_kl(c, c-dot) c-dot^k c-dot^l
/// with the orbit metric. The velocity partials are closed-form,
///   dL/dc-dot = e^{2 tau} (Q d tau/d c-dot + psi c-dot),  d tau/d c-dot = -xi_flat / xi_flat(c-dot),
/// so only dL/dc is differenced; this keeps roundoff out of the time derivative.
inline Field orbit_geodesic_residual(const MapJet& curve, const PointVector& xi, const PointMetric& psi,
                                     double eps = kDefaultSingularTolerance, double step = kDefaultLagrangianStep) {
  if (curve.source_dim() != 1) throw Error("orbit_geodesic_residual: the curve must live on an interval");
  const ChartGrid& line = curve.grid();
  const int n = curve.target_dim();
  const TargetMetric h = orbit_metric(xi, psi, eps);
  auto L = [&h](const Vec& x, const Vec& v) { return 0.5 * v.dot(h(x, v) * v); };
  ELPartials d = detail::make_partials(line, 1, n);
  for (std::size_t node = 0; node < line.size(); ++node) {
    const Vec x = curve.f(node);
    const Vec v = curve.J(node).col(0);
    const auto [norm, flat] = orbit_norm_and_flat(xi, psi, x);
    const Mat ps = psi(x);
    const double p = flat.dot(v);
    detail::require_direction(p, norm * std::sqrt(v.dot(ps * v)), eps, std::vector<double>(x.data(), x.data() + x.size()), v,
                              "orbit_metric");
    const double e = norm * norm / (p * p);
    const Vec flux = e * (-v.dot(ps * v) / p * flat + ps * v);
    const Vec dx = detail::central_gradient([&](const Vec& xx) { return L(xx, v); }, x, step);
    d.dL_df.set_vector(node, dx);
    d.dL_djet.set_vector(node, flux);
  }
  return el_residual_from(d, volume_density(unit_metric(line)));
}

/// Fixed-step RK4 solution of dc/dt = xi(c) sampled on `line`. The step is
/// shrunk so that an integer number of substeps spans each grid interval.
inline MapJet integrate_orbit(const PointVector& xi, const Vec& c0, const ChartGrid& line, double step = 1e-3) {
  if (line.dim() != 1 || line.periodic(0)) throw Error("integrate_orbit: expected a closed interval grid");
  const double h = line.spacing(0);
  const int sub = std::max(1, static_cast<int>(std::ceil(h / step - 1e-9)));
  const double dt = h / sub;
  Field values(line, vector_shape(static_cast<int>(c0.size())));
  Vec c = c0;
  values.set_vector(0, c);
  for (int k = 1; k < line.nodes(0); ++k) {
    for (int s = 0; s < sub; ++s) {
      const Vec k1 = xi(c);
      const Vec k2 = xi(c + 0.5 * dt * k1);
      const Vec k3 = xi(c + 0.5 * dt * k2);
      const Vec k4 = xi(c + dt * k3);
      c += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    values.set_vector(static_cast<std::size_t>(k), c);
  }
  return MapJet(std::move(values));
}

// ---------------------------------------------------------------------------
// Pfaff systems

/// ||A||_phi at a node.
inline double covector_norm(const Field& A, const Field& phi_inv, std::size_t node) {
  const Vec a = A.vector(node);
  return std::sqrt(a.dot(phi_inv.matrix(node) * a));
}

/// sigma(a, b) = ln(||A||_phi / |A(b)|).
inline SourceScalar pfaff_sigma(const Field& A, const Field& phi, double eps = kDefaultSingularTolerance) {
  const Field phi_inv = invert_metric(phi);
  return [A, phi, phi_inv, eps](std::size_t node, const Vec& b) {
    const double norm = covector_norm(A, phi_inv, node);
    const double ab = A.vector(node).dot(b);
    detail::require_direction(ab, norm * std::sqrt(b.dot(phi.matrix(node) * b)), eps, phi.grid().coords(node), b,
                              "pfaff_metric");
    return std::log(norm / std::abs(ab));
  };
}

/// g_ab(a, b) = [A(b)]^2 / ||A||^2 phi_ab(a).
inline SourceMetric pfaff_metric(const Field& A, const Field& phi, double eps = kDefaultSingularTolerance) {
  const SourceScalar s = pfaff_sigma(A, phi, eps);
  return [s, phi](std::size_t node, const Vec& b) { return Mat(std::exp(-2.0 * s(node, b)) * phi.matrix(node)); };
}

/// Data of the second special case for df = A: tau = 0, psi = 1, xi = 1.
inline CaseDStarData pfaff_case_data(const Field& A, const Field& phi, double eps = kDefaultSingularTolerance) {
  return {pfaff_sigma(A, phi, eps), [](const Vec&) { return 0.0; }, [](const Vec&) { return Vec(Vec::Ones(1)); },
          [](const Vec&) { return Mat(Mat::Ones(1, 1)); }};
}

/// dL/df_alpha for the Pfaff problem written directly in terms of A:
///   prefactor * { phi^{gm} phi^{ae} (d sigma / d b^e) f_g f_m + phi^{ga} f_g },  dL/df = 0,
/// with d sigma / d b^e = -A_e / A(b). The prefactor is e^{2 sigma} (what the
/// second special case gives for tau = 0); `unit_prefactor` replaces it by 1.
inline ELPartials pfaff_display_partials(const MapJet& f, const Field& A, const Field& phi, bool unit_prefactor = false) {
  const int m = f.source_dim();
  const Field phi_inv = invert_metric(phi);
  ELPartials out = detail::make_partials(f.grid(), m, 1);
  for (std::size_t node = 0; node < f.grid().size(); ++node) {
    const Mat pi = phi_inv.matrix(node);
    const Vec df = f.J(node).row(0).transpose();
    const Vec a = A.vector(node);
    const Vec b = pi * df;
    const double ab = a.dot(b);
    const double norm2 = a.dot(pi * a);
    const double pref = unit_prefactor ? 1.0 : norm2 / (ab * ab);
    const Vec dsig = -a / ab;
    const Vec flux = pref * (df.dot(pi * df) * (pi * dsig) + pi * df);
    for (int al = 0; al < m; ++al) out.dL_djet(node, static_cast<std::size_t>(al)) = flux(al);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pseudolinear functions

struct PseudolinearScenario {
  Field phi;
  GLMetricPair pair;
  ConnectionTensorP P;
  FirstOrderSystem system;

  HarmonicMapProblem problem() const { return HarmonicMapProblem(phi, pair, P); }
};

/// For T^k_beta = xi^k(x) A_beta(a): h = ||xi||^2 psi, g = pfaff_metric(A, phi),
/// P^gamma_{beta i} = delta^gamma_beta xi_i(x). The (P; g, phi, h)-energy then equals L_T.
inline PseudolinearScenario pseudolinear_scenario(int n, PointVector xi, const Field& A, const Field& phi,
                                                  PointMetric psi, double eps = kDefaultSingularTolerance) {
  const int m = phi.grid().dim();
  PseudolinearScenario s{phi, {}, ConnectionTensorP::base_from_form(m, n, [xi, psi](const Vec& x) { return Vec(psi(x) * xi(x)); }),
                         FirstOrderSystem::pseudolinear(n, xi, A)};
  TargetScalar tau = [xi, psi](const Vec& x, const Vec&) {
    const Vec v = xi(x);
    return 0.5 * std::log(v.dot(psi(x) * v));
  };
  s.pair = GLMetricPair::conformal(phi, pfaff_sigma(A, phi, eps), psi, tau);
  return s;
}

/// Discrete test that the level sets of a scalar function on a flat chart are
/// totally geodesic: the unit normal grad f / |grad f| must not turn along the
/// level set, i.e. P H P / |grad f| = 0 with P the projector onto the level set
/// and H = D D f the composed central-difference Hessian. Returns the largest
/// entry over nodes at least `margin` nodes from a non-periodic boundary.
inline double level_set_turning(const Field& f, int margin = 2) {
  const ChartGrid& g = f.grid();
  const int m = g.dim();
  std::vector<Field> d1;
  for (int a = 0; a < m; ++a) d1.push_back(fd_partial(f, a));
  std::vector<Field> d2;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) d2.push_back(fd_partial(d1[static_cast<std::size_t>(b)], a));
  double worst = 0.0;
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (g.boundary_distance(node) < margin) continue;
    Vec grad(m);
    Mat H(m, m);
    for (int a = 0; a < m; ++a) {
      grad(a) = d1[static_cast<std::size_t>(a)](node, 0);
      for (int b = 0; b < m; ++b) H(a, b) = d2[static_cast<std::size_t>(a * m + b)](node, 0);
    }
    const double norm = grad.norm();
    if (norm == 0.0) throw DomainError("level_set_turning: gradient vanishes", {node});
    const Vec nvec = grad / norm;
    const Mat P = Mat::Identity(m, m) - nvec * nvec.transpose();
    worst = std::max(worst, (P * H * P).cwiseAbs().maxCoeff() / norm);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Continuous groups

/// L = 1/2 |T|^2 / <df, T>^2 phi^{ab} psi_ij f^i_a f^j_b for T = sum_r xi_r A^r,
/// with <df, T> = sum_r A^r(b_r) and b_r^g = phi^{ag} (xi_r)_i f^i_a.
inline Field group_system_lagrangian(const std::vector<PointVector>& xi, const std::vector<Field>& A, const MapJet& f,
                                     const Field& phi, const PointMetric& psi,
                                     double eps = kDefaultSingularTolerance) {
  if (xi.size() != A.size() || xi.empty()) throw Error("group_system_lagrangian: generators and covectors differ in number");
  const Field phi_inv = invert_metric(phi);
  Field out(f.grid(), scalar_shape());
  std::vector<std::size_t> bad;
  for (std::size_t node = 0; node < f.grid().size(); ++node) {
    const Vec x = f.f(node);
    const Mat J = f.J(node);
    const Mat pi = phi_inv.matrix(node);
    const Mat ps = psi(x);
    Mat T = Mat::Zero(J.rows(), J.cols());
    double pairing = 0.0;
    for (std::size_t r = 0; r < xi.size(); ++r) {
      const Vec v = xi[r](x);
      const Vec b = pi * J.transpose() * (ps * v);
      pairing += A[r].vector(node).dot(b);
      T += v * A[r].vector(node).transpose();
    }
    const double tt = section_product(pi, ps, T, T);
    const double jj = section_product(pi, ps, J, J);
    if (jj == 0.0) {
      out(node, 0) = 0.0;
      continue;
    }
    if (!(std::abs(pairing) >= eps * std::sqrt(tt * jj))) {
      bad.push_back(node);
      continue;
    }
    out(node, 0) = 0.5 * tt / (pairing * pairing) * jj;
  }
  if (!bad.empty())
    throw DomainError("group_system_lagrangian: <df, T> vanishes at node " + std::to_string(bad.front()), bad);
  return out;
}

// ---------------------------------------------------------------------------
// Perturbations

/// Compactly supported C^2 bump (1 - r^2/R^2)^3 centred at `centre` with radius R.
/// Distances wrap on periodic axes.
inline double c2_bump(const ChartGrid& g, std::size_t node, const std::vector<double>& centre, double R) {
  double r2 = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    double d = g.coord(node, a) - centre[static_cast<std::size_t>(a)];
    if (g.periodic(a)) {
      const double L = g.extent(a).hi - g.extent(a).lo;
      d -= L * std::round(d / L);
    }
    r2 += d * d;
  }
  const double q = 1.0 - r2 / (R * R);
  return q > 0.0 ? q * q * q : 0.0;
}

/// f + amplitude * bump * direction for a random bump: centre uniform in the
/// chart, radius in [0.2, 0.5] of the smallest extent, unit direction in R^n.
inline MapJet random_bump_perturbation(const MapJet& f, double amplitude, std::mt19937_64& rng) {
  const ChartGrid& g = f.grid();
  const int n = f.target_dim();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal;
  std::vector<double> centre(static_cast<std::size_t>(g.dim()));
  double smallest = INFINITY;
  for (int a = 0; a < g.dim(); ++a) {
    const Interval e = g.extent(a);
    centre[static_cast<std::size_t>(a)] = e.lo + u(rng) * (e.hi - e.lo);
    smallest = std::min(smallest, e.hi - e.lo);
  }
  const double R = (0.2 + 0.3 * u(rng)) * smallest;
  Vec dir(n);
  for (int i = 0; i < n; ++i) dir(i) = normal(rng);
  dir /= dir.norm();
  Field v = f.values();
  for (std::size_t node = 0; node < g.size(); ++node) {
    const double b = amplitude * c2_bump(g, node, centre, R);
    for (int i = 0; i < n; ++i) v(node, static_cast<std::size_t>(i)) += b * dir(i);
  }
  return MapJet(std::move(v), f.seam());
}

} // namespace glh
