#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tensor_core.hpp"

namespace glh {

/// Metric on the source M at a node, depending on a direction b in T_aM.
using SourceMetric = std::function<Mat(std::size_t node, const Vec& b)>;
/// Metric on the target N at a point x, depending on a direction y in T_xN.
using TargetMetric = std::function<Mat(const Vec& x, const Vec& y)>;
/// Scalar on TM (sigma(a, b)); the node stands for a.
using SourceScalar = std::function<double(std::size_t node, const Vec& b)>;
/// Scalar on TN (tau(x, y)).
using TargetScalar = std::function<double(const Vec& x, const Vec& y)>;
/// Position-only metric on N (psi_ij(x)).
using PointMetric = std::function<Mat(const Vec& x)>;
/// Position-only vector or covector on N.
using PointVector = std::function<Vec(const Vec& x)>;

/// Tensor of connection on M x N. Both evaluators take (node of M, point of N).
///   PM(a, x)(gamma, beta * n + i) = P^gamma_{beta i}(a, x)   (m rows)
///   PN(a, x)(k,     beta * n + i) = P^k_{beta i}(a, x)       (n rows)
/// With this layout b = PM * vec(phi^-1 J^T) and y = PN * vec(phi^-1 J^T).
struct ConnectionTensorP {
  int m = 0;
  int n = 0;
  std::function<Mat(std::size_t, const Vec&)> PM;
  std::function<Mat(std::size_t, const Vec&)> PN;

  static ConnectionTensorP zero(int m, int n) {
    auto zm = [m, n](std::size_t, const Vec&) { return Mat(Mat::Zero(m, m * n)); };
    auto zn = [m, n](std::size_t, const Vec&) { return Mat(Mat::Zero(n, m * n)); };
    return {m, n, zm, zn};
  }

  /// P^j_{beta i} = A_beta(a) delta^j_i, with P^gamma_{beta i} = 0.
  static ConnectionTensorP fiber_from_covector(const Field& A, int n) {
    const int m = A.grid().dim();
    ConnectionTensorP p = zero(m, n);
    p.PN = [A, m, n](std::size_t node, const Vec&) {
      Mat out = Mat::Zero(n, m * n);
      for (int b = 0; b < m; ++b)
        for (int i = 0; i < n; ++i) out(i, b * n + i) = A(node, static_cast<std::size_t>(b));
      return out;
    };
    return p;
  }

  /// P^gamma_{beta i} = delta^gamma_beta xi_i(x), with P^j_{beta i} = 0.
  static ConnectionTensorP base_from_form(int m, int n, PointVector xi) {
    ConnectionTensorP p = zero(m, n);
    p.PM = [xi = std::move(xi), m, n](std::size_t, const Vec& x) {
      const Vec w = xi(x);
      Mat out = Mat::Zero(m, m * n);
      for (int g = 0; g < m; ++g)
        for (int i = 0; i < n; ++i) out(g, g * n + i) = w(i);
      return out;
    };
    return p;
  }
};

/// The pair of generalized Lagrange metrics (g on TM, h on TN).
/// When conformal_source is set, g = exp(-2 sigma(a, b)) phi(a); when
/// conformal_target is set, h = exp(2 tau(x, y)) psi(x). The scalar and base
/// metric members are then populated; otherwise only g and h are meaningful.
struct GLMetricPair {
  SourceMetric g;
  TargetMetric h;
  bool conformal_source = false;
  bool conformal_target = false;
  SourceScalar sigma;
  TargetScalar tau;
  PointMetric psi;

  static GLMetricPair general(SourceMetric g, TargetMetric h) {
    GLMetricPair p;
    p.g = std::move(g);
    p.h = std::move(h);
    return p;
  }

  static GLMetricPair conformal(const Field& phi, SourceScalar sigma, PointMetric psi, TargetScalar tau) {
    GLMetricPair p;
    p.conformal_source = p.conformal_target = true;
    p.sigma = std::move(sigma);
    p.tau = std::move(tau);
    p.psi = std::move(psi);
    p.g = [phi, s = p.sigma](std::size_t node, const Vec& b) { return Mat(std::exp(-2.0 * s(node, b)) * phi.matrix(node)); };
    p.h = [ps = p.psi, t = p.tau](const Vec& x, const Vec& y) { return Mat(std::exp(2.0 * t(x, y)) * ps(x)); };
    return p;
  }

  /// g = phi, h = psi (classical harmonic maps).
  static GLMetricPair riemannian(const Field& phi, PointMetric psi) {
    return conformal(
        phi, [](std::size_t, const Vec&) { return 0.0; }, std::move(psi), [](const Vec&, const Vec&) { return 0.0; });
  }
};

/// A discrete map f: M -> N sampled at the nodes of M's grid, with its jet.
/// `seam` lifts maps into a torus: seam[alpha * n + i] is added to f^i each
/// time a stencil wraps forward across periodic axis alpha.
class MapJet {
public:
  MapJet() = default;
  MapJet(Field values, std::vector<double> seam = {}) : seam_(std::move(seam)) { set_values(std::move(values)); }

  template <class Fn>
  static MapJet sample(const ChartGrid& grid, int n, Fn&& fn, std::vector<double> seam = {}) {
    Field v = Field::sample(grid, vector_shape(n), [&](std::span<const double> a, std::span<double> out) {
      const Vec r = fn(a);
      for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = r(i);
    });
    return MapJet(std::move(v), std::move(seam));
  }

  /// Replaces the nodal values and recomputes the jet; induced arguments are dropped.
  void set_values(Field values) {
    if (values.rank() != 1) throw Error("MapJet: values must be a vector field");
    values_ = std::move(values);
    const ChartGrid& grid = values_.grid();
    const int m = grid.dim();
    const int n = target_dim();
    if (!seam_.empty() && seam_.size() != static_cast<std::size_t>(m * n))
      throw Error("MapJet: seam needs dim(M) * dim(N) entries");
    jet_ = Field(grid, Shape({n, m}, {Variance::Up, Variance::Down}));
    for (int a = 0; a < m; ++a) {
      std::span<const double> jump;
      if (!seam_.empty()) jump = std::span<const double>(seam_.data() + a * n, static_cast<std::size_t>(n));
      const Field d = fd_partial(values_, a, grid.stencil_order(), jump);
      for (std::size_t node = 0; node < grid.size(); ++node)
        for (int i = 0; i < n; ++i) jet_(node, static_cast<std::size_t>(i * m + a)) = d(node, static_cast<std::size_t>(i));
    }
    b_ = Field();
    y_ = Field();
  }

  const ChartGrid& grid() const { return values_.grid(); }
  int source_dim() const { return values_.grid().dim(); }
  int target_dim() const { return values_.shape().dims[0]; }
  const Field& values() const noexcept { return values_; }
  const Field& jet() const noexcept { return jet_; }
  const std::vector<double>& seam() const noexcept { return seam_; }

  Vec f(std::size_t node) const { return values_.vector(node); }
  /// n x m matrix of f^i_alpha.
  Mat J(std::size_t node) const { return jet_.matrix(node); }

  bool has_induced() const noexcept { return b_.nodes() > 0; }
  const Field& b() const noexcept { return b_; }
  const Field& y() const noexcept { return y_; }
  void set_induced(Field b, Field y) {
    b_ = std::move(b);
    y_ = std::move(y);
  }

private:
  std::vector<double> seam_;
  Field values_;
  Field jet_;
  Field b_;
  Field y_;
};

/// b^gamma = phi^{alpha beta} f^i_alpha P^gamma_{beta i},  y^k = phi^{alpha beta} f^i_alpha P^k_{beta i}.
struct InducedArguments {
  Vec b;
  Vec y;
};

inline InducedArguments induced_arguments_at(const ConnectionTensorP& P, const Mat& phi_inv, std::size_t node,
                                             const Vec& f, const Mat& J) {
  const int m = P.m, n = P.n;
  const Mat K = phi_inv * J.transpose();  // K(beta, i) = phi^{alpha beta} f^i_alpha
  Vec k(m * n);
  for (int b = 0; b < m; ++b)
    for (int i = 0; i < n; ++i) k(b * n + i) = K(b, i);
  return {P.PM(node, f) * k, P.PN(node, f) * k};
}

/// Everything needed to evaluate the (P; g, phi, h)-energy on maps from M.
class HarmonicMapProblem {
public:
  HarmonicMapProblem(Field phi, GLMetricPair pair, ConnectionTensorP P,
                     double condition_bound = kDefaultConditionBound)
      : phi_(std::move(phi)), pair_(std::move(pair)), P_(std::move(P)), bound_(condition_bound) {
    require_riemannian(phi_, "phi");
    if (P_.m != phi_.grid().dim()) throw Error("HarmonicMapProblem: connection tensor has the wrong source dimension");
    if (!pair_.g || !pair_.h || !P_.PM || !P_.PN) throw Error("HarmonicMapProblem: missing evaluator");
    phi_inv_ = invert_metric(phi_, bound_);
    sqrt_phi_ = volume_density(phi_);
    weights_ = quadrature_weights(phi_.grid());
  }

  const ChartGrid& grid() const { return phi_.grid(); }
  int m() const { return P_.m; }
  int n() const { return P_.n; }
  const Field& phi() const noexcept { return phi_; }
  const Field& phi_inv() const noexcept { return phi_inv_; }
  const Field& sqrt_phi() const noexcept { return sqrt_phi_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const GLMetricPair& pair() const noexcept { return pair_; }
  const ConnectionTensorP& P() const noexcept { return P_; }
  double condition_bound() const noexcept { return bound_; }

  InducedArguments induced(std::size_t node, const Vec& f, const Mat& J) const {
    return induced_arguments_at(P_, phi_inv_.matrix(node), node, f, J);
  }

  /// L = 1/2 g^{gamma mu}(a, b) h_kl(f, y) f^k_gamma f^l_mu at one node.
  double lagrangian(std::size_t node, const Vec& f, const Mat& J) const {
    const InducedArguments arg = induced(node, f, J);
    const Mat gi = invert_symmetric(pair_.g(node, arg.b), bound_, node, grid().coords(node));
    const Mat h = pair_.h(f, arg.y);
    return 0.5 * (gi * J.transpose() * h * J).trace();
  }

private:
  Field phi_;
  GLMetricPair pair_;
  ConnectionTensorP P_;
  double bound_;
  Field phi_inv_;
  Field sqrt_phi_;
  std::vector<double> weights_;
};

/// Computes b and y at every node and stores them in the jet.
inline std::pair<Field, Field> induced_arguments(MapJet& jet, const HarmonicMapProblem& p) {
  Field b(jet.grid(), vector_shape(p.m()));
  Field y(jet.grid(), vector_shape(p.n()));
  parallel_for(jet.grid().size(), [&](std::size_t node) {
    const InducedArguments a = p.induced(node, jet.f(node), jet.J(node));
    b.set_vector(node, a.b);
    y.set_vector(node, a.y);
  });
  jet.set_induced(b, y);
  return {b, y};
}

inline Field lagrangian_density(const MapJet& jet, const HarmonicMapProblem& p) {
  Field L(jet.grid(), scalar_shape());
  parallel_for(jet.grid().size(), [&](std::size_t node) { L(node, 0) = p.lagrangian(node, jet.f(node), jet.J(node)); });
  return L;
}

/// Quadrature of L sqrt(det phi) over M.
inline double energy(const MapJet& jet, const HarmonicMapProblem& p) {
  const Field L = lagrangian_density(jet, p);
  double acc = 0.0;
  for (std::size_t node = 0; node < L.nodes(); ++node) acc += p.weights()[node] * p.sqrt_phi()(node, 0) * L(node, 0);
  return acc;
}

/// dL/df^i (vector field, n) and dL/df^i_alpha (shape n x m) at every node.
struct ELPartials {
  Field dL_df;
  Field dL_djet;
};

namespace detail {

/// Central-difference gradient of a scalar function of a vector, step rel * (1 + |v_k|).
template <class Fn>
Vec central_gradient(Fn&& fn, const Vec& v, double rel) {
  Vec out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double h = rel * (1.0 + std::abs(v(k)));
    Vec vp = v, vm = v;
    vp(k) += h;
    vm(k) -= h;
    out(k) = (fn(vp) - fn(vm)) / (2.0 * h);
  }
  return out;
}

/// Central differences of a matrix-valued function of a vector: out[k] = d M / d v_k.
template <class Fn>
std::vector<Mat> central_matrix_gradient(Fn&& fn, const Vec& v, double rel) {
  std::vector<Mat> out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double h = rel * (1.0 + std::abs(v(k)));
    Vec vp = v, vm = v;
    vp(k) += h;
    vm(k) -= h;
    out.push_back((fn(vp) - fn(vm)) / (2.0 * h));
  }
  return out;
}

inline ELPartials make_partials(const ChartGrid& grid, int m, int n) {
  return {Field(grid, covector_shape(n)), Field(grid, Shape({n, m}, {Variance::Down, Variance::Up}))};
}

} // namespace detail

inline constexpr double kDefaultLagrangianStep = 1e-6;

/// Partials of L by central differences. b and y are recomputed for every
/// perturbed argument, so the chain rule through the induced arguments is kept.
inline ELPartials el_partials(const MapJet& jet, const HarmonicMapProblem& p, double step = kDefaultLagrangianStep) {
  const int m = p.m(), n = p.n();
  ELPartials out = detail::make_partials(jet.grid(), m, n);
  parallel_for(jet.grid().size(), [&](std::size_t node) {
    const Vec f = jet.f(node);
    const Mat J = jet.J(node);
    const Vec df = detail::central_gradient([&](const Vec& ff) { return p.lagrangian(node, ff, J); }, f, step);
    Vec jv(n * m);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < m; ++a) jv(i * m + a) = J(i, a);
    const Vec dj = detail::central_gradient(
        [&](const Vec& v) {
          Mat JJ(n, m);
          for (int i = 0; i < n; ++i)
            for (int a = 0; a < m; ++a) JJ(i, a) = v(i * m + a);
          return p.lagrangian(node, f, JJ);
        },
        jv, step);
    out.dL_df.set_vector(node, df);
    out.dL_djet.set_vector(node, dj);
  });
  return out;
}

/// residual_i = sqrt(phi) dL/df^i - d_alpha (sqrt(phi) dL/df^i_alpha).
///
/// The minus sign is the one under which the residual times the quadrature
/// weight equals the gradient of the discrete energy with respect to nodal
/// values (exactly on periodic grids and at nodes whose stencils do not reach a
/// boundary closure).
inline Field el_residual_from(const ELPartials& d, const Field& sqrt_phi) {
  const ChartGrid& grid = sqrt_phi.grid();
  const int n = d.dL_df.shape().dims[0];
  const int m = d.dL_djet.shape().dims[1];
  Field flux = d.dL_djet;
  for (std::size_t node = 0; node < grid.size(); ++node)
    for (std::size_t c = 0; c < flux.components(); ++c) flux(node, c) *= sqrt_phi(node, 0);
  Field r(grid, covector_shape(n));
  for (std::size_t node = 0; node < grid.size(); ++node)
    for (int i = 0; i < n; ++i) r(node, static_cast<std::size_t>(i)) = sqrt_phi(node, 0) * d.dL_df(node, static_cast<std::size_t>(i));
  for (int a = 0; a < m; ++a) {
    const Field div = fd_partial(flux, a, grid.stencil_order());
    for (std::size_t node = 0; node < grid.size(); ++node)
      for (int i = 0; i < n; ++i) r(node, static_cast<std::size_t>(i)) -= div(node, static_cast<std::size_t>(i * m + a));
  }
  return r;
}

/// Euler-Lagrange residual of the (P; g, phi, h)-energy with numerically differentiated L.
inline Field el_residual(const MapJet& jet, const HarmonicMapProblem& p, double step = kDefaultLagrangianStep) {
  return el_residual_from(el_partials(jet, p, step), p.sqrt_phi());
}

/// Data of the first conformal special case: sigma = sigma(a) and
/// P = (arbitrary, A_beta(a) delta^i_j), so y = J phi^-1 A.
struct CaseStarData {
  std::function<double(std::size_t node)> sigma;
  TargetScalar tau;
  Field A;  // covector on M
  PointMetric psi;
};

/// Closed forms of the first special case:
///   dL/dx^i       = 1/2 g^{gamma mu} (d h_kl / d x^i) x^k_gamma x^l_mu
///   dL/dx^i_alpha = e^{2 sigma + 2 tau} { phi^{gamma mu} phi^{alpha eps} psi_kl A_eps (d tau / d y^i) x^k_gamma x^l_mu
///                                         + phi^{gamma alpha} psi_ik x^k_gamma }
/// with g^{gamma mu} = e^{2 sigma} phi^{gamma mu}. Derivatives of tau and psi are central differences.
inline ELPartials el_partials_case_star(const MapJet& jet, const Field& phi, const CaseStarData& d,
                                        double step = kDefaultLagrangianStep) {
  const int m = jet.source_dim(), n = jet.target_dim();
  const Field phi_inv = invert_metric(phi);
  ELPartials out = detail::make_partials(jet.grid(), m, n);
  parallel_for(jet.grid().size(), [&](std::size_t node) {
    const Vec f = jet.f(node);
    const Mat J = jet.J(node);
    const Mat pi = phi_inv.matrix(node);
    const Vec Aup = pi * d.A.vector(node);
    const Vec y = J * Aup;
    const double s = d.sigma(node);
    const double e = std::exp(2.0 * s + 2.0 * d.tau(f, y));
    const Mat psi = d.psi(f);
    const auto dh = detail::central_matrix_gradient(
        [&](const Vec& x) { return Mat(std::exp(2.0 * d.tau(x, y)) * d.psi(x)); }, f, step);
    const Vec dtau = detail::central_gradient([&](const Vec& yy) { return d.tau(f, yy); }, y, step);
    const Mat gi = std::exp(2.0 * s) * pi;
    Vec df(n);
    for (int i = 0; i < n; ++i) df(i) = 0.5 * (gi * J.transpose() * dh[static_cast<std::size_t>(i)] * J).trace();
    const double Q = (pi * J.transpose() * psi * J).trace();
    const Mat dj = e * (Q * dtau * Aup.transpose() + psi * J * pi);
    out.dL_df.set_vector(node, df);
    out.dL_djet.set_matrix(node, dj);
  });
  return out;
}

inline Field el_residual_case_star(const MapJet& jet, const Field& phi, const CaseStarData& d,
                                   double step = kDefaultLagrangianStep) {
  return el_residual_from(el_partials_case_star(jet, phi, d, step), volume_density(phi));
}

/// The problem whose Lagrangian the first special case differentiates.
inline HarmonicMapProblem case_star_problem(const Field& phi, const CaseStarData& d, int n) {
  auto sigma = d.sigma;
  GLMetricPair pair = GLMetricPair::conformal(
      phi, [sigma](std::size_t node, const Vec&) { return sigma(node); }, d.psi, d.tau);
  return HarmonicMapProblem(phi, std::move(pair), ConnectionTensorP::fiber_from_covector(d.A, n));
}

/// Data of the second conformal special case: tau = tau(x) and
/// P = (delta^alpha_beta xi_i(x), arbitrary), so b = phi^-1 J^T xi.
struct CaseDStarData {
  SourceScalar sigma;
  std::function<double(const Vec& x)> tau;
  PointVector xi;  // 1-form on N
  PointMetric psi;
};

/// Closed forms of the second special case:
///   dL/dx^i       = e^{2 sigma + 2 tau} phi^{gamma mu} phi^{delta eps} psi_kl (d xi_p / d x^i)(d sigma / d b^eps)
///                     x^p_delta x^k_gamma x^l_mu + 1/2 g^{gamma mu} (d h_kl / d x^i) x^k_gamma x^l_mu
///   dL/dx^i_alpha = e^{2 sigma + 2 tau} { phi^{gamma mu} phi^{alpha eps} psi_kl (d sigma / d b^eps) xi_i x^k_gamma x^l_mu
///                                         + phi^{gamma alpha} psi_ik x^k_gamma }
inline ELPartials el_partials_case_dstar(const MapJet& jet, const Field& phi, const CaseDStarData& d,
                                         double step = kDefaultLagrangianStep) {
  const int m = jet.source_dim(), n = jet.target_dim();
  const Field phi_inv = invert_metric(phi);
  ELPartials out = detail::make_partials(jet.grid(), m, n);
  parallel_for(jet.grid().size(), [&](std::size_t node) {
    const Vec f = jet.f(node);
    const Mat J = jet.J(node);
    const Mat pi = phi_inv.matrix(node);
    const Vec xi = d.xi(f);
    const Vec b = pi * J.transpose() * xi;
    const double s = d.sigma(node, b);
    const double e = std::exp(2.0 * s + 2.0 * d.tau(f));
    const Mat psi = d.psi(f);
    const Vec dsig = detail::central_gradient([&](const Vec& bb) { return d.sigma(node, bb); }, b, step);
    const auto dxi = detail::central_matrix_gradient([&](const Vec& x) { return Mat(d.xi(x)); }, f, step);
    const auto dh = detail::central_matrix_gradient(
        [&](const Vec& x) { return Mat(std::exp(2.0 * d.tau(x)) * d.psi(x)); }, f, step);
    const Mat gi = std::exp(2.0 * s) * pi;
    const double Q = (pi * J.transpose() * psi * J).trace();
    const Vec sup = pi * dsig;  // phi^{delta eps} d sigma / d b^eps
    Vec df(n);
    for (int i = 0; i < n; ++i) {
      const Vec dxi_i = dxi[static_cast<std::size_t>(i)].col(0);  // d xi_p / d x^i
      df(i) = e * Q * dxi_i.dot(J * sup) + 0.5 * (gi * J.transpose() * dh[static_cast<std::size_t>(i)] * J).trace();
    }
    const Mat dj = e * (Q * xi * sup.transpose() + psi * J * pi);
    out.dL_df.set_vector(node, df);
    out.dL_djet.set_matrix(node, dj);
  });
  return out;
}

inline Field el_residual_case_dstar(const MapJet& jet, const Field& phi, const CaseDStarData& d,
                                    double step = kDefaultLagrangianStep) {
  return el_residual_from(el_partials_case_dstar(jet, phi, d, step), volume_density(phi));
}

inline HarmonicMapProblem case_dstar_problem(const Field& phi, const CaseDStarData& d, int n) {
  auto tau = d.tau;
  GLMetricPair pair =
      GLMetricPair::conformal(phi, d.sigma, d.psi, [tau](const Vec& x, const Vec&) { return tau(x); });
  return HarmonicMapProblem(phi, std::move(pair), ConnectionTensorP::base_from_form(phi.grid().dim(), n, d.xi));
}

} // namespace glh
