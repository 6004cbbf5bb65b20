#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "riemann.hpp"
#include "tensor_core.hpp"

namespace glh {

/// Scalar function on the tangent bundle, evaluated at base coordinates x and fiber y.
using TangentFunction = std::function<double(std::span<const double> x, std::span<const double> y)>;

/// A base node paired with a fiber direction.
struct TangentSample {
  std::size_t node = 0;
  Vec y;
};

/// Linear connection behind the h- and v-covariant derivatives. Only the
/// Berwald-type pair (Gamma^i_jk(x), 0) is implemented.
enum class VConnection { zero };

struct GLSpaceOptions {
  /// Fiber differences use the step fiber_step * (1 + |y|).
  double fiber_step = 1e-4;
  VConnection v_connection = VConnection::zero;
};

/// Conformal generalized Lagrange space g_ij(x, y) = exp(2 sigma(x, y)) gamma_ij(x)
/// with nonlinear connection N^i_j = Gamma^i_jk(x) y^k.
class ConformalGLSpace {
public:
  ConformalGLSpace(RiemannPackage base, TangentFunction sigma, GLSpaceOptions options = {})
      : base_(std::move(base)), sigma_(std::move(sigma)), options_(options) {
    if (!sigma_) throw Error("ConformalGLSpace: sigma evaluator is empty");
  }

  const RiemannPackage& base() const noexcept { return base_; }
  const ChartGrid& grid() const { return base_.grid(); }
  int dim() const { return base_.dim(); }
  const GLSpaceOptions& options() const noexcept { return options_; }

  double sigma(std::size_t node, const Vec& y) const {
    const auto x = grid().coords(node);
    return sigma_(x, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
  }

  Mat gamma(std::size_t node) const { return base_.gamma.matrix(node); }
  Mat gamma_inv(std::size_t node) const { return base_.gamma_inv.matrix(node); }

  /// g_ij(x, y) = exp(2 sigma) gamma_ij.
  Mat metric(std::size_t node, const Vec& y) const { return std::exp(2.0 * sigma(node, y)) * gamma(node); }

  /// N^i_j = Gamma^i_jk y^k, returned with row i and column j.
  Mat nonlinear_connection(std::size_t node, const Vec& y) const {
    const int n = dim();
    Mat N = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) N(i, j) += base_.Gamma(node, i, j, k) * y(k);
    return N;
  }

  double fiber_step(const Vec& y) const { return options_.fiber_step * (1.0 + y.norm()); }

private:
  RiemannPackage base_;
  TangentFunction sigma_;
  GLSpaceOptions options_;
};

namespace detail {

inline Vec to_vec(double v) { return Vec::Constant(1, v); }
inline Vec to_vec(const Vec& v) { return v; }
inline Vec to_vec(const Mat& m) {
  Vec out(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i * m.cols() + j) = m(i, j);
  return out;
}

/// Base partials (rows: components, columns: axis) and fiber partials of a
/// tangent-bundle quantity, flattened to a vector of components.
template <class Fn>
std::pair<Mat, Mat> base_and_fiber_partials(const ConformalGLSpace& space, Fn&& F, std::size_t node, const Vec& y) {
  const int n = space.dim();
  const ChartGrid& grid = space.grid();
  const Vec centre = to_vec(F(node, y));
  const auto nc = centre.size();
  Mat dx = Mat::Zero(nc, n);
  for (int a = 0; a < n; ++a) {
    const Stencil s = first_derivative_stencil(grid.stencil_order(), grid.axis_index(node, a), grid.nodes(a),
                                               grid.periodic(a));
    for (std::size_t k = 0; k < s.offsets.size(); ++k) {
      const std::size_t nb = grid.shifted(node, a, s.offsets[k]).first;
      dx.col(a) += s.weights[k] * (nb == node ? centre : to_vec(F(nb, y)));
    }
    dx.col(a) /= grid.spacing(a);
  }
  Mat dy(nc, n);
  const double h = space.fiber_step(y);
  for (int a = 0; a < n; ++a) {
    Vec yp = y, ym = y;
    yp(a) += h;
    ym(a) -= h;
    dy.col(a) = (to_vec(F(node, yp)) - to_vec(F(node, ym))) / (2.0 * h);
  }
  return {dx, dy};
}

} // namespace detail

/// Adapted horizontal derivative dF/dx^i - N^j_i dF/dy^j of a scalar function on TM.
/// `F(node, y)` must return a double.
template <class Fn>
Vec delta_derivative(const ConformalGLSpace& space, Fn&& F, std::size_t node, const Vec& y) {
  auto [dx, dy] = detail::base_and_fiber_partials(space, F, node, y);
  const Mat N = space.nonlinear_connection(node, y);
  // row vector: d_i F - dy_j N^j_i
  return (dx.row(0) - dy.row(0) * N).transpose();
}

/// Fiber partials dF/dy^a of a scalar function on TM.
template <class Fn>
Vec fiber_derivative(const ConformalGLSpace& space, Fn&& F, std::size_t node, const Vec& y) {
  const int n = space.dim();
  const double h = space.fiber_step(y);
  Vec out(n);
  for (int a = 0; a < n; ++a) {
    Vec yp = y, ym = y;
    yp(a) += h;
    ym(a) -= h;
    out(a) = (F(node, yp) - F(node, ym)) / (2.0 * h);
  }
  return out;
}

/// h- and v-covariant derivatives of a covector field X_i(x, y).
struct CovectorDerivatives {
  Mat h;  // h(i, j) = X_{i|j}
  Mat v;  // v(i, a) = X_i|_a
};

/// X_{i|j} = dX_i/dx^j - N^m_j dX_i/dy^m - Gamma^m_ij X_m,  X_i|_a = dX_i/dy^a.
template <class Fn>
CovectorDerivatives hv_covariant(const ConformalGLSpace& space, Fn&& X, std::size_t node, const Vec& y) {
  const int n = space.dim();
  auto [dx, dy] = detail::base_and_fiber_partials(space, X, node, y);
  const Mat N = space.nonlinear_connection(node, y);
  const Vec Xc = X(node, y);
  CovectorDerivatives out{dx - dy * N, dy};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) out.h(i, j) -= space.base().Gamma(node, m, i, j) * Xc(m);
  return out;
}

/// Dense rank-3 node-local tensor, index order (i, j, k).
struct Tensor3 {
  int n = 0;
  std::vector<double> v;

  explicit Tensor3(int dim = 0) : n(dim), v(static_cast<std::size_t>(dim * dim * dim), 0.0) {}
  double& operator()(int i, int j, int k) { return v[static_cast<std::size_t>((i * n + j) * n + k)]; }
  double operator()(int i, int j, int k) const { return v[static_cast<std::size_t>((i * n + j) * n + k)]; }
  double max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
};

/// Cyclic sum T(i,j,k) + T(j,k,i) + T(k,i,j).
inline Tensor3 cyclic_sum(const Tensor3& t) {
  Tensor3 out(t.n);
  for (int i = 0; i < t.n; ++i)
    for (int j = 0; j < t.n; ++j)
      for (int k = 0; k < t.n; ++k) out(i, j, k) = t(i, j, k) + t(j, k, i) + t(k, i, j);
  return out;
}

struct TwoTensorDerivatives {
  Tensor3 h;  // h(i, j, k) = X_{ij|k}
  Tensor3 v;  // v(i, j, k) = X_{ij}|_k
};

/// Covariant derivatives of a (0,2) tensor X_ij(x, y): one Gamma term per covariant index.
template <class Fn>
TwoTensorDerivatives hv_covariant_2(const ConformalGLSpace& space, Fn&& X, std::size_t node, const Vec& y) {
  const int n = space.dim();
  auto [dx, dy] = detail::base_and_fiber_partials(space, X, node, y);
  const Mat N = space.nonlinear_connection(node, y);
  const Mat delta = dx - dy * N;
  const Mat Xc = X(node, y);
  TwoTensorDerivatives out{Tensor3(n), Tensor3(n)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double hk = delta(i * n + j, k);
        for (int m = 0; m < n; ++m)
          hk -= space.base().Gamma(node, m, i, k) * Xc(m, j) + space.base().Gamma(node, m, j, k) * Xc(i, m);
        out.h(i, j, k) = hk;
        out.v(i, j, k) = dy(i * n + j, k);
      }
  return out;
}

/// sigma_i = delta sigma / delta x^i.
inline Vec sigma_horizontal(const ConformalGLSpace& space, std::size_t node, const Vec& y) {
  return delta_derivative(space, [&](std::size_t nd, const Vec& yy) { return space.sigma(nd, yy); }, node, y);
}

/// sigma-dot_i = d sigma / d y^i.
inline Vec sigma_vertical(const ConformalGLSpace& space, std::size_t node, const Vec& y) {
  return fiber_derivative(space, [&](std::size_t nd, const Vec& yy) { return space.sigma(nd, yy); }, node, y);
}

/// Derived quantities of the conformal factor at one tangent sample.
struct SigmaBlocks {
  Vec sigma_i;        // delta sigma / delta x^i
  Vec sigma_dot_i;    // d sigma / d y^i
  double sigmaH = 0;  // gamma^kl sigma_k sigma_l
  Mat sigma_ij;       // sigma_{i|j} + sigma_i sigma_j - gamma_ij sigmaH / 2
  double sigma_bar = 0;
  double sigmaV = 0;  // gamma^ab sigma-dot_a sigma-dot_b
  Mat sigma_dot_ab;   // sigma-dot_a|_b + sigma-dot_a sigma-dot_b - gamma_ab sigmaV / 2
  double sigma_dot = 0;
};

inline SigmaBlocks sigma_blocks(const ConformalGLSpace& space, std::size_t node, const Vec& y) {
  const Mat g = space.gamma(node);
  const Mat gi = space.gamma_inv(node);
  SigmaBlocks b;
  b.sigma_i = sigma_horizontal(space, node, y);
  b.sigma_dot_i = sigma_vertical(space, node, y);
  b.sigmaH = b.sigma_i.dot(gi * b.sigma_i);
  b.sigmaV = b.sigma_dot_i.dot(gi * b.sigma_dot_i);

  const Mat sigma_i_bar_j =
      hv_covariant(space, [&](std::size_t nd, const Vec& yy) { return sigma_horizontal(space, nd, yy); }, node, y).h;
  b.sigma_ij = sigma_i_bar_j + b.sigma_i * b.sigma_i.transpose() - 0.5 * b.sigmaH * g;
  b.sigma_bar = (gi.cwiseProduct(b.sigma_ij)).sum();

  const Mat sigma_dot_bar =
      hv_covariant(space, [&](std::size_t nd, const Vec& yy) { return sigma_vertical(space, nd, yy); }, node, y).v;
  b.sigma_dot_ab = sigma_dot_bar + b.sigma_dot_i * b.sigma_dot_i.transpose() - 0.5 * b.sigmaV * g;
  b.sigma_dot = (gi.cwiseProduct(b.sigma_dot_ab)).sum();
  return b;
}

inline std::vector<SigmaBlocks> sigma_blocks(const ConformalGLSpace& space, const std::vector<TangentSample>& samples) {
  std::vector<SigmaBlocks> out(samples.size());
  parallel_for(samples.size(), [&](std::size_t s) { out[s] = sigma_blocks(space, samples[s].node, samples[s].y); });
  return out;
}

} // namespace glh
