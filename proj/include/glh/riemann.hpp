#pragma once

#include <cstddef>
#include <vector>

#include "tensor_core.hpp"

namespace glh {

/// Which slot of r^i_{jkl} the Ricci trace contracts the upper index with.
///  - last_slot:  r_ij = r^k_{ijk} (default)
///  - third_slot: r_ij = r^k_{ikj}
/// The curvature tensor carries the sign that makes the round sphere's scalar
/// curvature positive under the selected trace.
enum class RicciConvention { last_slot, third_slot };

/// Christoffel symbols, curvature and traces of a Riemannian metric on a chart.
struct RiemannPackage {
  Field gamma;        // gamma_ij
  Field gamma_inv;    // gamma^ij
  Field christoffel;  // Gamma^i_jk, slots (i, j, k)
  Field curvature;    // r^i_jkl, slots (i, j, k, l)
  Field ricci;        // r_ij
  Field scalar;       // r
  RicciConvention convention = RicciConvention::last_slot;

  int dim() const { return gamma.shape().dims[0]; }
  const ChartGrid& grid() const { return gamma.grid(); }

  double Gamma(std::size_t node, int i, int j, int k) const {
    const int n = dim();
    return christoffel(node, static_cast<std::size_t>((i * n + j) * n + k));
  }
  double R(std::size_t node, int i, int j, int k, int l) const {
    const int n = dim();
    return curvature(node, static_cast<std::size_t>(((i * n + j) * n + k) * n + l));
  }

  /// r_ij - r gamma_ij / 2.
  Field einstein_tensor() const {
    Field e = ricci;
    for (std::size_t n = 0; n < e.nodes(); ++n)
      for (std::size_t c = 0; c < e.components(); ++c) e(n, c) -= 0.5 * scalar(n, 0) * gamma(n, c);
    return e;
  }
};

/// Gamma^i_jk = 1/2 gamma^im (d_j gamma_mk + d_k gamma_mj - d_m gamma_jk).
inline Field christoffel(const Field& gamma, const Field& gamma_inv) {
  const ChartGrid& grid = gamma.grid();
  const int n = gamma.shape().dims[0];
  if (grid.dim() != n) throw Error("christoffel: metric dimension differs from chart dimension");
  std::vector<Field> dg;
  for (int a = 0; a < n; ++a) dg.push_back(fd_partial(gamma, a));
  Field out(grid, Shape({n, n, n}, {Variance::Up, Variance::Down, Variance::Down}));
  parallel_for(grid.size(), [&](std::size_t node) {
    auto d = [&](int a, int i, int j) { return dg[a](node, static_cast<std::size_t>(i * n + j)); };
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double acc = 0.0;
          for (int m = 0; m < n; ++m)
            acc += gamma_inv(node, static_cast<std::size_t>(i * n + m)) * (d(j, m, k) + d(k, m, j) - d(m, j, k));
          out(node, static_cast<std::size_t>((i * n + j) * n + k)) = 0.5 * acc;
        }
  });
  return out;
}

inline Field christoffel(const Field& gamma) { return christoffel(gamma, invert_metric(gamma)); }

/// Full curvature package of gamma (Christoffel symbols, curvature, Ricci, scalar).
inline RiemannPackage curvature_package(const Field& gamma,
                                        RicciConvention convention = RicciConvention::last_slot,
                                        double condition_bound = kDefaultConditionBound) {
  require_riemannian(gamma, "gamma");
  RiemannPackage p;
  p.convention = convention;
  p.gamma = gamma;
  p.gamma_inv = invert_metric(gamma, condition_bound);
  p.christoffel = christoffel(gamma, p.gamma_inv);

  const ChartGrid& grid = gamma.grid();
  const int n = gamma.shape().dims[0];
  const int order = grid.stencil_order();
  // d_k Gamma^i_jl is assembled from first and second partials of gamma rather than by
  // differencing Gamma, which would lose an order at one-sided boundary nodes:
  //   d_k Gamma^i_jl = -gamma^ia d_k gamma_ab Gamma^b_jl
  //                    + 1/2 gamma^im (d_kj gamma_ml + d_kl gamma_mj - d_km gamma_jl)
  std::vector<Field> dg;
  for (int a = 0; a < n; ++a) dg.push_back(fd_partial(gamma, a, order));
  std::vector<Field> hess(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      hess[a * n + b] = fd_second_partial(gamma, a, b, order);
      if (b != a) hess[b * n + a] = hess[a * n + b];
    }
  Field dG(grid, Shape({n, n, n, n}, {Variance::Down, Variance::Up, Variance::Down, Variance::Down}));
  parallel_for(grid.size(), [&](std::size_t node) {
    auto gi = [&](int i, int j) { return p.gamma_inv(node, static_cast<std::size_t>(i * n + j)); };
    auto d1 = [&](int k, int a, int b) { return dg[k](node, static_cast<std::size_t>(a * n + b)); };
    auto d2 = [&](int k, int j, int a, int b) { return hess[k * n + j](node, static_cast<std::size_t>(a * n + b)); };
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int l = 0; l < n; ++l) {
            double acc = 0.0;
            for (int a = 0; a < n; ++a)
              for (int b = 0; b < n; ++b) acc -= gi(i, a) * d1(k, a, b) * p.Gamma(node, b, j, l);
            for (int m = 0; m < n; ++m) acc += 0.5 * gi(i, m) * (d2(k, j, m, l) + d2(k, l, m, j) - d2(k, m, j, l));
            dG(node, static_cast<std::size_t>(((k * n + i) * n + j) * n + l)) = acc;
          }
  });
  auto dGa = [&](std::size_t node, int a, int i, int j, int k) {
    return dG(node, static_cast<std::size_t>(((a * n + i) * n + j) * n + k));
  };

  // With the standard R^i_jkl = d_k G^i_jl - d_l G^i_jk + G^i_mk G^m_jl - G^i_ml G^m_jk
  // the positive Ricci trace is R^k_ikj; the last-slot trace needs the opposite sign.
  const double sign = convention == RicciConvention::last_slot ? -1.0 : 1.0;
  p.curvature = Field(grid, Shape({n, n, n, n}, {Variance::Up, Variance::Down, Variance::Down, Variance::Down}));
  parallel_for(grid.size(), [&](std::size_t node) {
    auto G = [&](int i, int j, int k) { return p.Gamma(node, i, j, k); };
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double r = dGa(node, k, i, j, l) - dGa(node, l, i, j, k);
            for (int m = 0; m < n; ++m) r += G(i, m, k) * G(m, j, l) - G(i, m, l) * G(m, j, k);
            p.curvature(node, static_cast<std::size_t>(((i * n + j) * n + k) * n + l)) = sign * r;
          }
  });

  p.ricci = Field(grid, metric_shape(n));
  p.scalar = Field(grid, scalar_shape());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
          acc += convention == RicciConvention::last_slot ? p.R(node, k, i, j, k) : p.R(node, k, i, k, j);
        p.ricci(node, static_cast<std::size_t>(i * n + j)) = acc;
      }
    double r = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        r += p.gamma_inv(node, static_cast<std::size_t>(i * n + j)) * p.ricci(node, static_cast<std::size_t>(i * n + j));
    p.scalar(node, 0) = r;
  }
  return p;
}

/// Largest |r^i_jkl + r^i_klj + r^i_ljk| over all nodes and indices.
inline double first_bianchi_defect(const RiemannPackage& p) {
  const int n = p.dim();
  double worst = 0.0;
  for (std::size_t node = 0; node < p.grid().size(); ++node)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            worst = std::max(worst, std::abs(p.R(node, i, j, k, l) + p.R(node, i, k, l, j) + p.R(node, i, l, j, k)));
  return worst;
}

} // namespace glh
