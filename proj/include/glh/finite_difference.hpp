#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "field.hpp"
#include "grid.hpp"

namespace glh {

/// First-derivative stencil: d/dx u(i) ~ sum_k weights[k] * u(i + offsets[k]) / h.
struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;
};

/// Central stencil in the interior (and everywhere on periodic axes); one-sided
/// stencils of the same order at the ends of non-periodic axes.
inline Stencil first_derivative_stencil(int order, int index, int nodes, bool periodic) {
  if (order != 2 && order != 4) throw StencilSupportError("unsupported stencil order " + std::to_string(order));
  if (nodes < order + 1)
    throw StencilSupportError("axis with " + std::to_string(nodes) + " nodes cannot support an order-" +
                              std::to_string(order) + " stencil");
  if (order == 2) {
    if (periodic || (index > 0 && index < nodes - 1)) return {{-1, 1}, {-0.5, 0.5}};
    if (index == 0) return {{0, 1, 2}, {-1.5, 2.0, -0.5}};
    return {{0, -1, -2}, {1.5, -2.0, 0.5}};
  }
  const double t = 1.0 / 12.0;
  if (periodic || (index > 1 && index < nodes - 2)) return {{-2, -1, 1, 2}, {t, -8 * t, 8 * t, -t}};
  if (index == 0) return {{0, 1, 2, 3, 4}, {-25 * t, 48 * t, -36 * t, 16 * t, -3 * t}};
  if (index == 1) return {{-1, 0, 1, 2, 3}, {-3 * t, -10 * t, 18 * t, -6 * t, t}};
  if (index == nodes - 1) return {{0, -1, -2, -3, -4}, {25 * t, -48 * t, 36 * t, -16 * t, 3 * t}};
  return {{1, 0, -1, -2, -3}, {3 * t, 10 * t, -18 * t, 6 * t, -t}};
}

/// Second-derivative stencil along one axis (weights divided by h^2), with
/// one-sided variants of the same order near non-periodic ends.
inline Stencil second_derivative_stencil(int order, int index, int nodes, bool periodic) {
  if (order != 2 && order != 4) throw StencilSupportError("unsupported stencil order " + std::to_string(order));
  if (nodes < order + 2)
    throw StencilSupportError("axis with " + std::to_string(nodes) + " nodes cannot support an order-" +
                              std::to_string(order) + " second-derivative stencil");
  auto mirror = [](Stencil s) {
    for (int& o : s.offsets) o = -o;
    return s;
  };
  if (order == 2) {
    if (periodic || (index > 0 && index < nodes - 1)) return {{-1, 0, 1}, {1.0, -2.0, 1.0}};
    const Stencil left{{0, 1, 2, 3}, {2.0, -5.0, 4.0, -1.0}};
    return index == 0 ? left : mirror(left);
  }
  const double t = 1.0 / 12.0;
  if (periodic || (index > 1 && index < nodes - 2)) return {{-2, -1, 0, 1, 2}, {-t, 16 * t, -30 * t, 16 * t, -t}};
  const Stencil edge{{0, 1, 2, 3, 4, 5}, {45 * t, -154 * t, 214 * t, -156 * t, 61 * t, -10 * t}};
  const Stencil next{{-1, 0, 1, 2, 3, 4}, {10 * t, -15 * t, -4 * t, 14 * t, -6 * t, t}};
  if (index == 0) return edge;
  if (index == 1) return next;
  if (index == nodes - 1) return mirror(edge);
  return mirror(next);
}

/// Half-width of the interior stencil: nodes closer than this to a
/// non-periodic boundary use one-sided stencils.
inline int stencil_half_width(int order) { return order / 2; }

/// Derivative along `axis` at one node of a quantity given per node by `value(node)`.
/// Crossing a periodic seam adds `seam_jump` per wrap (lifts of maps into a torus).
template <class ValueFn>
double fd_at(const ChartGrid& grid, std::size_t node, int axis, int order, ValueFn&& value, double seam_jump = 0.0) {
  const Stencil s = first_derivative_stencil(order, grid.axis_index(node, axis), grid.nodes(axis), grid.periodic(axis));
  double acc = 0.0;
  for (std::size_t k = 0; k < s.offsets.size(); ++k) {
    const auto [nb, wraps] = grid.shifted(node, axis, s.offsets[k]);
    acc += s.weights[k] * (value(nb) + wraps * seam_jump);
  }
  return acc / grid.spacing(axis);
}

/// Componentwise partial derivative of a sampled field along one axis.
/// `seam_jump`, when non-empty, holds one jump per component.
inline Field fd_partial(const Field& field, int axis, int order, std::span<const double> seam_jump = {}) {
  const ChartGrid& g = field.grid();
  if (axis < 0 || axis >= g.dim())
    throw Error("fd_partial: axis " + std::to_string(axis) + " out of range for a " + std::to_string(g.dim()) +
                "-dimensional grid");
  if (!seam_jump.empty() && seam_jump.size() != field.components())
    throw Error("fd_partial: seam jump needs one entry per component");
  Field out(g, field.shape());
  const std::size_t nc = field.components();
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Stencil s = first_derivative_stencil(order, g.axis_index(n, axis), g.nodes(axis), g.periodic(axis));
    for (std::size_t k = 0; k < s.offsets.size(); ++k) {
      const auto [nb, wraps] = g.shifted(n, axis, s.offsets[k]);
      for (std::size_t c = 0; c < nc; ++c) {
        const double jump = seam_jump.empty() ? 0.0 : wraps * seam_jump[c];
        out(n, c) += s.weights[k] * (field(nb, c) + jump);
      }
    }
  }
  out *= 1.0 / g.spacing(axis);
  return out;
}

inline Field fd_partial(const Field& field, int axis) { return fd_partial(field, axis, field.grid().stencil_order()); }

/// Componentwise second partial d_a d_b. Mixed partials compose first-derivative
/// stencils along different axes; pure partials use a dedicated stencil so the
/// one-sided boundary closure keeps the full order.
inline Field fd_second_partial(const Field& field, int a, int b, int order) {
  if (a != b) return fd_partial(fd_partial(field, a, order), b, order);
  const ChartGrid& g = field.grid();
  if (a < 0 || a >= g.dim()) throw Error("fd_second_partial: axis out of range");
  Field out(g, field.shape());
  const std::size_t nc = field.components();
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Stencil s = second_derivative_stencil(order, g.axis_index(n, a), g.nodes(a), g.periodic(a));
    for (std::size_t k = 0; k < s.offsets.size(); ++k) {
      const std::size_t nb = g.shifted(n, a, s.offsets[k]).first;
      for (std::size_t c = 0; c < nc; ++c) out(n, c) += s.weights[k] * field(nb, c);
    }
  }
  out *= 1.0 / (g.spacing(a) * g.spacing(a));
  return out;
}

/// Gradient of a field: appends one covariant slot (the derivative index) at the end.
inline Field fd_gradient(const Field& field, int order) {
  const ChartGrid& g = field.grid();
  Shape s = field.shape();
  s.dims.push_back(g.dim());
  s.kinds.push_back(Variance::Down);
  Field out(g, s);
  const std::size_t nc = field.components();
  for (int a = 0; a < g.dim(); ++a) {
    const Field d = fd_partial(field, a, order);
    for (std::size_t n = 0; n < g.size(); ++n)
      for (std::size_t c = 0; c < nc; ++c) out(n, c * g.dim() + a) = d(n, c);
  }
  return out;
}

} // namespace glh
