#pragma once

#include <cstddef>
#include <vector>

#include "error.hpp"
#include "field.hpp"
#include "grid.hpp"

namespace glh {

/// Tensor-product weights: trapezoid rule on closed axes, rectangle rule on periodic ones.
inline std::vector<double> quadrature_weights(const ChartGrid& grid) {
  std::vector<double> w(grid.size(), 1.0);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    for (int k = 0; k < grid.dim(); ++k) {
      double wk = grid.spacing(k);
      if (!grid.periodic(k)) {
        const int i = grid.axis_index(n, k);
        if (i == 0 || i == grid.nodes(k) - 1) wk *= 0.5;
      }
      w[n] *= wk;
    }
  }
  return w;
}

inline double quadrature(const Field& rho) {
  if (rho.components() != 1) throw Error("quadrature: expected a scalar field");
  const auto w = quadrature_weights(rho.grid());
  double acc = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) acc += w[n] * rho(n, 0);
  return acc;
}

} // namespace glh
