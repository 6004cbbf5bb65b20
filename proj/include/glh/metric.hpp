#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "field.hpp"

namespace glh {

inline constexpr double kDefaultConditionBound = 1e12;

/// Inverse of a symmetric matrix. Throws SingularMetricError (tagged with
/// `node` and `where`) when the matrix is asymmetric or its condition number
/// exceeds `condition_bound`.
inline Mat invert_symmetric(const Mat& m, double condition_bound = kDefaultConditionBound, std::size_t node = 0,
                            const std::vector<double>& where = {}) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw SingularMetricError("metric is not symmetric at node " + std::to_string(node) + " " +
                                  detail::format_point(where),
                              node, where);
  Eigen::SelfAdjointEigenSolver<Mat> eig(m, Eigen::EigenvaluesOnly);
  const auto ev = eig.eigenvalues().cwiseAbs();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0) || !std::isfinite(hi) || hi / lo > condition_bound)
    throw SingularMetricError("singular metric at node " + std::to_string(node) + " " + detail::format_point(where) +
                                  " (condition " + std::to_string(lo > 0.0 ? hi / lo : INFINITY) + ")",
                              node, where);
  Mat inv = m.inverse();
  return 0.5 * (inv + inv.transpose());
}

/// True when `m` is symmetric positive definite (Cholesky succeeds).
inline bool is_positive_definite(const Mat& m) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
  Eigen::LLT<Mat> llt(m);
  return llt.info() == Eigen::Success;
}

/// Checks symmetry and positive definiteness at every node.
inline void require_riemannian(const Field& g, const std::string& name = "metric") {
  for (std::size_t n = 0; n < g.nodes(); ++n)
    if (!is_positive_definite(g.matrix(n)))
      throw SingularMetricError(name + " is not symmetric positive definite at node " + std::to_string(n) + " " +
                                    detail::format_point(g.grid().coords(n)),
                                n, g.grid().coords(n));
}

/// Pointwise inverse of a (0,2) metric field; the result is contravariant.
inline Field invert_metric(const Field& g, double condition_bound = kDefaultConditionBound) {
  if (g.rank() != 2 || g.shape().dims[0] != g.shape().dims[1]) throw Error("invert_metric: expected a square rank-2 field");
  Shape s = g.shape();
  s.kinds = {opposite(s.kinds[0]), opposite(s.kinds[1])};
  Field out(g.grid(), s);
  for (std::size_t n = 0; n < g.nodes(); ++n)
    out.set_matrix(n, invert_symmetric(g.matrix(n), condition_bound, n, g.grid().coords(n)));
  return out;
}

/// sqrt(det g) at every node.
inline Field volume_density(const Field& g) {
  Field out(g.grid(), scalar_shape());
  for (std::size_t n = 0; n < g.nodes(); ++n) out(n, 0) = std::sqrt(std::abs(g.matrix(n).determinant()));
  return out;
}

} // namespace glh
