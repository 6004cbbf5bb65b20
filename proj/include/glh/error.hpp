#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace glh {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A finite-difference stencil does not fit on the grid.
class StencilSupportError : public Error {
public:
  using Error::Error;
};

/// A metric is not symmetric, not invertible, or too badly conditioned at some node.
class SingularMetricError : public Error {
public:
  SingularMetricError(const std::string& what, std::size_t node, std::vector<double> where)
      : Error(what), node_(node), where_(std::move(where)) {}

  std::size_t node() const noexcept { return node_; }
  const std::vector<double>& coordinates() const noexcept { return where_; }

private:
  std::size_t node_;
  std::vector<double> where_;
};

/// Index contraction between slots of the same variance or different dimension.
class ContractionError : public Error {
public:
  using Error::Error;
};

/// The input lies outside the domain of a functional (e.g. a vanishing pairing).
class DomainError : public Error {
public:
  DomainError(const std::string& what, std::vector<std::size_t> nodes)
      : Error(what), nodes_(std::move(nodes)) {}

  const std::vector<std::size_t>& nodes() const noexcept { return nodes_; }

private:
  std::vector<std::size_t> nodes_;
};

/// A direction-dependent metric was queried on its singular hyperplane.
class SingularDirectionError : public Error {
public:
  SingularDirectionError(const std::string& what, std::vector<double> x, std::vector<double> y)
      : Error(what), x_(std::move(x)), y_(std::move(y)) {}

  const std::vector<double>& point() const noexcept { return x_; }
  const std::vector<double>& direction() const noexcept { return y_; }

private:
  std::vector<double> x_;
  std::vector<double> y_;
};

/// Division by a zero coupling constant.
class DivisionGuardError : public Error {
public:
  using Error::Error;
};

namespace detail {

inline std::string format_point(const std::vector<double>& p) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k) os << ", ";
    os << p[k];
  }
  os << ')';
  return os.str();
}

} // namespace detail
} // namespace glh
