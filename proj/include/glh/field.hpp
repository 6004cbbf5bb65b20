#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "grid.hpp"

namespace glh {

enum class Variance { Up, Down };

inline Variance opposite(Variance v) noexcept { return v == Variance::Up ? Variance::Down : Variance::Up; }

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Index structure of a node-local tensor: one dimension and one variance per slot.
/// Components are stored in lexicographic index order (last slot fastest).
struct Shape {
  std::vector<int> dims;
  std::vector<Variance> kinds;

  Shape() = default;
  Shape(std::vector<int> d, std::vector<Variance> k) : dims(std::move(d)), kinds(std::move(k)) {
    if (dims.size() != kinds.size())
      throw Error("Shape: index arity " + std::to_string(dims.size()) + " does not match " +
                  std::to_string(kinds.size()) + " variance tags");
  }

  int rank() const noexcept { return static_cast<int>(dims.size()); }

  std::size_t components() const noexcept {
    std::size_t c = 1;
    for (int d : dims) c *= static_cast<std::size_t>(d);
    return c;
  }

  std::size_t offset(std::span<const int> idx) const {
    std::size_t off = 0;
    for (std::size_t s = 0; s < dims.size(); ++s) off = off * dims[s] + idx[s];
    return off;
  }

  std::vector<int> unravel(std::size_t off) const {
    std::vector<int> idx(dims.size());
    for (std::size_t s = dims.size(); s-- > 0;) {
      idx[s] = static_cast<int>(off % dims[s]);
      off /= dims[s];
    }
    return idx;
  }

  bool operator==(const Shape&) const = default;
};

/// A tensor sampled at every node of a chart grid.
class Field {
public:
  Field() = default;

  Field(ChartGrid grid, Shape shape)
      : grid_(std::move(grid)), shape_(std::move(shape)),
        data_(grid_.size() * shape_.components(), 0.0) {}

  const ChartGrid& grid() const noexcept { return grid_; }
  const Shape& shape() const noexcept { return shape_; }
  int rank() const noexcept { return shape_.rank(); }
  std::size_t components() const noexcept { return shape_.components(); }
  std::size_t nodes() const noexcept { return grid_.size(); }

  double& operator()(std::size_t node, std::size_t comp) { return data_[node * components() + comp]; }
  double operator()(std::size_t node, std::size_t comp) const { return data_[node * components() + comp]; }

  double& at(std::size_t node, std::initializer_list<int> idx) {
    return (*this)(node, shape_.offset(std::span<const int>(idx.begin(), idx.size())));
  }
  double at(std::size_t node, std::initializer_list<int> idx) const {
    return (*this)(node, shape_.offset(std::span<const int>(idx.begin(), idx.size())));
  }

  std::span<double> node(std::size_t n) { return {data_.data() + n * components(), components()}; }
  std::span<const double> node(std::size_t n) const { return {data_.data() + n * components(), components()}; }

  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  /// Rank-2 node value as a matrix.
  Mat matrix(std::size_t n) const {
    if (rank() != 2) throw Error("Field::matrix: field has rank " + std::to_string(rank()));
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        data_.data() + n * components(), shape_.dims[0], shape_.dims[1]);
  }

  Vec vector(std::size_t n) const {
    return Eigen::Map<const Vec>(data_.data() + n * components(), static_cast<Eigen::Index>(components()));
  }

  void set_matrix(std::size_t n, const Mat& m) {
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) (*this)(n, static_cast<std::size_t>(i * m.cols() + j)) = m(i, j);
  }

  void set_vector(std::size_t n, const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) (*this)(n, static_cast<std::size_t>(i)) = v(i);
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  Field& operator+=(const Field& o) {
    check_compatible(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_compatible(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Field& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }

  /// Samples `fn(coords, out)` at every node; `out` has `components()` entries.
  template <class Fn>
  static Field sample(const ChartGrid& grid, Shape shape, Fn&& fn) {
    Field f(grid, std::move(shape));
    for (std::size_t n = 0; n < grid.size(); ++n) {
      const auto x = grid.coords(n);
      fn(std::span<const double>(x), f.node(n));
    }
    return f;
  }

private:
  void check_compatible(const Field& o) const {
    if (!(grid_ == o.grid_) || !(shape_ == o.shape_)) throw Error("Field: incompatible operands");
  }

  ChartGrid grid_;
  Shape shape_;
  std::vector<double> data_;
};

inline Shape scalar_shape() { return Shape({}, {}); }
inline Shape vector_shape(int n) { return Shape({n}, {Variance::Up}); }
inline Shape covector_shape(int n) { return Shape({n}, {Variance::Down}); }
inline Shape metric_shape(int n) { return Shape({n, n}, {Variance::Down, Variance::Down}); }
inline Shape inverse_metric_shape(int n) { return Shape({n, n}, {Variance::Up, Variance::Up}); }

/// Samples a scalar function of the node coordinates.
inline Field sample_scalar(const ChartGrid& grid, const std::function<double(std::span<const double>)>& fn) {
  return Field::sample(grid, scalar_shape(), [&](std::span<const double> x, std::span<double> out) { out[0] = fn(x); });
}

/// Samples a symmetric (0,2) tensor given as a matrix-valued function of the coordinates.
inline Field sample_metric(const ChartGrid& grid, const std::function<Mat(std::span<const double>)>& fn) {
  const int d = static_cast<int>(fn(grid.coords(0)).rows());
  Field f(grid, metric_shape(d));
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto x = grid.coords(n);
    f.set_matrix(n, fn(x));
  }
  return f;
}

} // namespace glh
