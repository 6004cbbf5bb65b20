#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace glh {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const noexcept { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

/// Rectangular sampled chart. Periodic axes model a flat torus factor and
/// exclude the right endpoint; non-periodic axes include both endpoints.
///
/// Nodes are numbered row-major: the last axis varies fastest.
class ChartGrid {
public:
  ChartGrid() = default;

  ChartGrid(std::vector<Interval> extents, std::vector<int> nodes, std::vector<bool> periodic,
            int stencil_order = 2)
      : extents_(std::move(extents)), nodes_(std::move(nodes)), periodic_(std::move(periodic)),
        stencil_order_(stencil_order) {
    const std::size_t d = extents_.size();
    if (d == 0) throw Error("ChartGrid: dimension must be positive");
    if (nodes_.size() != d || periodic_.size() != d)
      throw Error("ChartGrid: extents, nodes and periodic flags must have the same length");
    if (stencil_order_ != 2 && stencil_order_ != 4)
      throw Error("ChartGrid: stencil order must be 2 or 4, got " + std::to_string(stencil_order_));
    spacing_.resize(d);
    strides_.assign(d, 1);
    for (std::size_t k = 0; k < d; ++k) {
      if (nodes_[k] < 5)
        throw StencilSupportError("ChartGrid: axis " + std::to_string(k) + " has " +
                                  std::to_string(nodes_[k]) + " nodes, at least 5 are required");
      if (!(extents_[k].hi > extents_[k].lo))
        throw Error("ChartGrid: axis " + std::to_string(k) + " has an empty extent");
      spacing_[k] = extents_[k].length() / (nodes_[k] - (periodic_[k] ? 0 : 1));
    }
    for (std::size_t k = d - 1; k > 0; --k) strides_[k - 1] = strides_[k] * nodes_[k];
    size_ = strides_[0] * nodes_[0];
  }

  /// Closed box, both endpoints sampled on every axis.
  static ChartGrid box(std::vector<Interval> extents, std::vector<int> nodes, int stencil_order = 2) {
    std::vector<bool> periodic(extents.size(), false);
    return ChartGrid(std::move(extents), std::move(nodes), std::move(periodic), stencil_order);
  }

  /// Flat torus, every axis periodic.
  static ChartGrid torus(std::vector<Interval> extents, std::vector<int> nodes, int stencil_order = 2) {
    std::vector<bool> periodic(extents.size(), true);
    return ChartGrid(std::move(extents), std::move(nodes), std::move(periodic), stencil_order);
  }

  int dim() const noexcept { return static_cast<int>(extents_.size()); }
  std::size_t size() const noexcept { return size_; }
  int nodes(int axis) const { return nodes_.at(axis); }
  double spacing(int axis) const { return spacing_.at(axis); }
  bool periodic(int axis) const { return periodic_.at(axis); }
  const Interval& extent(int axis) const { return extents_.at(axis); }
  int stencil_order() const noexcept { return stencil_order_; }
  const std::vector<int>& nodes_per_axis() const noexcept { return nodes_; }

  ChartGrid with_stencil_order(int order) const {
    return ChartGrid(extents_, nodes_, periodic_, order);
  }

  /// Product of axis lengths.
  double volume() const {
    double v = 1.0;
    for (const auto& e : extents_) v *= e.length();
    return v;
  }

  int axis_index(std::size_t node, int axis) const {
    return static_cast<int>((node / strides_[axis]) % static_cast<std::size_t>(nodes_[axis]));
  }

  std::vector<int> multi_index(std::size_t node) const {
    std::vector<int> idx(extents_.size());
    for (int k = 0; k < dim(); ++k) idx[k] = axis_index(node, k);
    return idx;
  }

  std::size_t flat_index(std::span<const int> idx) const {
    std::size_t node = 0;
    for (int k = 0; k < dim(); ++k) node += static_cast<std::size_t>(idx[k]) * strides_[k];
    return node;
  }

  double coord(std::size_t node, int axis) const {
    return extents_[axis].lo + spacing_[axis] * axis_index(node, axis);
  }

  std::vector<double> coords(std::size_t node) const {
    std::vector<double> c(extents_.size());
    for (int k = 0; k < dim(); ++k) c[k] = coord(node, k);
    return c;
  }

  /// Node reached by moving `offset` steps along `axis`, plus the number of
  /// times the move wrapped around a periodic seam (negative when moving left).
  /// Non-periodic moves must stay inside the grid.
  std::pair<std::size_t, int> shifted(std::size_t node, int axis, int offset) const {
    const int n = nodes_[axis];
    const int i = axis_index(node, axis);
    int j = i + offset;
    int wraps = 0;
    if (periodic_[axis]) {
      while (j < 0) { j += n; --wraps; }
      while (j >= n) { j -= n; ++wraps; }
    } else if (j < 0 || j >= n) {
      throw StencilSupportError("ChartGrid: offset " + std::to_string(offset) + " leaves axis " +
                                std::to_string(axis));
    }
    const auto moved = static_cast<std::ptrdiff_t>(node) +
                       static_cast<std::ptrdiff_t>(j - i) * static_cast<std::ptrdiff_t>(strides_[axis]);
    return {static_cast<std::size_t>(moved), wraps};
  }

  /// Distance in nodes to the nearest non-periodic boundary (large on fully periodic grids).
  int boundary_distance(std::size_t node) const {
    int best = 1 << 30;
    for (int k = 0; k < dim(); ++k) {
      if (periodic_[k]) continue;
      const int i = axis_index(node, k);
      best = std::min({best, i, nodes_[k] - 1 - i});
    }
    return best;
  }

  bool operator==(const ChartGrid& o) const {
    return extents_ == o.extents_ && nodes_ == o.nodes_ && periodic_ == o.periodic_;
  }

private:
  std::vector<Interval> extents_;
  std::vector<int> nodes_;
  std::vector<bool> periodic_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
  int stencil_order_ = 2;
};

} // namespace glh
