#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "field.hpp"

namespace glh {

/// Nodewise Einstein summation over the listed (slot of t1, slot of t2) pairs.
/// Free slots of t1 come first in the result, followed by the free slots of t2.
inline Field contract(const Field& t1, const Field& t2, const std::vector<std::pair<int, int>>& slot_pairs) {
  if (!(t1.grid() == t2.grid())) throw ContractionError("contract: fields live on different grids");
  const Shape& s1 = t1.shape();
  const Shape& s2 = t2.shape();
  std::vector<bool> used1(s1.rank(), false), used2(s2.rank(), false);
  for (auto [a, b] : slot_pairs) {
    if (a < 0 || a >= s1.rank() || b < 0 || b >= s2.rank())
      throw ContractionError("contract: slot pair (" + std::to_string(a) + ", " + std::to_string(b) + ") out of range");
    if (used1[a] || used2[b]) throw ContractionError("contract: slot used twice");
    if (s1.kinds[a] == s2.kinds[b])
      throw ContractionError("contract: slots " + std::to_string(a) + " and " + std::to_string(b) +
                             " have the same variance");
    if (s1.dims[a] != s2.dims[b]) throw ContractionError("contract: paired slots differ in dimension");
    used1[a] = used2[b] = true;
  }

  Shape out_shape;
  std::vector<int> free1, free2;
  for (int s = 0; s < s1.rank(); ++s)
    if (!used1[s]) {
      free1.push_back(s);
      out_shape.dims.push_back(s1.dims[s]);
      out_shape.kinds.push_back(s1.kinds[s]);
    }
  for (int s = 0; s < s2.rank(); ++s)
    if (!used2[s]) {
      free2.push_back(s);
      out_shape.dims.push_back(s2.dims[s]);
      out_shape.kinds.push_back(s2.kinds[s]);
    }
  Shape summed;
  for (auto [a, b] : slot_pairs) {
    summed.dims.push_back(s1.dims[a]);
    summed.kinds.push_back(s1.kinds[a]);
  }

  Field out(t1.grid(), out_shape);
  const std::size_t n_out = out_shape.components();
  const std::size_t n_sum = summed.components();
  std::vector<int> i1(s1.rank()), i2(s2.rank());
  for (std::size_t o = 0; o < n_out; ++o) {
    const auto oi = out_shape.unravel(o);
    for (std::size_t k = 0; k < free1.size(); ++k) i1[free1[k]] = oi[k];
    for (std::size_t k = 0; k < free2.size(); ++k) i2[free2[k]] = oi[free1.size() + k];
    for (std::size_t s = 0; s < n_sum; ++s) {
      const auto si = summed.unravel(s);
      for (std::size_t p = 0; p < slot_pairs.size(); ++p) {
        i1[slot_pairs[p].first] = si[p];
        i2[slot_pairs[p].second] = si[p];
      }
      const std::size_t c1 = s1.offset(i1);
      const std::size_t c2 = s2.offset(i2);
      for (std::size_t n = 0; n < t1.nodes(); ++n) out(n, o) += t1(n, c1) * t2(n, c2);
    }
  }
  return out;
}

} // namespace glh
