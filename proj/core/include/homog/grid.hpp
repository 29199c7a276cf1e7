#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

namespace homog {

/// Where the values of a GridFunction live.
enum class GridDomain {
  torus,   // periodic unit cell [0,1)^rank, uniform per-axis grids
  slice,   // periodic chart coordinates of a slice sub-torus
  box,     // Dirichlet box, nodes include the boundary
  product, // slice offset times slice chart, periodic
};

/// Plain multi-dimensional array of nodal values. Last axis varies fastest.
struct GridFunction {
  GridDomain domain = GridDomain::torus;
  std::vector<int> dims;
  std::vector<double> h; // spacing per axis
  std::vector<double> v;

  int rank() const { return int(dims.size()); }

  std::size_t size() const {
    std::size_t n = 1;
    for (int m : dims) n *= std::size_t(m);
    return n;
  }

  void allocate() { v.assign(size(), 0.0); }
};

inline int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

} // namespace homog
