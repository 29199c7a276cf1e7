#pragma once

#include <cstddef>
#include <vector>

#include "homog/coeffs.hpp"
#include "homog/lattice.hpp"

namespace homog {

/// Slice cell problem pulled back to unit chart coordinates t in [0,1)^{d-1}
/// through y(t) = s e + B t. The pulled-back diffusion is c(t) = P^T b(y(t)) P.
/// Packed per-node storage: sdim 1 -> {c11}, sdim 2 -> {c11, c22, c12}.
struct SlicePullback {
  SliceChart chart;
  double s = 0;
  int M = 0;
  int sdim = 1;
  std::vector<double> c;
  std::vector<double> mob; // m(y(t), e), filled on request

  int ncomp() const { return sdim == 1 ? 1 : 3; }
  std::size_t nodes() const { return sdim == 1 ? std::size_t(M) : std::size_t(M) * std::size_t(M); }
};

SlicePullback make_pullback(const ProjectedOperator& op, const SliceChart& chart, double s,
                            int M, bool want_mobility);

/// Ambient point of chart node (j1) or (j1, j2).
Vec pullback_point(const SlicePullback& p, int j1, int j2 = 0);

/// L u = sum_ij c_ij D2_ij u with periodic central differences.
void apply_generator(const SlicePullback& p, const std::vector<double>& u,
                     std::vector<double>& out);

/// Exact discrete transpose: L^T q = sum_ij D2_ij (c_ij q).
void apply_generator_adjoint(const SlicePullback& p, const std::vector<double>& q,
                             std::vector<double>& out);

/// Diagonal of the generator matrix (same for L and L^T).
void generator_diagonal(const SlicePullback& p, std::vector<double>& diag);

} // namespace homog
