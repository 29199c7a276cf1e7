#pragma once

#include <array>
#include <functional>
#include <vector>

#include "homog/errors.hpp"
#include "homog/linalg.hpp"

namespace homog {

/// A propagation direction on the unit sphere. Rational directions keep the
/// primitive integer vector k they came from and the period r = 1/|k| of the
/// plane lattice in that direction; irrational directions only carry the unit
/// vector.
struct Direction {
  int d = 2;
  bool rational = true;
  IVec k{};
  Vec e{};
  double r = 0;
};

/// Reduce k to its primitive representative and normalize. Throws ZeroVector
/// when k = 0.
Direction primitive_direction(int d, const IVec& k);

/// Direction from a real generator, marked irrational. Throws ZeroVector when
/// |v| is numerically zero.
Direction irrational_direction(int d, const Vec& v);

/// Integer chart of the slice sub-torus orthogonal to a rational direction.
/// The columns B form a basis of M_e = Z^d ∩ e-perp, ordered shortest first
/// with lexicographic tie-break and sign fixed so the first nonzero entry is
/// positive. Q is the Gram-Schmidt orthonormalization of B, P the dual basis
/// B (B^T B)^{-1}, G the Gram matrix B^T B.
struct SliceChart {
  Direction e;
  int sdim = 1;
  std::array<IVec, 2> B{};
  std::array<Vec, 2> Q{};
  std::array<Vec, 2> P{};
  Mat G{};
  Mat Ginv{};
};

SliceChart slice_lattice_basis(const Direction& e);

/// Ambient point of the slice at offset s, chart coordinate t in [0,1)^{d-1}.
Vec slice_point(const SliceChart& chart, double s, const double* t);

/// Chart displacement tau with the property that the slice at s + r equals
/// the slice at s shifted by tau: g(s + r, t) = g(s, t - tau) for any
/// 1-periodic ambient sampler g.
std::array<double, 2> slice_monodromy(const SliceChart& chart);

/// Rational approximations e_n -> e tilting toward a transversal eta.
struct ApproachSpec {
  Direction e;
  Vec eta{};
  IVec k_eta{};
  int depth = 0;
  std::vector<Direction> sequence;
  std::vector<double> theta; // angle between e_n and e
};

/// Build the canonical approach sequence K_n = (2^n s) k_e - k_eta where
/// k_eta is the shortest slice-lattice vector within 1e-3 radians of eta and
/// s scales the first term past k_eta. Throws EtaNotRepresentable when no
/// slice-lattice vector of norm <= 1e4 aligns with eta.
ApproachSpec approach_sequence(const Direction& e, const Vec& eta, int depth);

/// Average of f over the uniform N^{d-1} chart grid of the slice at offset s.
/// f is evaluated at ambient points reduced mod 1 and must be 1-periodic.
double slice_average(const std::function<double(const Vec&)>& f, const SliceChart& chart,
                     double s, int N);
double slice_average(const std::function<double(const Vec&)>& f, const Direction& e, double s,
                     int N);

} // namespace homog
