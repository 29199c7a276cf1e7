#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homog/coeffs.hpp"
#include "homog/grid.hpp"
#include "homog/lattice.hpp"

namespace homog {

enum class ObstacleKind { subsolution, supersolution };

/// Linear complementarity solution on the chart cube Q_R in e-perp.
/// Subsolutions satisfy u <= 0 with the equation holding off the contact set
/// {u = 0}; supersolutions mirror the signs. Density counts contact cells
/// whose every corner is in contact, normalized by the cube volume.
struct ObstacleSolution {
  ObstacleKind kind = ObstacleKind::subsolution;
  Direction e;
  Mat X{};
  double mu = 0;
  double R = 0;
  double theta = 1;
  Vec x_shift{};
  GridFunction u;
  std::vector<std::uint8_t> contact_mask; // nodal, 1 where u = 0
  double density = 0;
  double comp_residual = 0; // worst complementarity violation
  int sweeps = 0;
};

/// Projected SOR (omega = 1.5) for
///   max{ -tr(b(X~ + D^2 u))/m - mu, u } = 0   (subsolution)
///   min{ -tr(b(X~ + D^2 u))/m - mu, u } = 0   (supersolution)
/// on the cube [-R/2, R/2]^{d-1} with u = 0 on the boundary. Coefficients are
/// sampled at theta^{-1}(x_shift + sum z_a q_a) with q the orthonormal chart.
/// Requires M >= 8 R / theta so the grid resolves the coefficient period.
/// Throws NotConverged when the sweep cap is exhausted.
ObstacleSolution solve_obstacle(const ProjectedOperator& op, ObstacleKind kind, const Mat& X,
                                double mu, double R, const Vec& x_shift, double theta, int M);

struct CriticalMu {
  double mu_hat = 0;
  double sub_lo = 0, sub_hi = 0;     // subsolution density crosses 1e-3 upward
  double super_lo = 0, super_hi = 0; // supersolution density crosses 1e-3 downward
};

/// Bisection on mu of the shift-averaged contact density against the 1e-3
/// threshold, run for both variants. The two brackets must agree within
/// 3 tol (BracketsDisagree otherwise); mu_hat is their intersection midpoint
/// and estimates -F_bar(e, X).
CriticalMu critical_mu(const ProjectedOperator& op, const Mat& X, double R, double theta,
                       const std::vector<Vec>& shifts, double tol, int M);

/// The 4 deterministic shifts 0, 1/4, 1/2, 3/4 of the period along the chart.
std::vector<Vec> default_obstacle_shifts(const SliceChart& chart, double theta);

/// Contact mask as plain portable bitmap text (P1), one image row per chart row.
void write_mask_pbm(const ObstacleSolution& sol, const std::string& path);

} // namespace homog
