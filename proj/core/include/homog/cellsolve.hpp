#pragma once

#include <functional>
#include <vector>

#include "homog/coeffs.hpp"
#include "homog/grid.hpp"
#include "homog/lattice.hpp"
#include "homog/measures.hpp"

namespace homog {

/// Corrector from a cell problem, nodal values plus the residual actually
/// achieved. tail_bound is the analytic truncation tail of the Fourier route
/// and zero for grid solves.
struct Corrector {
  GridFunction V;
  Direction e;
  Mat X{};
  double delta = 0;
  double residual_inf = 0;
  double tail_bound = 0;
};

/// Penalized cell problem delta m_e(y) V - tr(b(y) D^2 V) = tr(b(y) X) on the
/// N^d torus grid. The delta term pins the constant; no mean subtraction.
Corrector solve_penalized(const ProjectedOperator& op, const Mat& X, double delta, int N);

/// Slice profile of lim delta V^delta: delta V is averaged over the exact
/// grid slice classes <j, k> = c mod N and extrapolated to delta = 0 through
/// the schedule. Throws NonConvergent when the schedule differences grow.
OscillatingProfile extract_Fperp(const ProjectedOperator& op, const Mat& X,
                                 const std::vector<double>& delta_schedule, int N,
                                 int richardson_order = 1);

struct SliceCellSolution {
  GridFunction W; // chart nodal values, gauge W(0) = 0
  double f_perp = 0;
  double residual_inf = 0;
};

/// Slice cell problem -tr(c(t) D^2_t W) = f - f_perp on the chart grid, with
/// f_perp the invariant-measure average of f. When the caller supplies
/// f_perp_given it is checked against the measure within 1e-8
/// (CompatibilityViolation otherwise).
SliceCellSolution solve_slice_cell(const ProjectedOperator& op, const SliceChart& chart, double s,
                                   const std::function<double(const Vec&)>& f, int M,
                                   const double* f_perp_given = nullptr,
                                   const MeasureOptions& opts = {});

/// Fourier corrector for unit diffusion on e-perp:
///   V_hat(k) = -m_hat(k) / (4 pi^2 |k - <k,e>e|^2), V_hat(0) = 0,
/// retaining the modes of m with |k| <= K, sampled on an N^d grid. The
/// residual of m - mean - tr(b D^2 V) is evaluated from the analytic second
/// derivatives of the trigonometric sum. Throws SmallDivisor when a retained
/// mode has |k - <k,e>e| < 1e-12.
Corrector fourier_corrector(const CoefficientField& f, const Direction& e, int K, int N);

struct DiophantineResult {
  bool pass = false;
  IVec worst_k{};
  double worst_value = 0; // min over k of |k - <k,e>e| |k|^tau
};

/// Exhaustive check of |k - <k,e>e| |k|^tau >= C_e over 0 < |k| <= K_max.
DiophantineResult diophantine_check(const Direction& e, double C_e, double tau, int K_max);

/// Product-grid corrector for the traveling-wave verification: slice cell
/// problems with data m(., e) at S offsets per period, each gauged to slice
/// mean zero so the family is smooth in s.
struct OscillatingCorrector {
  Direction e;
  SliceChart chart;
  int S = 0;
  int M = 0;
  std::vector<double> W;      // S x M^{d-1}, offset-major
  std::vector<double> m_perp; // per-offset measure average of m
  double m_pl = 1;            // mean of m_perp over the period
  double residual_inf = 0;
};

OscillatingCorrector oscillating_corrector(const CoefficientField& f, const Direction& e, int S,
                                           int M, const MeasureOptions& opts = {});

/// Self-describing binary block: magic "HMGC", u32 rank, u32 dims[],
/// f64 h[], f64 values[], all little-endian.
void write_grid_binary(const GridFunction& g, const std::string& path);
GridFunction read_grid_binary(const std::string& path);

/// Nodal CSV export: one row of index coordinates plus the value.
void write_grid_csv(const GridFunction& g, const std::string& path);

} // namespace homog
