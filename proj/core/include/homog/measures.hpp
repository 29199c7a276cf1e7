#pragma once

#include <cstdint>
#include <vector>

#include "homog/coeffs.hpp"
#include "homog/lattice.hpp"
#include "homog/slicegrid.hpp"

namespace homog {

struct MeasureOptions {
  double shift = 1e-8;        // inverse power shift, relative to the operator scale
  double inner_tol = 1e-12;   // Krylov relative residual; the iterate inherits
                              // roughly inner_tol * cond as adjoint residual
  int max_outer = 12;
  double residual_tol = 1e-8; // required ||L^T rho||_inf after normalization
  bool degeneracy_check = true;
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

/// Invariant measure of the projected diffusion restricted to one slice,
/// stored as a nodal density in chart coordinates with mean 1 (so the uniform
/// chart average of rho * f is the integral of f against the measure).
struct InvariantMeasure {
  SliceChart chart;
  double s = 0;
  int M = 0;
  std::vector<double> rho;
  double residual = 0;

  double average(const std::vector<double>& f) const {
    double sum = 0;
    for (std::size_t i = 0; i < rho.size(); ++i) sum += rho[i] * f[i];
    return sum / double(rho.size());
  }
};

/// Adjoint nullspace through shifted inverse power iteration with BiCGStab
/// inner solves started from the uniform density. Throws NullspaceDegenerate
/// when a restarted iteration lands on a different density.
InvariantMeasure invariant_measure_slice(const ProjectedOperator& op, const SliceChart& chart,
                                         double s, int M, const MeasureOptions& opts = {});

/// Values of a slice-averaged quantity on a grid of slice offsets.
struct OscillatingProfile {
  Direction e;
  std::vector<double> s_grid;
  bool tensor = false;
  std::vector<double> scalars;
  std::vector<Mat> tensors;
  double err = 0;
};

struct OscillatingTensors {
  OscillatingProfile a_perp; // tensor-valued
  OscillatingProfile m_perp; // scalar-valued
};

/// Measure-weighted slice averages of a and m on the given offsets.
OscillatingTensors oscillating_tensors(const CoefficientField& f, const Direction& e,
                                       const std::vector<double>& s_grid, int M,
                                       const MeasureOptions& opts = {});

/// Offsets i r / S, i = 0..S-1.
std::vector<double> uniform_s_grid(const Direction& e, int s_samples);

struct LimitingTensors {
  Vec eta{};
  Mat a_tilde{};
  double m_tilde = 1;
};

/// Harmonic-weight limits along the transversal eta:
///   w(s) = <a_perp(s) eta, eta>^{-1} / integral of the same,
///   a_tilde = int a_perp w ds,  m_tilde = int m_perp w ds.
LimitingTensors limiting_tensors(const CoefficientField& f, const Direction& e, const Vec& eta,
                                 int s_samples, int M, const MeasureOptions& opts = {});

struct EffectiveTensors {
  Direction e;
  Mat a_bar{};
  double m_bar = 1;
  double m_pl = 1; // mobility average entering the pulsating wave
};

/// Effective tensors of a rational direction through the slice-averaged
/// invariant measures, s integrated over one period.
EffectiveTensors effective_tensors_rational(const CoefficientField& f, const Direction& e,
                                            int s_samples, int M,
                                            const MeasureOptions& opts = {});

struct IrrationalLimit {
  std::vector<EffectiveTensors> sequence;
  Mat a_bar{};
  double m_bar = 1;
  double a_err = 0;
  double m_err = 0;
};

/// Effective tensors along an approach sequence with Aitken extrapolation of
/// the tail. Throws SequenceNotSettled when successive gaps fail to shrink.
IrrationalLimit effective_tensors_irrational(const CoefficientField& f,
                                             const ApproachSpec& approach, int s_samples, int M,
                                             const MeasureOptions& opts = {});

struct EmpiricalMeasure {
  SliceChart chart;
  double s = 0;
  int bins = 0;
  long long steps = 0;
  double dt = 0;
  std::uint64_t seed = 0;
  std::vector<double> density; // bins^{d-1} values, integrates to 1
};

/// Euler-Maruyama samples of the slice diffusion dT = sqrt(2 c(T)) dB binned
/// into a histogram on the chart torus. steps = 0 gives the delta at the
/// start point.
EmpiricalMeasure sde_empirical_measure(const ProjectedOperator& op, const SliceChart& chart,
                                       double s, long long steps, double dt, int bins,
                                       std::uint64_t seed);

/// Histogram of a nodal density on the same binning as the SDE output.
std::vector<double> bin_density(const InvariantMeasure& mu, int bins);

/// Total variation distance between two histograms on the chart torus.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q, int sdim,
                   int bins);

} // namespace homog
