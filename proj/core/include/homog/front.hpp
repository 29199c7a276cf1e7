#pragma once

#include <vector>

#include "homog/cellsolve.hpp"
#include "homog/coeffs.hpp"
#include "homog/lattice.hpp"
#include "homog/measures.hpp"

namespace homog {

/// Pulsating correction P with u = <x,e> + eps P(<x,e>/eps) + ... built from
/// the slice profile of the mobility. P is stored both as nodal values and as
/// the Fourier series of m_perp / m_pl - 1, so P, P', P'' evaluate spectrally
/// at arbitrary offsets (exact for band-limited profiles).
struct PulsatingWave {
  Direction e;
  double r = 1;
  double m_pl = 1;
  std::vector<double> s_grid;
  std::vector<double> P;
  std::vector<double> A, B; // cos/sin coefficients of m_perp/m_pl - 1, index k >= 1

  double P_at(double s) const;
  double Pp_at(double s) const;
  double Ppp_at(double s) const;
};

/// Requires a scalar profile on a uniform grid over [0, r). The construction
/// pins P(0) = P(r) = 0 and keeps 1 + P' = m_perp / m_pl > 0.
PulsatingWave pulsating_profile(const OscillatingProfile& m_perp, const Direction& e);

struct TravelingBracket {
  double alpha_plus = 0;
  double alpha_minus = 0;
  double margin = 0; // smallest residual gap achieved at the returned speeds
};

/// Bisect the forcing of the candidate wave
///   u = <x,e> + eps P(<x,e>/eps) + (alpha_c/m_pl)(eps^2 V + t)
/// until the level-set residual is signed on the whole cell: alpha_plus gives
/// a supersolution, alpha_minus a subsolution. Throws InvalidAlpha for
/// alpha <= 0 and NoMargin when no bracket closes.
TravelingBracket verify_traveling(const CoefficientField& f, const Direction& e, double alpha,
                                  double epsilon, const OscillatingCorrector& corrector,
                                  const PulsatingWave& wave);

struct FrontOptions {
  double cfl = 0.2;        // dt = cfl h^2 m_min / (Lambda d)
  double dt_override = 0;  // 0 means automatic
  int max_samples = 8192;  // mean(w) series length cap
};

struct FrontState {
  Direction e;
  double alpha = 0;
  double epsilon = 1;
  std::vector<int> dims;
  std::vector<double> h;
  std::vector<double> w;
  double time = 0;
  double dt = 0;
  std::vector<double> sample_t, sample_mean;
  double speed = 0;   // least-squares slope of mean(w) over the last half
  double fit_rms = 0;
};

/// Forward-Euler level-set evolution of u = <x,e> + w on the periodicity
/// cell [0,eps)^d with central differences:
///   m(x/eps, n) w_t = tr(A(x/eps, n) D^2 w) + alpha |Du|,  n = Du/|Du|.
/// Throws GradientDegenerate when |Du| < 1/2 and CFLViolation when an
/// overridden dt exceeds h^2 m_min / (4 Lambda d).
FrontState simulate_front(const CoefficientField& f, const Direction& e, double alpha,
                          double epsilon, double T_final, const std::vector<int>& dims,
                          const FrontOptions& opts = {});

/// Plane-wave speed lambda_e(alpha) in dimension 2: the unit-cell front run.
double front_speed_2d(const CoefficientField& f, const Direction& e, double alpha,
                      double T_final, const std::vector<int>& dims,
                      const FrontOptions& opts = {});

} // namespace homog
