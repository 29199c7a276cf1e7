// Acceptance gate: one check per numbered criterion, each printing a single
// [PASS]/[FAIL] line with the measured values, the pinned tolerances, and the
// wall time against the stated budget. Exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "homog/cellsolve.hpp"
#include "homog/coeffs.hpp"
#include "homog/errors.hpp"
#include "homog/front.hpp"
#include "homog/lattice.hpp"
#include "homog/measures.hpp"
#include "homog/obstacle.hpp"

using namespace homog;

namespace {

const double kSqrt3 = 1.7320508075688772;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return std::string(buf);
}

CoefficientField harmonic_fixture() {
  FieldParams p;
  p.a_base = 2;
  p.a_scalar_terms.push_back({IVec{1, 0, 0}, 1.0, 0.0});
  return builtin_field("isotropic-trig", 2, p);
}

CoefficientField laminar_fixture() {
  FieldParams p;
  p.a_terms.push_back({IVec{0, 0, 1}, 0.5, 0.0, outer(3, Vec{1, 0, 0}, Vec{1, 0, 0})});
  return builtin_field("laminar", 3, p);
}

Mat eperp_rank1(double x0) {
  Mat X{};
  at(X, 0, 0) = x0;
  return X;
}

double op_gap(int d, const Mat& A, const Mat& B) { return sym_op_norm(d, mat_add(d, A, B, -1.0)); }

const std::vector<double> kDeltaSchedule{0.64, 0.32, 0.16, 0.08};

double fperp_mean(const ProjectedOperator& op, const Mat& X, int N) {
  const OscillatingProfile prof = extract_Fperp(op, X, kDeltaSchedule, N, 2);
  double mean = 0;
  for (double v : prof.scalars) mean += v;
  return mean / double(prof.scalars.size());
}

// ---------------------------------------------------------------------------
// 1. constant diffusion: effective tensors reproduce the data

Outcome criterion1() {
  Mat a0{};
  at(a0, 0, 0) = 2.0;
  at(a0, 0, 1) = at(a0, 1, 0) = 0.3;
  at(a0, 0, 2) = at(a0, 2, 0) = 0.1;
  at(a0, 1, 1) = 1.5;
  at(a0, 1, 2) = at(a0, 2, 1) = 0.2;
  at(a0, 2, 2) = 1.0;
  FieldParams p;
  p.has_a0 = true;
  p.a0 = a0;
  p.m_terms.push_back({IVec{1, 0, 0}, 0.5, 0.0});
  const CoefficientField f = builtin_field("constant", 3, p);

  const IVec dirs[5] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 2, 2}};
  double worst_a = 0, worst_m = 0;
  for (const IVec& k : dirs) {
    const Direction e = primitive_direction(3, k);
    const EffectiveTensors et = effective_tensors_rational(f, e, 16, 64);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        worst_a = std::max(worst_a, std::abs(at(et.a_bar, i, j) - at(a0, i, j)));
    worst_m = std::max(worst_m, std::abs(et.m_bar - 1.0));
  }
  const double tol_a = 1e-9, tol_m = 1e-3;
  Outcome out;
  out.pass = worst_a <= tol_a && worst_m <= tol_m;
  out.detail = fmt("max|a_bar-a0|=%.2e<=%.0e, max|m_bar-1|=%.2e<=%.0e over 5 directions",
                   worst_a, tol_a, worst_m, tol_m);
  return out;
}

// ---------------------------------------------------------------------------
// 2. d=2 harmonic mean through all three routes

Outcome criterion2() {
  const CoefficientField f = harmonic_fixture();
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const ProjectedOperator op = project_A(f, e);
  const SliceChart chart = slice_lattice_basis(e);
  const Mat X = eperp_rank1(1.0);

  const double err_cell = std::abs(fperp_mean(op, X, 64) - kSqrt3);

  const OscillatingTensors osc = oscillating_tensors(f, e, uniform_s_grid(e, 8), 64);
  double err_osc = 0;
  const Vec eperp{1, 0, 0};
  for (const Mat& ap : osc.a_perp.tensors)
    err_osc = std::max(err_osc, std::abs(quad_form(2, ap, eperp) - kSqrt3));

  const CriticalMu cm =
      critical_mu(op, X, 8.0, 1.0, default_obstacle_shifts(chart, 1.0), 5e-2, 96);
  const double err_mu = std::abs(cm.mu_hat + kSqrt3);

  const double tol_cell = 1e-3, tol_mu = 2e-2;
  Outcome out;
  out.pass = err_cell <= tol_cell && err_osc <= tol_cell && err_mu <= tol_mu;
  out.detail = fmt("|Fperp-sqrt3|=%.2e<=%.0e, |a_perp-sqrt3|=%.2e<=%.0e, |mu_hat+sqrt3|=%.2e<=%.0e",
                   err_cell, tol_cell, err_osc, tol_cell, err_mu, tol_mu);
  return out;
}

// ---------------------------------------------------------------------------
// 3. laminar discontinuity witness: directional limits differ

Outcome criterion3() {
  const CoefficientField f = laminar_fixture();
  const Direction e = primitive_direction(3, IVec{0, 0, 1});
  const Vec etas[2] = {{1, 0, 0}, {0, 1, 0}};

  LimitingTensors lims[2];
  for (int b = 0; b < 2; ++b) lims[b] = limiting_tensors(f, e, etas[b], 64, 16);
  const double gap = op_gap(3, lims[0].a_tilde, lims[1].a_tilde);

  bool monotone = true, converged = true;
  double worst_conv = 0;
  for (int b = 0; b < 2; ++b) {
    const ApproachSpec ap = approach_sequence(e, etas[b], 4);
    const IrrationalLimit il = effective_tensors_irrational(f, ap, 16, 48);
    double prev = 1e300;
    for (const EffectiveTensors& et : il.sequence) {
      const double g = op_gap(3, et.a_bar, lims[b].a_tilde);
      if (g > prev + 1e-9) monotone = false;
      prev = g;
    }
    const double conv = op_gap(3, il.a_bar, lims[b].a_tilde);
    worst_conv = std::max(worst_conv, conv);
    if (conv > 1e-2) converged = false;
  }

  Outcome out;
  out.pass = gap >= 0.05 && monotone && converged;
  out.detail = fmt("branch gap=%.3f>=0.05, limit error=%.2e<=1e-02, gaps monotone=%s", gap,
                   worst_conv, monotone ? "yes" : "no");
  return out;
}

// ---------------------------------------------------------------------------
// 4. pulsating mobility average and the front speed it predicts

Outcome criterion4() {
  // combined amplitude stays below 1/3: a flat start dips |Du| to
  // m_min/m_max before the pulsating shape forms, and the guard sits at 1/2
  FieldParams p;
  p.m_terms.push_back({IVec{0, 1, 0}, 0.15, 0.0});
  p.m_terms.push_back({IVec{1, 0, 0}, 0.1, 0.0});
  const CoefficientField f = builtin_field("constant", 2, p);
  const Direction e = primitive_direction(2, IVec{0, 1, 0});

  const OscillatingTensors osc = oscillating_tensors(f, e, uniform_s_grid(e, 32), 32);
  const PulsatingWave wave = pulsating_profile(osc.m_perp, e);
  double direct = 0;
  for (double v : osc.m_perp.scalars) direct += v;
  direct /= double(osc.m_perp.scalars.size());
  const double err_mpl = std::abs(wave.m_pl - direct);

  const double alpha = 1.0;
  const double ref = alpha / wave.m_pl;
  double speed_err[2];
  double prof_err[2];
  const double epses[2] = {1.0 / 8, 1.0 / 16};
  for (int i = 0; i < 2; ++i) {
    // half-integer number of period crossings: at integer crossings the
    // longitudinal profile realigns with the plane wave and the O(eps)
    // corrector deviation would be sampled near its zero
    const double T = 4.5 * epses[i] * wave.m_pl / alpha;
    const FrontState st = simulate_front(f, e, alpha, epses[i], T, {32, 32});
    speed_err[i] = std::abs(st.speed - ref);
    double dev = 0;
    for (double wv : st.w) dev = std::max(dev, std::abs(wv - ref * st.time));
    prof_err[i] = dev;
  }
  const double ratio = prof_err[0] / prof_err[1];

  Outcome out;
  out.pass = err_mpl <= 1e-6 && speed_err[1] <= 0.02 * ref && ratio >= 1.4 && ratio <= 2.6;
  out.detail = fmt("|m_pl gap|=%.2e<=1e-06, speed err(1/16)=%.2e<=%.2e, profile err(1/8)/err(1/16)=%.2f in [1.4,2.6]",
                   err_mpl, speed_err[1], 0.02 * ref, ratio);
  return out;
}

// ---------------------------------------------------------------------------
// 5. scaled cell speed approaches the mobility reciprocal as alpha -> 0

Outcome criterion5() {
  FieldParams p;
  p.m_terms.push_back({IVec{1, 0, 0}, 0.8, 0.0});
  const CoefficientField f = builtin_field("constant", 2, p);
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const double target = 1.0; // 1 / m_pl, plain average of m is 1

  const double alphas[3] = {0.5, 0.25, 0.125};
  double v[3];
  for (int i = 0; i < 3; ++i) {
    const double T = 4.0 / alphas[i];
    v[i] = front_speed_2d(f, e, alphas[i], T, {64, 4}) / alphas[i];
  }
  const double d1 = std::abs(v[1] - v[0]), d2 = std::abs(v[2] - v[1]);
  const bool shrink = d1 >= 1.5 * d2;
  const bool approach = std::abs(v[2] - target) <= std::abs(v[0] - target) + 1e-12;

  Outcome out;
  out.pass = shrink && approach;
  out.detail = fmt("v=%0.6f,%0.6f,%0.6f -> %g, |d1|/|d2|=%.2f>=1.5, approach=%s", v[0], v[1],
                   v[2], target, d2 > 0 ? d1 / d2 : 1e9, approach ? "yes" : "no");
  return out;
}

// ---------------------------------------------------------------------------
// 6. Fourier corrector on a Diophantine direction

Outcome criterion6() {
  FieldParams p;
  p.m_terms.push_back({IVec{1, 0, 0}, 0.4, 0.0});
  p.m_terms.push_back({IVec{1, 1, 0}, 0.2, 0.0});
  const CoefficientField f = builtin_field("constant", 2, p);
  const Direction golden = irrational_direction(2, Vec{1.0, 1.6180339887498949, 0.0});

  const Corrector cor = fourier_corrector(f, golden, 12, 64);
  const bool res_ok = cor.residual_inf <= 1e-8 + cor.tail_bound;

  const DiophantineResult dio = diophantine_check(golden, 0.3, 1.0, 50);

  bool small_divisor_fires = false;
  try {
    FieldParams q;
    q.m_terms.push_back({IVec{0, 1, 0}, 0.5, 0.0});
    const CoefficientField fr = builtin_field("constant", 2, q);
    fourier_corrector(fr, primitive_direction(2, IVec{0, 1, 0}), 8, 32);
  } catch (const SmallDivisor&) {
    small_divisor_fires = true;
  }

  Outcome out;
  out.pass = res_ok && dio.pass && small_divisor_fires;
  out.detail = fmt("residual=%.2e<=1e-08+tail(%.2e), diophantine min=%.4f>=0.3, rational direction throws=%s",
                   cor.residual_inf, cor.tail_bound, dio.worst_value,
                   small_divisor_fires ? "yes" : "no");
  return out;
}

// ---------------------------------------------------------------------------
// 7. invariant measure against the SDE histogram

Outcome criterion7() {
  const CoefficientField f = harmonic_fixture();
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const ProjectedOperator op = project_A(f, e);
  const SliceChart chart = slice_lattice_basis(e);
  const int bins = 32;
  const double dt = 1.0 / (2.0 * f.Lambda * bins * bins);

  const InvariantMeasure mu = invariant_measure_slice(op, chart, 0.0, 64);
  const std::vector<double> pde = bin_density(mu, bins);
  const EmpiricalMeasure emp =
      sde_empirical_measure(op, chart, 0.0, 1000000, dt, bins, 20260816ull);
  const double tv = tv_distance(pde, emp.density, 1, bins);

  Outcome out;
  out.pass = tv <= 0.05;
  out.detail = fmt("TV(pde, sde)=%.4f<=0.05 at 1e6 steps, dt=%.3e, seed=20260816", tv, dt);
  return out;
}

// ---------------------------------------------------------------------------
// 8. obstacle threshold against the cell limit for three curvatures

Outcome criterion8() {
  const CoefficientField f = harmonic_fixture();
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const ProjectedOperator op = project_A(f, e);
  const SliceChart chart = slice_lattice_basis(e);
  const auto shifts = default_obstacle_shifts(chart, 1.0);

  const double x0s[3] = {1.0, 0.6, -0.8};
  double worst = 0;
  for (double x0 : x0s) {
    const Mat X = eperp_rank1(x0);
    const double fbar = fperp_mean(op, X, 64);
    const CriticalMu cm = critical_mu(op, X, 8.0, 1.0, shifts, 5e-2, 96);
    worst = std::max(worst, std::abs(cm.mu_hat + fbar) / std::abs(fbar));
  }

  Outcome out;
  out.pass = worst <= 0.05;
  out.detail = fmt("max rel gap |mu_hat+Fbar|/|Fbar|=%.3f<=0.05 over 3 curvatures", worst);
  return out;
}

// ---------------------------------------------------------------------------
// 9. slice averages equidistribute once the direction outgrows the mode

Outcome criterion9() {
  const auto fmode = [](const Vec& y) { return std::cos(2 * M_PI * (y[0] + 2 * y[1])); };
  const double s = 0.3;
  const int N = 64;

  const Direction witness = primitive_direction(2, IVec{1, 2, 0});
  const double got = slice_average(fmode, witness, s, N);
  const double want = std::cos(2 * M_PI * s * std::sqrt(5.0));
  const bool witness_ok = std::abs(got - want) <= 1e-12 && std::abs(got) >= 0.1;

  const IVec grow[4] = {{2, 5, 0}, {3, 7, 0}, {5, 11, 0}, {8, 13, 0}};
  double worst = 0;
  for (const IVec& k : grow) {
    const Direction e = primitive_direction(2, k);
    worst = std::max(worst, std::abs(slice_average(fmode, e, s, N)));
  }

  Outcome out;
  out.pass = witness_ok && worst <= 1e-12;
  out.detail = fmt("resonant avg=%.4f (exact %.4f), max|avg| over 4 larger directions=%.1e<=1e-12",
                   got, want, worst);
  return out;
}

// ---------------------------------------------------------------------------
// 10. halving the grid shows second-order convergence (or the fp floor)

Outcome criterion10() {
  const double floor_tol = 1e-7, order_min = 1.8;
  std::ostringstream detail;
  bool all_ok = true;

  const auto judge = [&](const char* name, double err_h, double err_h2) {
    // err_h at resolution N, err_h2 at 2N
    bool ok;
    if (err_h <= floor_tol && err_h2 <= floor_tol) {
      detail << fmt("%s: floor(%.1e,%.1e); ", name, err_h, err_h2);
      ok = true;
    } else {
      const double order = std::log2(err_h / std::max(err_h2, 1e-300));
      detail << fmt("%s: order %.2f; ", name, order);
      ok = order >= order_min;
    }
    all_ok = all_ok && ok;
  };

  { // criterion 1 quantities: exact at both resolutions
    Mat a0{};
    at(a0, 0, 0) = 2.0;
    at(a0, 0, 1) = at(a0, 1, 0) = 0.3;
    at(a0, 0, 2) = at(a0, 2, 0) = 0.1;
    at(a0, 1, 1) = 1.5;
    at(a0, 1, 2) = at(a0, 2, 1) = 0.2;
    at(a0, 2, 2) = 1.0;
    FieldParams p;
    p.has_a0 = true;
    p.a0 = a0;
    p.m_terms.push_back({IVec{1, 0, 0}, 0.5, 0.0});
    const CoefficientField f = builtin_field("constant", 3, p);
    const Direction e = primitive_direction(3, IVec{1, 2, 2});
    double err_a[2], err_m[2];
    const int Ms[2] = {32, 64};
    for (int i = 0; i < 2; ++i) {
      const EffectiveTensors et = effective_tensors_rational(f, e, 16, Ms[i]);
      double wa = 0;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) wa = std::max(wa, std::abs(at(et.a_bar, r, c) - at(a0, r, c)));
      err_a[i] = wa;
      err_m[i] = std::abs(et.m_bar - 1.0);
    }
    judge("a_bar", err_a[0], err_a[1]);
    judge("m_bar", err_m[0], err_m[1]);
  }

  { // criterion 2 quantities
    const CoefficientField f = harmonic_fixture();
    const Direction e = primitive_direction(2, IVec{0, 1, 0});
    const ProjectedOperator op = project_A(f, e);
    const Mat X = eperp_rank1(1.0);
    const double errN = std::abs(fperp_mean(op, X, 32) - kSqrt3);
    const double err2N = std::abs(fperp_mean(op, X, 64) - kSqrt3);
    judge("Fperp", errN, err2N);

    const Vec eperp{1, 0, 0};
    double err_osc[2];
    const int Ms[2] = {32, 64};
    for (int i = 0; i < 2; ++i) {
      const OscillatingTensors osc = oscillating_tensors(f, e, uniform_s_grid(e, 4), Ms[i]);
      double w = 0;
      for (const Mat& ap : osc.a_perp.tensors)
        w = std::max(w, std::abs(quad_form(2, ap, eperp) - kSqrt3));
      err_osc[i] = w;
    }
    judge("a_perp", err_osc[0], err_osc[1]);
  }

  { // criterion 4 cell quantities: mobility average and the slice corrector
    FieldParams p;
    p.m_terms.push_back({IVec{0, 1, 0}, 0.15, 0.0});
    p.m_terms.push_back({IVec{1, 0, 0}, 0.1, 0.0});
    const CoefficientField f = builtin_field("constant", 2, p);
    const Direction e = primitive_direction(2, IVec{0, 1, 0});
    double err_mpl[2];
    const int Ss[2] = {16, 32};
    for (int i = 0; i < 2; ++i) {
      const OscillatingTensors osc = oscillating_tensors(f, e, uniform_s_grid(e, Ss[i]), 32);
      const PulsatingWave wave = pulsating_profile(osc.m_perp, e);
      err_mpl[i] = std::abs(wave.m_pl - 1.0);
    }
    judge("m_pl", err_mpl[0], err_mpl[1]);

    const CoefficientField unit = builtin_field("constant", 2, FieldParams{});
    const ProjectedOperator op = project_A(unit, e);
    const SliceChart chart = slice_lattice_basis(e);
    const auto rhs = [](const Vec& y) { return std::cos(2 * M_PI * y[0]); };
    double err_w[2];
    const int Ms[2] = {32, 64};
    for (int i = 0; i < 2; ++i) {
      const SliceCellSolution sol = solve_slice_cell(op, chart, 0.0, rhs, Ms[i]);
      double w = 0;
      for (int j = 0; j < Ms[i]; ++j) {
        const double want = (std::cos(2 * M_PI * j / double(Ms[i])) - 1.0) / (4 * M_PI * M_PI);
        w = std::max(w, std::abs(sol.W.v[j] - want));
      }
      err_w[i] = w;
    }
    judge("corrector", err_w[0], err_w[1]);
  }

  Outcome out;
  out.pass = all_ok;
  out.detail = detail.str() + fmt("(floor %.0e, required order %.1f)", floor_tol, order_min);
  return out;
}

// ---------------------------------------------------------------------------

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "constant-coefficient effective tensors", 60, criterion1},
    {2, "harmonic-mean agreement across routes", 300, criterion2},
    {3, "laminar discontinuity witness", 600, criterion3},
    {4, "pulsating average and front speed", 600, criterion4},
    {5, "vanishing-forcing speed derivative", 600, criterion5},
    {6, "Diophantine Fourier corrector", 60, criterion6},
    {7, "invariant measure vs SDE", 120, criterion7},
    {8, "obstacle threshold vs cell limit", 600, criterion8},
    {9, "slice equidistribution", 60, criterion9},
    {10, "grid convergence order", 600, criterion10},
};

} // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--list") == 0) {
      for (const Criterion& c : kCriteria) std::printf("%2d  %s\n", c.id, c.name);
      return 0;
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N] [--list]\n", argv[0]);
      return 2;
    }
  }

  int failures = 0, ran = 0;
  for (const Criterion& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& ex) {
      out.pass = false;
      out.detail = std::string("exception: ") + ex.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs <= c.budget_s;
    const bool pass = out.pass && in_budget;
    std::printf("[%s] criterion %2d: %s (%s, %.1fs%s%.0fs)\n", pass ? "PASS" : "FAIL", c.id,
                c.name, out.detail.c_str(), secs, in_budget ? "<" : ">", c.budget_s);
    std::fflush(stdout);
    if (!pass) ++failures;
  }

  if (ran == 0) {
    std::fprintf(stderr, "no such criterion: %d\n", only);
    return 2;
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures;
}
