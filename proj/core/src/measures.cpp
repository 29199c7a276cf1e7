#include "homog/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "homog/krylov.hpp"
#include "homog/log.hpp"
#include "homog/rng.hpp"

namespace homog {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// One shifted inverse power iteration run. Returns the density normalized to
// mean 1 together with the final adjoint residual.
std::pair<std::vector<double>, double> nullspace_run(const SlicePullback& p,
                                                     std::vector<double> x,
                                                     const MeasureOptions& opts) {
  const std::size_t n = p.nodes();
  std::vector<double> diag, inv_diag(n), rhs(n), z(n), zx(n), check(n);
  generator_diagonal(p, diag);
  // the shift is relative to the operator scale (diag ~ c M^2); an absolute
  // 1e-8 would push the condition number past what double precision solves
  double scale = 0;
  for (double v : diag) scale += std::abs(v);
  scale /= double(n);
  const double shift = opts.shift * scale;

  // A = L^T - shift + sigma 1 1^T is nonsingular and well conditioned
  // (1^T L^T = 0 exactly, so the rank-one term moves only the null
  // eigenvalue); the shifted solve is recovered by Sherman-Morrison with the
  // near-singular amplification isolated in a scalar
  const double sigma = scale / double(n);
  for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / (diag[i] - shift + sigma);
  LinOp A = [&](const std::vector<double>& v, std::vector<double>& out) {
    apply_generator_adjoint(p, v, out);
    double sum = 0;
    for (double vi : v) sum += vi;
    for (std::size_t i = 0; i < n; ++i) out[i] += sigma * sum - shift * v[i];
  };

  const int inner_cap = int(40 * std::sqrt(double(n)) + 2000);
  const auto solve = [&](const std::vector<double>& b, std::vector<double>& out) {
    KrylovResult kr = gmres(A, b, out, inv_diag, opts.inner_tol, inner_cap);
    if (!kr.converged && kr.rel_residual > 1e-6)
      throw SolverDiverged("invariant_measure_slice: inner solve stalled at rel residual " +
                           sci(kr.rel_residual));
  };

  std::vector<double> z1;
  solve(std::vector<double>(n, 1.0), z1);
  double sum1 = 0;
  for (double v : z1) sum1 += v;
  const double denom = 1.0 - sigma * sum1;

  double residual = 1e300;
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    rhs = x;
    solve(rhs, zx);
    double sumx = 0;
    for (double v : zx) sumx += v;
    if (std::abs(denom) < 1e-300)
      throw NullspaceDegenerate("invariant_measure_slice: singular bordered system");
    const double gamma = sigma * sumx / denom;
    for (std::size_t i = 0; i < n; ++i) z[i] = zx[i] + gamma * z1[i];
    double mean = 0;
    for (double v : z) mean += v;
    mean /= double(n);
    if (std::abs(mean) < 1e-300)
      throw NullspaceDegenerate("invariant_measure_slice: zero-mean inverse iterate");
    for (std::size_t i = 0; i < n; ++i) x[i] = z[i] / mean;
    apply_generator_adjoint(p, x, check);
    residual = 0;
    for (double v : check) residual = std::max(residual, std::abs(v));
    if (residual <= opts.residual_tol) break;
  }

  // iterative refinement: L^T is nonsingular on the mean-zero subspace (the
  // null vector has mean one), so correction solves are well conditioned and
  // push the adjoint residual to the rounding floor
  std::vector<double> inv_diag0(n), delta(n);
  for (std::size_t i = 0; i < n; ++i) inv_diag0[i] = 1.0 / diag[i];
  LinOp A0 = [&](const std::vector<double>& v, std::vector<double>& out) {
    apply_generator_adjoint(p, v, out);
  };
  for (int pass = 0; pass < 3 && residual > opts.residual_tol; ++pass) {
    apply_generator_adjoint(p, x, check);
    double rmean = 0;
    for (double v : check) rmean += v;
    rmean /= double(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -(check[i] - rmean);
    gmres(A0, rhs, delta, inv_diag0, opts.inner_tol, inner_cap);
    double mean = 0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += delta[i];
      mean += x[i];
    }
    mean /= double(n);
    for (std::size_t i = 0; i < n; ++i) x[i] /= mean;
    apply_generator_adjoint(p, x, check);
    residual = 0;
    for (double v : check) residual = std::max(residual, std::abs(v));
  }
  return {x, residual};
}

Mat measure_average_a(const CoefficientField& f, const InvariantMeasure& mu) {
  const int M = mu.M;
  Mat acc{};
  Mat a;
  if (mu.chart.sdim == 1) {
    for (int j = 0; j < M; ++j) {
      double t = double(j) / M;
      Vec y = slice_point(mu.chart, mu.s, &t);
      f.a(y, mu.chart.e.e, a);
      for (int i = 0; i < 9; ++i) acc[i] += mu.rho[j] * a[i];
    }
    for (int i = 0; i < 9; ++i) acc[i] /= double(M);
  } else {
    std::size_t idx = 0;
    for (int j1 = 0; j1 < M; ++j1)
      for (int j2 = 0; j2 < M; ++j2, ++idx) {
        double t[2] = {double(j1) / M, double(j2) / M};
        Vec y = slice_point(mu.chart, mu.s, t);
        f.a(y, mu.chart.e.e, a);
        for (int i = 0; i < 9; ++i) acc[i] += mu.rho[idx] * a[i];
      }
    for (int i = 0; i < 9; ++i) acc[i] /= double(M) * double(M);
  }
  return acc;
}

double measure_average_m(const CoefficientField& f, const InvariantMeasure& mu) {
  const int M = mu.M;
  double acc = 0;
  if (mu.chart.sdim == 1) {
    for (int j = 0; j < M; ++j) {
      double t = double(j) / M;
      Vec y = slice_point(mu.chart, mu.s, &t);
      acc += mu.rho[j] * f.m(y, mu.chart.e.e);
    }
    return acc / double(M);
  }
  std::size_t idx = 0;
  for (int j1 = 0; j1 < M; ++j1)
    for (int j2 = 0; j2 < M; ++j2, ++idx) {
      double t[2] = {double(j1) / M, double(j2) / M};
      Vec y = slice_point(mu.chart, mu.s, t);
      acc += mu.rho[idx] * f.m(y, mu.chart.e.e);
    }
  return acc / (double(M) * double(M));
}

} // namespace

InvariantMeasure invariant_measure_slice(const ProjectedOperator& op, const SliceChart& chart,
                                         double s, int M, const MeasureOptions& opts) {
  SlicePullback p = make_pullback(op, chart, s, M, false);
  const std::size_t n = p.nodes();

  auto [rho, residual] = nullspace_run(p, std::vector<double>(n, 1.0), opts);

  if (opts.degeneracy_check) {
    Rng rng(opts.seed);
    std::vector<double> start(n);
    for (double& v : start) v = 0.5 + rng.uniform();
    auto [rho2, res2] = nullspace_run(p, start, opts);
    (void)res2;
    double tv = 0;
    for (std::size_t i = 0; i < n; ++i) tv += std::abs(rho[i] - rho2[i]);
    tv *= 0.5 / double(n);
    if (tv > 1e-6)
      throw NullspaceDegenerate("invariant_measure_slice: restarted iteration found a different "
                                "density, TV = " +
                                std::to_string(tv));
  }

  double maxv = 0;
  for (double v : rho) maxv = std::max(maxv, std::abs(v));
  double floor = -1e-10 * maxv;
  for (double v : rho)
    if (v < floor)
      throw NullspaceDegenerate("invariant_measure_slice: density has a negative part");
  double sum = 0;
  for (double& v : rho) {
    if (v < 0) v = 0; // clip Krylov noise below the 1e-14 relative scale
    sum += v;
  }
  for (double& v : rho) v *= double(n) / sum;

  if (residual > opts.residual_tol)
    throw NonConvergent("invariant_measure_slice: adjoint residual " + sci(residual) +
                        " above tolerance");

  InvariantMeasure mu;
  mu.chart = chart;
  mu.s = s;
  mu.M = M;
  mu.rho = std::move(rho);
  mu.residual = residual;
  return mu;
}

OscillatingTensors oscillating_tensors(const CoefficientField& f, const Direction& e,
                                       const std::vector<double>& s_grid, int M,
                                       const MeasureOptions& opts) {
  SliceChart chart = slice_lattice_basis(e);
  ProjectedOperator op = project_A(f, e);
  OscillatingTensors out;
  out.a_perp.e = e;
  out.a_perp.s_grid = s_grid;
  out.a_perp.tensor = true;
  out.m_perp.e = e;
  out.m_perp.s_grid = s_grid;
  out.m_perp.tensor = false;
  double worst = 0;
  for (double s : s_grid) {
    InvariantMeasure mu = invariant_measure_slice(op, chart, s, M, opts);
    out.a_perp.tensors.push_back(measure_average_a(f, mu));
    out.m_perp.scalars.push_back(measure_average_m(f, mu));
    worst = std::max(worst, mu.residual);
  }
  out.a_perp.err = worst;
  out.m_perp.err = worst;
  return out;
}

std::vector<double> uniform_s_grid(const Direction& e, int s_samples) {
  std::vector<double> s(s_samples);
  for (int i = 0; i < s_samples; ++i) s[i] = e.r * double(i) / double(s_samples);
  return s;
}

LimitingTensors limiting_tensors(const CoefficientField& f, const Direction& e, const Vec& eta,
                                 int s_samples, int M, const MeasureOptions& opts) {
  if (!e.rational) throw Error("limiting_tensors: direction must be rational");
  double ne = norm(f.d, eta);
  if (ne < 1e-14) throw ZeroVector("limiting_tensors: eta = 0");
  Vec etan = scaled(f.d, eta, 1.0 / ne);
  if (std::abs(dot(f.d, etan, e.e)) > 1e-10)
    throw Error("limiting_tensors: eta must be orthogonal to e");

  OscillatingTensors osc = oscillating_tensors(f, e, uniform_s_grid(e, s_samples), M, opts);
  LimitingTensors lt;
  lt.eta = etan;
  double wsum = 0;
  Mat acc{};
  double macc = 0;
  for (std::size_t i = 0; i < osc.a_perp.tensors.size(); ++i) {
    double denom = quad_form(f.d, osc.a_perp.tensors[i], etan);
    if (denom <= 0)
      throw EllipticityViolation("limiting_tensors: oscillating tensor lost ellipticity");
    double w = 1.0 / denom;
    wsum += w;
    for (int j = 0; j < 9; ++j) acc[j] += w * osc.a_perp.tensors[i][j];
    macc += w * osc.m_perp.scalars[i];
  }
  for (int j = 0; j < 9; ++j) lt.a_tilde[j] = acc[j] / wsum;
  lt.m_tilde = macc / wsum;
  return lt;
}

EffectiveTensors effective_tensors_rational(const CoefficientField& f, const Direction& e,
                                            int s_samples, int M, const MeasureOptions& opts) {
  OscillatingTensors osc = oscillating_tensors(f, e, uniform_s_grid(e, s_samples), M, opts);
  EffectiveTensors et;
  et.e = e;
  Mat acc{};
  double macc = 0;
  for (std::size_t i = 0; i < osc.a_perp.tensors.size(); ++i) {
    for (int j = 0; j < 9; ++j) acc[j] += osc.a_perp.tensors[i][j];
    macc += osc.m_perp.scalars[i];
  }
  for (int j = 0; j < 9; ++j) et.a_bar[j] = acc[j] / double(s_samples);
  et.m_bar = macc / double(s_samples);
  et.m_pl = et.m_bar;
  return et;
}

namespace {

double aitken_scalar(double x0, double x1, double x2, bool& ok) {
  double d2 = x2 - 2.0 * x1 + x0;
  double d1 = x2 - x1;
  double scale = std::max({std::abs(x0), std::abs(x1), std::abs(x2), 1.0});
  if (std::abs(d2) < 1e-13 * scale) {
    ok = false;
    return x2;
  }
  ok = true;
  return x2 - d1 * d1 / d2;
}

} // namespace

IrrationalLimit effective_tensors_irrational(const CoefficientField& f,
                                             const ApproachSpec& approach, int s_samples, int M,
                                             const MeasureOptions& opts) {
  if (approach.sequence.size() < 3)
    throw Error("effective_tensors_irrational: depth must be >= 3");
  IrrationalLimit lim;
  for (const Direction& en : approach.sequence)
    lim.sequence.push_back(effective_tensors_rational(f, en, s_samples, M, opts));

  const std::size_t n = lim.sequence.size();
  // Successive gaps must not grow beyond solver noise.
  double prev_gap = -1;
  for (std::size_t i = 1; i < n; ++i) {
    Mat diff = mat_add(f.d, lim.sequence[i].a_bar, lim.sequence[i - 1].a_bar, -1.0);
    double gap = sym_op_norm(f.d, diff) +
                 std::abs(lim.sequence[i].m_bar - lim.sequence[i - 1].m_bar);
    if (prev_gap >= 0 && gap > prev_gap + 1e-9 && gap > 1e-9)
      throw SequenceNotSettled("effective_tensors_irrational: gap grew from " +
                               std::to_string(prev_gap) + " to " + std::to_string(gap));
    prev_gap = gap;
  }

  // Componentwise Aitken on the last three terms; the change when dropping
  // the oldest usable triple is the error estimate.
  auto aitken_at = [&](std::size_t last, Mat& a_out, double& m_out) {
    const EffectiveTensors& t0 = lim.sequence[last - 2];
    const EffectiveTensors& t1 = lim.sequence[last - 1];
    const EffectiveTensors& t2 = lim.sequence[last];
    bool ok = false;
    for (int j = 0; j < 9; ++j) a_out[j] = aitken_scalar(t0.a_bar[j], t1.a_bar[j], t2.a_bar[j], ok);
    m_out = aitken_scalar(t0.m_bar, t1.m_bar, t2.m_bar, ok);
  };
  Mat a_last{};
  double m_last = 0;
  aitken_at(n - 1, a_last, m_last);
  lim.a_bar = a_last;
  lim.m_bar = m_last;
  if (n >= 4) {
    Mat a_prev{};
    double m_prev = 0;
    aitken_at(n - 2, a_prev, m_prev);
    lim.a_err = sym_op_norm(f.d, mat_add(f.d, a_last, a_prev, -1.0));
    lim.m_err = std::abs(m_last - m_prev);
  } else {
    lim.a_err = sym_op_norm(f.d, mat_add(f.d, a_last, lim.sequence[n - 1].a_bar, -1.0));
    lim.m_err = std::abs(m_last - lim.sequence[n - 1].m_bar);
  }
  return lim;
}

EmpiricalMeasure sde_empirical_measure(const ProjectedOperator& op, const SliceChart& chart,
                                       double s, long long steps, double dt, int bins,
                                       std::uint64_t seed) {
  if (steps < 0) throw Error("sde_empirical_measure: steps must be >= 0");
  if (bins < 1) throw Error("sde_empirical_measure: bins must be >= 1");
  if (steps > 0 && dt <= 0) throw Error("sde_empirical_measure: dt must be positive");
  const int sdim = chart.sdim;
  const int d = chart.e.d;
  Rng rng(seed);

  EmpiricalMeasure em;
  em.chart = chart;
  em.s = s;
  em.bins = bins;
  em.steps = steps;
  em.dt = dt;
  em.seed = seed;
  std::size_t nbins = sdim == 1 ? std::size_t(bins) : std::size_t(bins) * bins;
  std::vector<double> counts(nbins, 0.0);

  double t[2] = {0.0, 0.0};
  Mat bm;
  auto record = [&]() {
    int i1 = int(std::floor((t[0] - std::floor(t[0])) * bins));
    i1 = std::min(i1, bins - 1);
    if (sdim == 1) {
      counts[i1] += 1.0;
    } else {
      int i2 = int(std::floor((t[1] - std::floor(t[1])) * bins));
      i2 = std::min(i2, bins - 1);
      counts[std::size_t(i1) * bins + i2] += 1.0;
    }
  };

  record();
  for (long long n = 0; n < steps; ++n) {
    double tw[2] = {t[0] - std::floor(t[0]), t[1] - std::floor(t[1])};
    Vec y = slice_point(chart, s, tw);
    op.b(y, bm);
    if (sdim == 1) {
      double c = quad_form(d, bm, chart.P[0]);
      t[0] += std::sqrt(std::max(0.0, 2.0 * c) * dt) * rng.normal();
    } else {
      Vec bp0 = mat_vec(d, bm, chart.P[0]);
      double c11 = 2.0 * dot(d, bp0, chart.P[0]);
      double c22 = 2.0 * quad_form(d, bm, chart.P[1]);
      double c12 = 2.0 * dot(d, bp0, chart.P[1]);
      // Cholesky of the 2x2 diffusion matrix.
      double l11 = std::sqrt(std::max(c11, 0.0));
      double l21 = l11 > 0 ? c12 / l11 : 0.0;
      double l22 = std::sqrt(std::max(c22 - l21 * l21, 0.0));
      double g1 = rng.normal(), g2 = rng.normal();
      double sq = std::sqrt(dt);
      t[0] += sq * l11 * g1;
      t[1] += sq * (l21 * g1 + l22 * g2);
    }
    record();
  }

  double total = double(steps + 1);
  double binvol = sdim == 1 ? 1.0 / bins : 1.0 / (double(bins) * bins);
  em.density.resize(nbins);
  for (std::size_t i = 0; i < nbins; ++i) em.density[i] = counts[i] / (total * binvol);
  return em;
}

std::vector<double> bin_density(const InvariantMeasure& mu, int bins) {
  const int sdim = mu.chart.sdim;
  const int M = mu.M;
  if (M % bins != 0) throw Error("bin_density: bins must divide the measure grid");
  std::size_t nbins = sdim == 1 ? std::size_t(bins) : std::size_t(bins) * bins;
  std::vector<double> out(nbins, 0.0);
  if (sdim == 1) {
    for (int j = 0; j < M; ++j) out[std::size_t(j * bins / M)] += mu.rho[j];
    for (double& v : out) v /= double(M) / bins; // mean density inside the bin
  } else {
    for (int j1 = 0; j1 < M; ++j1)
      for (int j2 = 0; j2 < M; ++j2)
        out[std::size_t(j1 * bins / M) * bins + std::size_t(j2 * bins / M)] +=
            mu.rho[std::size_t(j1) * M + j2];
    double pts_per_bin = (double(M) / bins) * (double(M) / bins);
    for (double& v : out) v /= pts_per_bin;
  }
  return out;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q, int sdim,
                   int bins) {
  double binvol = sdim == 1 ? 1.0 / bins : 1.0 / (double(bins) * bins);
  double tv = 0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv * binvol;
}

} // namespace homog
