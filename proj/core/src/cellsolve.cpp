#include "homog/cellsolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "homog/krylov.hpp"
#include "homog/log.hpp"

namespace homog {

namespace {

// Packed torus coefficients: d=2 -> {b11,b22,b12}, d=3 -> {b11,b22,b33,b12,b13,b23}.
struct TorusCoeffs {
  int d = 2;
  int N = 0;
  int ncomp = 3;
  std::vector<double> b;
  std::vector<double> m;
  std::vector<double> rhs;
  std::size_t nodes() const {
    std::size_t n = N;
    for (int i = 1; i < d; ++i) n *= std::size_t(N);
    return n;
  }
};

TorusCoeffs sample_torus(const ProjectedOperator& op, const Mat& X, int N) {
  TorusCoeffs tc;
  tc.d = op.field->d;
  tc.N = N;
  tc.ncomp = tc.d == 2 ? 3 : 6;
  std::size_t n = tc.nodes();
  tc.b.resize(n * tc.ncomp);
  tc.m.resize(n);
  tc.rhs.resize(n);
  Mat bm;
  const int d = tc.d;
  std::size_t idx = 0;
  int j[3] = {0, 0, 0};
  for (;;) {
    Vec y{};
    for (int i = 0; i < d; ++i) y[i] = double(j[i]) / N;
    op.b(y, bm);
    if (d == 2) {
      tc.b[3 * idx + 0] = at(bm, 0, 0);
      tc.b[3 * idx + 1] = at(bm, 1, 1);
      tc.b[3 * idx + 2] = at(bm, 0, 1);
    } else {
      tc.b[6 * idx + 0] = at(bm, 0, 0);
      tc.b[6 * idx + 1] = at(bm, 1, 1);
      tc.b[6 * idx + 2] = at(bm, 2, 2);
      tc.b[6 * idx + 3] = at(bm, 0, 1);
      tc.b[6 * idx + 4] = at(bm, 0, 2);
      tc.b[6 * idx + 5] = at(bm, 1, 2);
    }
    tc.m[idx] = op.m(y);
    tc.rhs[idx] = trace_prod(d, bm, X);
    ++idx;
    int axis = d - 1;
    while (axis >= 0 && ++j[axis] == N) j[axis--] = 0;
    if (axis < 0) break;
  }
  return tc;
}

// delta m v - sum_ij b_ij D2_ij v on the periodic grid.
void apply_torus(const TorusCoeffs& tc, double delta, const std::vector<double>& v,
                 std::vector<double>& out) {
  const int N = tc.N;
  const double ih2 = double(N) * double(N);
  out.resize(v.size());
  if (tc.d == 2) {
    for (int j1 = 0; j1 < N; ++j1) {
      int j1m = j1 == 0 ? N - 1 : j1 - 1;
      int j1p = j1 == N - 1 ? 0 : j1 + 1;
      for (int j2 = 0; j2 < N; ++j2) {
        int j2m = j2 == 0 ? N - 1 : j2 - 1;
        int j2p = j2 == N - 1 ? 0 : j2 + 1;
        std::size_t idx = std::size_t(j1) * N + j2;
        double d11 = v[std::size_t(j1p) * N + j2] - 2.0 * v[idx] + v[std::size_t(j1m) * N + j2];
        double d22 = v[std::size_t(j1) * N + j2p] - 2.0 * v[idx] + v[std::size_t(j1) * N + j2m];
        double d12 = 0.25 * (v[std::size_t(j1p) * N + j2p] - v[std::size_t(j1p) * N + j2m] -
                             v[std::size_t(j1m) * N + j2p] + v[std::size_t(j1m) * N + j2m]);
        double lap = (tc.b[3 * idx] * d11 + tc.b[3 * idx + 1] * d22 +
                      2.0 * tc.b[3 * idx + 2] * d12) *
                     ih2;
        out[idx] = delta * tc.m[idx] * v[idx] - lap;
      }
    }
    return;
  }
  auto id3 = [N](int a, int b, int c) {
    return (std::size_t(a) * N + std::size_t(b)) * N + std::size_t(c);
  };
  for (int j1 = 0; j1 < N; ++j1) {
    int j1m = j1 == 0 ? N - 1 : j1 - 1;
    int j1p = j1 == N - 1 ? 0 : j1 + 1;
    for (int j2 = 0; j2 < N; ++j2) {
      int j2m = j2 == 0 ? N - 1 : j2 - 1;
      int j2p = j2 == N - 1 ? 0 : j2 + 1;
      for (int j3 = 0; j3 < N; ++j3) {
        int j3m = j3 == 0 ? N - 1 : j3 - 1;
        int j3p = j3 == N - 1 ? 0 : j3 + 1;
        std::size_t idx = id3(j1, j2, j3);
        double d11 = v[id3(j1p, j2, j3)] - 2.0 * v[idx] + v[id3(j1m, j2, j3)];
        double d22 = v[id3(j1, j2p, j3)] - 2.0 * v[idx] + v[id3(j1, j2m, j3)];
        double d33 = v[id3(j1, j2, j3p)] - 2.0 * v[idx] + v[id3(j1, j2, j3m)];
        double d12 = 0.25 * (v[id3(j1p, j2p, j3)] - v[id3(j1p, j2m, j3)] - v[id3(j1m, j2p, j3)] +
                             v[id3(j1m, j2m, j3)]);
        double d13 = 0.25 * (v[id3(j1p, j2, j3p)] - v[id3(j1p, j2, j3m)] - v[id3(j1m, j2, j3p)] +
                             v[id3(j1m, j2, j3m)]);
        double d23 = 0.25 * (v[id3(j1, j2p, j3p)] - v[id3(j1, j2p, j3m)] - v[id3(j1, j2m, j3p)] +
                             v[id3(j1, j2m, j3m)]);
        const double* bb = &tc.b[6 * idx];
        double lap = (bb[0] * d11 + bb[1] * d22 + bb[2] * d33 +
                      2.0 * (bb[3] * d12 + bb[4] * d13 + bb[5] * d23)) *
                     ih2;
        out[idx] = delta * tc.m[idx] * v[idx] - lap;
      }
    }
  }
}

} // namespace

Corrector solve_penalized(const ProjectedOperator& op, const Mat& X, double delta, int N) {
  if (delta <= 0) throw Error("solve_penalized: delta must be positive");
  if (N < 8) throw Error("solve_penalized: N must be >= 8");
  TorusCoeffs tc = sample_torus(op, X, N);
  const std::size_t n = tc.nodes();
  const double ih2 = double(N) * double(N);

  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    double diag_b = 0;
    for (int a = 0; a < tc.d; ++a) diag_b += tc.b[tc.ncomp * i + a];
    inv_diag[i] = 1.0 / (delta * tc.m[i] + 2.0 * diag_b * ih2);
  }
  LinOp A = [&](const std::vector<double>& v, std::vector<double>& out) {
    apply_torus(tc, delta, v, out);
  };

  std::vector<double> x;
  const double tol = 1e-10;
  const int cap = int(80 * std::sqrt(double(n)) + 4000);
  KrylovResult kr = op.constant_in_y() ? cg(A, tc.rhs, x, inv_diag, tol, cap)
                                       : bicgstab(A, tc.rhs, x, inv_diag, tol, cap);
  if (kr.stagnated)
    throw IllConditioned("solve_penalized: residual stagnated at " +
                         std::to_string(kr.rel_residual));
  if (!kr.converged)
    throw SolverDiverged("solve_penalized: no convergence after " + std::to_string(kr.iters) +
                         " iterations, rel residual " + std::to_string(kr.rel_residual));

  std::vector<double> check;
  apply_torus(tc, delta, x, check);
  double resid = 0;
  for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(check[i] - tc.rhs[i]));

  Corrector c;
  c.e = op.e;
  c.X = X;
  c.delta = delta;
  c.residual_inf = resid;
  c.V.domain = GridDomain::torus;
  c.V.dims.assign(op.field->d, N);
  c.V.h.assign(op.field->d, 1.0 / N);
  c.V.v = std::move(x);
  return c;
}

OscillatingProfile extract_Fperp(const ProjectedOperator& op, const Mat& X,
                                 const std::vector<double>& delta_schedule, int N,
                                 int richardson_order) {
  if (!op.e.rational) throw Error("extract_Fperp: direction must be rational");
  if (delta_schedule.size() < 2) throw Error("extract_Fperp: schedule needs at least 2 deltas");
  for (std::size_t i = 1; i < delta_schedule.size(); ++i)
    if (delta_schedule[i] >= delta_schedule[i - 1])
      throw Error("extract_Fperp: schedule must strictly decrease");

  const int d = op.field->d;
  const IVec& k = op.e.k;

  // Slice classes on the grid: c = <j, k> mod N, each holding N^{d-1} nodes.
  std::vector<std::vector<double>> profiles;
  for (double delta : delta_schedule) {
    Corrector cor = solve_penalized(op, X, delta, N);
    std::vector<double> prof(N, 0.0);
    std::vector<int> count(N, 0);
    int j[3] = {0, 0, 0};
    std::size_t idx = 0;
    for (;;) {
      std::int64_t cls = 0;
      for (int i = 0; i < d; ++i) cls += k[i] * j[i];
      int c = int(((cls % N) + N) % N);
      prof[c] += delta * cor.V.v[idx];
      count[c] += 1;
      ++idx;
      int axis = d - 1;
      while (axis >= 0 && ++j[axis] == N) j[axis--] = 0;
      if (axis < 0) break;
    }
    for (int c = 0; c < N; ++c) prof[c] /= double(count[c]);
    profiles.push_back(std::move(prof));
  }

  // Schedule differences must shrink as delta does.
  double prev_diff = -1;
  for (std::size_t i = 1; i < profiles.size(); ++i) {
    double diff = 0;
    for (int c = 0; c < N; ++c) diff = std::max(diff, std::abs(profiles[i][c] - profiles[i - 1][c]));
    if (prev_diff >= 0 && diff > 1.1 * prev_diff + 1e-12)
      throw NonConvergent("extract_Fperp: schedule differences grew from " +
                          std::to_string(prev_diff) + " to " + std::to_string(diff));
    prev_diff = diff;
  }

  // Neville extrapolation to delta = 0 over the last (order+1) entries.
  int deg = std::min<int>(richardson_order, int(delta_schedule.size()) - 1);
  int first = int(delta_schedule.size()) - deg - 1;
  OscillatingProfile out;
  out.e = op.e;
  out.tensor = false;
  out.scalars.resize(N);
  out.s_grid.resize(N);
  double err = 0;
  for (int c = 0; c < N; ++c) {
    out.s_grid[c] = op.e.r * double(c) / N;
    std::vector<double> T(deg + 1);
    for (int i = 0; i <= deg; ++i) T[i] = profiles[first + i][c];
    double lower_order = T[deg];
    for (int lvl = 1; lvl <= deg; ++lvl) {
      lower_order = T[deg];
      for (int i = deg; i >= lvl; --i) {
        double d0 = delta_schedule[first + i - lvl];
        double d1 = delta_schedule[first + i];
        T[i] = (d0 * T[i] - d1 * T[i - 1]) / (d0 - d1);
      }
    }
    out.scalars[c] = T[deg];
    err = std::max(err, std::abs(T[deg] - lower_order));
  }
  out.err = err;
  return out;
}

SliceCellSolution solve_slice_cell(const ProjectedOperator& op, const SliceChart& chart, double s,
                                   const std::function<double(const Vec&)>& f, int M,
                                   const double* f_perp_given, const MeasureOptions& opts) {
  InvariantMeasure mu = invariant_measure_slice(op, chart, s, M, opts);
  SlicePullback p = make_pullback(op, chart, s, M, false);
  const std::size_t n = p.nodes();

  std::vector<double> fv(n);
  if (p.sdim == 1) {
    for (int j = 0; j < M; ++j) {
      double t = double(j) / M;
      fv[j] = f(slice_point(chart, s, &t));
    }
  } else {
    std::size_t idx = 0;
    for (int j1 = 0; j1 < M; ++j1)
      for (int j2 = 0; j2 < M; ++j2, ++idx) {
        double t[2] = {double(j1) / M, double(j2) / M};
        fv[idx] = f(slice_point(chart, s, t));
      }
  }

  double f_perp = mu.average(fv);
  if (f_perp_given && std::abs(f_perp - *f_perp_given) > 1e-8)
    throw CompatibilityViolation("solve_slice_cell: supplied average differs from the "
                                 "invariant-measure average by " +
                                 std::to_string(std::abs(f_perp - *f_perp_given)));

  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = fv[i] - f_perp;

  // -L W + eps mean(W) = rhs. The rank-one term removes the constant
  // nullspace; the solution of the consistent system has mean zero.
  std::vector<double> diag;
  generator_diagonal(p, diag);
  double eps = 0;
  for (double v : diag) eps += std::abs(v);
  eps /= double(n);
  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / (-diag[i] + eps / double(n));
  LinOp A = [&](const std::vector<double>& v, std::vector<double>& out) {
    apply_generator(p, v, out);
    double mean = 0;
    for (double x : v) mean += x;
    mean /= double(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = -out[i] + eps * mean;
  };

  std::vector<double> w;
  const double tol = 1e-12;
  const int cap = int(80 * std::sqrt(double(n)) + 4000);
  KrylovResult kr = op.constant_in_y() ? cg(A, rhs, w, inv_diag, tol, cap)
                                       : bicgstab(A, rhs, w, inv_diag, tol, cap);
  if (!kr.converged && kr.rel_residual > 1e-9)
    throw SolverDiverged("solve_slice_cell: rel residual " + std::to_string(kr.rel_residual));

  std::vector<double> lw;
  apply_generator(p, w, lw);
  double resid = 0;
  for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(-lw[i] - rhs[i]));

  double w0 = w[0];
  for (double& x : w) x -= w0; // gauge W(0) = 0

  SliceCellSolution sol;
  sol.f_perp = f_perp;
  sol.residual_inf = resid;
  sol.W.domain = GridDomain::slice;
  sol.W.dims.assign(p.sdim, M);
  sol.W.h.assign(p.sdim, 1.0 / M);
  sol.W.v = std::move(w);
  return sol;
}

Corrector fourier_corrector(const CoefficientField& f, const Direction& e, int K, int N) {
  if (K < 1) throw Error("fourier_corrector: K must be >= 1");
  if (N < 8) throw Error("fourier_corrector: N must be >= 8");
  const int d = f.d;
  if (f.a_custom || !f.a_terms.empty())
    throw Error("fourier_corrector: requires a constant diffusion tensor");
  // b must act as the identity on e-perp.
  Mat b = project_matrix(d, f.a0, e.e);
  Mat pe = project_matrix(d, identity(d), e.e);
  if (frobenius(d, mat_add(d, b, pe, -1.0)) > 1e-12)
    throw Error("fourier_corrector: diffusion is not the identity on e-perp");
  if (f.m_custom) throw Error("fourier_corrector: requires a trigonometric mobility");

  double efac = 1.0 + f.m_ecoef * dot(d, f.m_edir, e.e);

  struct Mode {
    IVec k;
    double amp;
    double phase;
    double coef;  // coefficient of cos in V
    double opval; // tr(b D^2) factor, 4 pi^2 <b k, k>
  };
  std::vector<Mode> retained, discarded;
  for (const ScalarTerm& t : f.m_terms) {
    double kn = inorm(d, t.k);
    if (kn > double(K) + 1e-12) {
      discarded.push_back({t.k, t.amp * efac, t.phase, 0, 0});
      continue;
    }
    Vec kv = to_vec(d, t.k);
    double ke = dot(d, kv, e.e);
    Vec kp = axpy(d, kv, -ke, e.e);
    double kp2 = norm2(d, kp);
    if (std::sqrt(kp2) < 1e-12)
      throw SmallDivisor("fourier_corrector: mode parallel to e within 1e-12");
    Mode mo{t.k, t.amp * efac, t.phase, 0, 0};
    mo.coef = -mo.amp / (4.0 * M_PI * M_PI * kp2);
    mo.opval = 4.0 * M_PI * M_PI * quad_form(d, b, kv);
    retained.push_back(mo);
  }

  Corrector c;
  c.e = e;
  c.delta = 0;
  c.V.domain = GridDomain::torus;
  c.V.dims.assign(d, N);
  c.V.h.assign(d, 1.0 / N);
  c.V.allocate();

  double tail = 0;
  for (const Mode& mo : discarded) tail += std::abs(mo.amp);
  c.tail_bound = tail;

  // V and the analytic residual of (m - mean) - tr(b D^2 V); the retained
  // modes cancel exactly, what is left is the discarded tail sampled on the
  // grid plus roundoff.
  double resid = 0;
  int j[3] = {0, 0, 0};
  std::size_t idx = 0;
  for (;;) {
    Vec y{};
    for (int i = 0; i < d; ++i) y[i] = double(j[i]) / N;
    double v = 0, r = 0;
    for (const Mode& mo : retained) {
      double c0 = std::cos(2.0 * M_PI * dot(d, to_vec(d, mo.k), y) + mo.phase);
      v += mo.coef * c0;
      // m-term minus tr(b D^2 V)-term; cancels up to roundoff since
      // <b k, k> = |k_perp|^2 here.
      r += mo.amp * c0 + mo.opval * mo.coef * c0;
    }
    for (const Mode& mo : discarded)
      r += mo.amp * std::cos(2.0 * M_PI * dot(d, to_vec(d, mo.k), y) + mo.phase);
    c.V.v[idx] = v;
    resid = std::max(resid, std::abs(r));
    ++idx;
    int axis = d - 1;
    while (axis >= 0 && ++j[axis] == N) j[axis--] = 0;
    if (axis < 0) break;
  }
  c.residual_inf = resid;
  return c;
}

DiophantineResult diophantine_check(const Direction& e, double C_e, double tau, int K_max) {
  if (K_max < 1) throw Error("diophantine_check: K_max must be >= 1");
  const int d = e.d;
  DiophantineResult res;
  res.pass = true;
  double worst = 1e300;
  IVec k{};
  int lo = -K_max, hi = K_max;
  for (k[0] = lo; k[0] <= hi; ++k[0]) {
    for (k[1] = lo; k[1] <= hi; ++k[1]) {
      int lo2 = d == 3 ? lo : 0, hi2 = d == 3 ? hi : 0;
      for (k[2] = lo2; k[2] <= hi2; ++k[2]) {
        double kn2 = idot(d, k, k);
        if (kn2 == 0 || kn2 > double(K_max) * K_max) continue;
        Vec kv = to_vec(d, k);
        double ke = dot(d, kv, e.e);
        Vec kp = axpy(d, kv, -ke, e.e);
        double val = norm(d, kp) * std::pow(std::sqrt(kn2), tau);
        if (val < worst) {
          worst = val;
          res.worst_k = k;
        }
      }
    }
  }
  res.worst_value = worst;
  res.pass = worst >= C_e;
  return res;
}

OscillatingCorrector oscillating_corrector(const CoefficientField& f, const Direction& e, int S,
                                           int M, const MeasureOptions& opts) {
  if (S < 4) throw Error("oscillating_corrector: S must be >= 4");
  OscillatingCorrector oc;
  oc.e = e;
  oc.chart = slice_lattice_basis(e);
  oc.S = S;
  oc.M = M;
  ProjectedOperator op = project_A(f, e);
  auto fm = [&](const Vec& y) { return f.m(y, e.e); };
  std::size_t per = oc.chart.sdim == 1 ? std::size_t(M) : std::size_t(M) * M;
  oc.W.resize(std::size_t(S) * per);
  oc.m_perp.resize(S);
  for (int i = 0; i < S; ++i) {
    double s = e.r * double(i) / S;
    SliceCellSolution sol = solve_slice_cell(op, oc.chart, s, fm, M, nullptr, opts);
    double mean = 0;
    for (double v : sol.W.v) mean += v;
    mean /= double(per);
    for (std::size_t j = 0; j < per; ++j) oc.W[std::size_t(i) * per + j] = sol.W.v[j] - mean;
    oc.m_perp[i] = sol.f_perp;
    oc.residual_inf = std::max(oc.residual_inf, sol.residual_inf);
  }
  double acc = 0;
  for (double v : oc.m_perp) acc += v;
  oc.m_pl = acc / S;
  return oc;
}

void write_grid_binary(const GridFunction& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_grid_binary: cannot open " + path);
  out.write("HMGC", 4);
  std::uint32_t rank = std::uint32_t(g.rank());
  out.write(reinterpret_cast<const char*>(&rank), 4);
  for (int dim : g.dims) {
    std::uint32_t v = std::uint32_t(dim);
    out.write(reinterpret_cast<const char*>(&v), 4);
  }
  for (double hv : g.h) out.write(reinterpret_cast<const char*>(&hv), 8);
  out.write(reinterpret_cast<const char*>(g.v.data()), std::streamsize(g.v.size() * 8));
  if (!out) throw Error("write_grid_binary: short write to " + path);
}

GridFunction read_grid_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_grid_binary: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "HMGC", 4) != 0)
    throw Error("read_grid_binary: bad magic in " + path);
  std::uint32_t rank = 0;
  in.read(reinterpret_cast<char*>(&rank), 4);
  if (!in || rank == 0 || rank > 3) throw Error("read_grid_binary: bad rank in " + path);
  GridFunction g;
  g.dims.resize(rank);
  g.h.resize(rank);
  for (std::uint32_t i = 0; i < rank; ++i) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    g.dims[i] = int(v);
  }
  for (std::uint32_t i = 0; i < rank; ++i) in.read(reinterpret_cast<char*>(&g.h[i]), 8);
  g.v.resize(g.size());
  in.read(reinterpret_cast<char*>(g.v.data()), std::streamsize(g.v.size() * 8));
  if (!in) throw Error("read_grid_binary: truncated file " + path);
  return g;
}

void write_grid_csv(const GridFunction& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_grid_csv: cannot open " + path);
  for (int i = 0; i < g.rank(); ++i) out << "i" << i + 1 << ",";
  out << "value\r\n";
  std::vector<int> j(g.rank(), 0);
  char buf[64];
  for (std::size_t idx = 0; idx < g.v.size(); ++idx) {
    for (int i = 0; i < g.rank(); ++i) out << j[i] << ",";
    std::snprintf(buf, sizeof buf, "%.17g", g.v[idx]);
    out << buf << "\r\n";
    int axis = g.rank() - 1;
    while (axis >= 0 && ++j[axis] == g.dims[axis]) j[axis--] = 0;
  }
}

} // namespace homog
