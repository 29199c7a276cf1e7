#include "homog/front.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "homog/errors.hpp"
#include "homog/log.hpp"

namespace homog {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double series_reduce(double s, double r) {
  double u = s / r;
  u -= std::floor(u);
  return u * r;
}

} // namespace

double PulsatingWave::P_at(double s) const {
  const double u = series_reduce(s, r);
  double acc = 0;
  for (std::size_t k = 1; k <= A.size(); ++k) {
    const double w = kTwoPi * static_cast<double>(k) / r;
    acc += (A[k - 1] * std::sin(w * u) + B[k - 1] * (1.0 - std::cos(w * u))) / w;
  }
  return acc;
}

double PulsatingWave::Pp_at(double s) const {
  const double u = series_reduce(s, r);
  double acc = 0;
  for (std::size_t k = 1; k <= A.size(); ++k) {
    const double w = kTwoPi * static_cast<double>(k) / r;
    acc += A[k - 1] * std::cos(w * u) + B[k - 1] * std::sin(w * u);
  }
  return acc;
}

double PulsatingWave::Ppp_at(double s) const {
  const double u = series_reduce(s, r);
  double acc = 0;
  for (std::size_t k = 1; k <= A.size(); ++k) {
    const double w = kTwoPi * static_cast<double>(k) / r;
    acc += w * (B[k - 1] * std::cos(w * u) - A[k - 1] * std::sin(w * u));
  }
  return acc;
}

PulsatingWave pulsating_profile(const OscillatingProfile& m_perp, const Direction& e) {
  if (!e.rational) throw Error("pulsating_profile: direction must be rational");
  if (m_perp.tensor) throw Error("pulsating_profile: profile must be scalar");
  const int S = static_cast<int>(m_perp.s_grid.size());
  if (S < 4) throw Error("pulsating_profile: need at least 4 offsets");
  if (std::abs(dot(e.d, m_perp.e.e, e.e) - 1.0) > 1e-10)
    throw Error("pulsating_profile: profile direction mismatch");
  const double r = e.r;
  for (int j = 0; j < S; ++j) {
    const double want = r * static_cast<double>(j) / S;
    if (std::abs(m_perp.s_grid[j] - want) > 1e-9 * r)
      throw Error("pulsating_profile: offsets must be the uniform grid over [0, r)");
  }

  PulsatingWave wave;
  wave.e = e;
  wave.r = r;
  wave.s_grid = m_perp.s_grid;

  double mean = 0;
  for (double v : m_perp.scalars) mean += v;
  mean /= S;
  if (mean <= 0) throw EllipticityViolation("pulsating_profile: nonpositive mean mobility");
  wave.m_pl = mean;

  std::vector<double> g(S);
  for (int j = 0; j < S; ++j) {
    g[j] = m_perp.scalars[j] / mean - 1.0;
    if (1.0 + g[j] <= 0)
      throw EllipticityViolation("pulsating_profile: nonpositive slice mobility");
  }

  const int K = S / 2;
  wave.A.assign(K, 0.0);
  wave.B.assign(K, 0.0);
  for (int k = 1; k <= K; ++k) {
    double ca = 0, sa = 0;
    for (int j = 0; j < S; ++j) {
      const double ph = kTwoPi * static_cast<double>(k) * j / S;
      ca += g[j] * std::cos(ph);
      sa += g[j] * std::sin(ph);
    }
    const double scale = (2 * k == S) ? 1.0 / S : 2.0 / S; // Nyquist mode counted once
    wave.A[k - 1] = scale * ca;
    wave.B[k - 1] = scale * sa;
  }

  wave.P.resize(S);
  for (int j = 0; j < S; ++j) wave.P[j] = wave.P_at(wave.s_grid[j]);
  if (std::abs(wave.P_at(r)) > 1e-8)
    throw NonConvergent("pulsating_profile: P does not close over the period");
  return wave;
}

namespace {

struct WaveNode {
  Vec y{};    // ambient point, reduced mod 1
  double Pp = 0;
  double Ppp = 0;
  Vec DV{};   // ambient gradient of the corrector
  Mat D2V{};  // ambient Hessian of the corrector
};

// Chart-space first derivative along the offset index: central interior,
// second-order one-sided at the ends (the monodromy shift is not a grid
// shift, so no periodic wrap).
double s_deriv(const std::vector<double>& col, int i, int S, double hs) {
  if (i > 0 && i + 1 < S) return (col[i + 1] - col[i - 1]) / (2 * hs);
  if (i == 0) return (-3 * col[0] + 4 * col[1] - col[2]) / (2 * hs);
  return (3 * col[S - 1] - 4 * col[S - 2] + col[S - 3]) / (2 * hs);
}

double s_deriv2(const std::vector<double>& col, int i, int S, double hs) {
  if (i > 0 && i + 1 < S) return (col[i + 1] - 2 * col[i] + col[i - 1]) / (hs * hs);
  if (i == 0) return (2 * col[0] - 5 * col[1] + 4 * col[2] - col[3]) / (hs * hs);
  return (2 * col[S - 1] - 5 * col[S - 2] + 4 * col[S - 3] - col[S - 4]) / (hs * hs);
}

std::vector<WaveNode> build_wave_nodes(const OscillatingCorrector& cor, const PulsatingWave& wave,
                                       double epsilon) {
  const SliceChart& chart = cor.chart;
  const int d = chart.e.d;
  const int sdim = chart.sdim;
  const int S = cor.S;
  const int M = cor.M;
  const int per = (sdim == 1) ? M : M * M;
  const double hs = wave.r / S;
  const double ht = 1.0 / M;

  const auto wat = [&](int i, int j0, int j1) {
    const int jt = (sdim == 1) ? j0 : j0 * M + j1;
    return cor.W[static_cast<std::size_t>(i) * per + jt];
  };
  const auto wrap = [&](int j) { return ((j % M) + M) % M; };

  std::vector<WaveNode> nodes;
  nodes.reserve(static_cast<std::size_t>(S) * per);
  std::vector<double> col(S);

  for (int i = 0; i < S; ++i) {
    const double s = wave.s_grid[i];
    for (int j0 = 0; j0 < M; ++j0) {
      const int j1max = (sdim == 1) ? 1 : M;
      for (int j1 = 0; j1 < j1max; ++j1) {
        WaveNode nd;
        double t[2] = {static_cast<double>(j0) / M, static_cast<double>(j1) / M};
        Vec y = slice_point(chart, s, t);
        for (int c = 0; c < d; ++c) y[c] -= std::floor(y[c]);
        nd.y = y;
        nd.Pp = wave.Pp_at(s);
        nd.Ppp = wave.Ppp_at(s);

        // chart-space derivatives of W at (i, j0, j1)
        const int j0p = wrap(j0 + 1), j0m = wrap(j0 - 1);
        const int j1p = wrap(j1 + 1), j1m = wrap(j1 - 1);
        double Wt[2] = {0, 0}, Wtt[3] = {0, 0, 0}; // Wtt: {00, 11, 01}
        Wt[0] = (wat(i, j0p, j1) - wat(i, j0m, j1)) / (2 * ht);
        Wtt[0] = (wat(i, j0p, j1) - 2 * wat(i, j0, j1) + wat(i, j0m, j1)) / (ht * ht);
        if (sdim == 2) {
          Wt[1] = (wat(i, j0, j1p) - wat(i, j0, j1m)) / (2 * ht);
          Wtt[1] = (wat(i, j0, j1p) - 2 * wat(i, j0, j1) + wat(i, j0, j1m)) / (ht * ht);
          Wtt[2] = (wat(i, j0p, j1p) - wat(i, j0p, j1m) - wat(i, j0m, j1p) + wat(i, j0m, j1m)) /
                   (4 * ht * ht);
        }
        for (int q = 0; q < S; ++q) col[q] = wat(q, j0, j1);
        const double Ws = s_deriv(col, i, S, hs);
        const double Wss = s_deriv2(col, i, S, hs);
        double Wst[2] = {0, 0};
        {
          std::vector<double> colp(S), colm(S);
          for (int q = 0; q < S; ++q) {
            colp[q] = wat(q, j0p, j1);
            colm[q] = wat(q, j0m, j1);
          }
          Wst[0] = (s_deriv(colp, i, S, hs) - s_deriv(colm, i, S, hs)) / (2 * ht);
          if (sdim == 2) {
            for (int q = 0; q < S; ++q) {
              colp[q] = wat(q, j0, j1p);
              colm[q] = wat(q, j0, j1m);
            }
            Wst[1] = (s_deriv(colp, i, S, hs) - s_deriv(colm, i, S, hs)) / (2 * ht);
          }
        }

        // ambient assembly: sigma-gradient is e, chart gradients are the duals
        Vec DV{};
        for (int c = 0; c < d; ++c) DV[c] = chart.e.e[c] * Ws;
        for (int a = 0; a < sdim; ++a)
          for (int c = 0; c < d; ++c) DV[c] += chart.P[a][c] * Wt[a];
        Mat D2V{};
        for (int c = 0; c < d; ++c)
          for (int cc = 0; cc < d; ++cc) {
            double v = chart.e.e[c] * chart.e.e[cc] * Wss;
            for (int a = 0; a < sdim; ++a)
              v += (chart.e.e[c] * chart.P[a][cc] + chart.P[a][c] * chart.e.e[cc]) * Wst[a];
            for (int a = 0; a < sdim; ++a)
              for (int b = 0; b < sdim; ++b) {
                const double wab = (a == b) ? Wtt[a] : Wtt[2];
                v += chart.P[a][c] * chart.P[b][cc] * wab;
              }
            at(D2V, c, cc) = v;
          }
        nd.DV = DV;
        nd.D2V = D2V;
        nodes.push_back(nd);
      }
    }
  }
  (void)epsilon;
  return nodes;
}

} // namespace

TravelingBracket verify_traveling(const CoefficientField& f, const Direction& e, double alpha,
                                  double epsilon, const OscillatingCorrector& corrector,
                                  const PulsatingWave& wave) {
  if (!(alpha > 0)) throw InvalidAlpha("verify_traveling: alpha must be positive");
  if (!(epsilon > 0)) throw Error("verify_traveling: epsilon must be positive");
  if (corrector.residual_inf > 1e-8)
    throw NonConvergent("verify_traveling: corrector residual exceeds 1e-8");
  if (std::abs(dot(e.d, corrector.e.e, e.e) - 1.0) > 1e-10 ||
      std::abs(dot(e.d, wave.e.e, e.e) - 1.0) > 1e-10)
    throw Error("verify_traveling: direction mismatch between corrector and wave");

  const int d = f.d;
  const std::vector<WaveNode> nodes = build_wave_nodes(corrector, wave, epsilon);

  // residual of m u_t - tr(A D^2 u) - alpha |Du| at every product node;
  // u_t = alpha_c / m_pl and the geometry depends on alpha_c only through
  // the O(eps) corrector tilt, so the extremes are monotone in alpha_c
  const auto extremes = [&](double alpha_c) {
    const double cv = alpha_c / wave.m_pl;
    double rmin = 1e300, rmax = -1e300;
    Mat av{}, bv{};
    for (const WaveNode& nd : nodes) {
      // the slice corrector solves -tr(b D^2 W) = m - m_perp, so the wave
      // ansatz subtracts it
      Vec Du{};
      for (int c = 0; c < d; ++c) Du[c] = (1.0 + nd.Pp) * e.e[c] - cv * epsilon * nd.DV[c];
      const double gn = norm(d, Du);
      if (gn < 1e-10) throw GradientDegenerate("verify_traveling: |Du| vanished");
      Vec n{};
      for (int c = 0; c < d; ++c) n[c] = Du[c] / gn;
      f.a(nd.y, n, av);
      bv = project_matrix(d, av, n);
      double tr = 0;
      for (int c = 0; c < d; ++c)
        for (int cc = 0; cc < d; ++cc)
          tr += at(bv, c, cc) *
                (nd.Ppp / epsilon * e.e[c] * e.e[cc] - cv * at(nd.D2V, c, cc));
      const double res = f.m(nd.y, n) * cv - tr - alpha * gn;
      rmin = std::min(rmin, res);
      rmax = std::max(rmax, res);
    }
    return std::pair<double, double>(rmin, rmax);
  };

  TravelingBracket out;

  // supersolution: smallest alpha_c >= alpha with min residual >= 0
  {
    double lo = alpha;
    auto [flo, fhi_u] = extremes(lo);
    (void)fhi_u;
    if (flo >= 0) {
      out.alpha_plus = lo;
      out.margin = flo;
    } else {
      double step = std::max(0.05 * alpha, 1e-8);
      double hi = lo + step;
      double fhi = extremes(hi).first;
      int grow = 0;
      while (fhi < 0) {
        if (++grow > 40) throw NoMargin("verify_traveling: no supersolution bracket");
        step *= 2;
        hi += step;
        fhi = extremes(hi).first;
      }
      for (int it = 0; it < 70 && hi - lo > 1e-13 * std::max(1.0, alpha); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (extremes(mid).first >= 0)
          hi = mid;
        else
          lo = mid;
      }
      out.alpha_plus = hi;
      out.margin = extremes(hi).first;
    }
  }

  // subsolution: largest alpha_c <= alpha with max residual <= 0
  {
    double hi = alpha;
    const double ghi = extremes(hi).second;
    double sub_margin;
    if (ghi <= 0) {
      out.alpha_minus = hi;
      sub_margin = -ghi;
    } else {
      double step = std::max(0.05 * alpha, 1e-8);
      double lo = hi - step;
      double glo = extremes(lo).second;
      int grow = 0;
      while (glo > 0) {
        if (++grow > 40) throw NoMargin("verify_traveling: no subsolution bracket");
        step *= 2;
        lo -= step;
        glo = extremes(lo).second;
      }
      for (int it = 0; it < 70 && hi - lo > 1e-13 * std::max(1.0, alpha); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (extremes(mid).second <= 0)
          lo = mid;
        else
          hi = mid;
      }
      out.alpha_minus = lo;
      sub_margin = -extremes(lo).second;
    }
    out.margin = std::min(out.margin, sub_margin);
  }

  if (out.alpha_minus > out.alpha_plus)
    throw NoMargin("verify_traveling: brackets crossed");
  return out;
}

FrontState simulate_front(const CoefficientField& f, const Direction& e, double alpha,
                          double epsilon, double T_final, const std::vector<int>& dims,
                          const FrontOptions& opts) {
  const int d = f.d;
  if (static_cast<int>(dims.size()) != d)
    throw Error("simulate_front: dims must have one entry per axis");
  for (int n : dims)
    if (n < 4) throw Error("simulate_front: need at least 4 nodes per axis");
  if (!(epsilon > 0) || !(T_final > 0))
    throw Error("simulate_front: epsilon and T_final must be positive");

  FrontState st;
  st.e = e;
  st.alpha = alpha;
  st.epsilon = epsilon;
  st.dims = dims;
  st.h.resize(d);
  std::size_t total = 1;
  for (int c = 0; c < d; ++c) {
    st.h[c] = epsilon / dims[c];
    total *= static_cast<std::size_t>(dims[c]);
  }
  const double hmin = *std::min_element(st.h.begin(), st.h.end());

  const double dt_limit = hmin * hmin * f.m_min / (2.0 * f.Lambda * d);
  double dt;
  if (opts.dt_override > 0) {
    if (opts.dt_override > dt_limit * (1 + 1e-12))
      throw CFLViolation("simulate_front: dt exceeds the parabolic stability bound");
    dt = opts.dt_override;
  } else {
    dt = opts.cfl * hmin * hmin * f.m_min / (f.Lambda * d);
  }
  std::size_t steps = static_cast<std::size_t>(std::ceil(T_final / dt));
  if (steps < 8) steps = 8;
  dt = T_final / static_cast<double>(steps);
  st.dt = dt;

  // coefficient tables: a never depends on the orientation for the builtin
  // families, and m factors into m_y(y) (1 + c <edir, n>)
  const bool a_static = !f.a_custom;
  const bool m_static = !f.m_custom;
  const int N0 = dims[0];
  const int N1 = (d > 1) ? dims[1] : 1;
  const int N2 = (d > 2) ? dims[2] : 1;

  std::vector<double> a_tab; // packed symmetric per node
  std::vector<double> my_tab;
  const int apack = (d == 2) ? 3 : 6;
  std::vector<Vec> ynode(total);
  {
    std::size_t id = 0;
    for (int i0 = 0; i0 < N0; ++i0)
      for (int i1 = 0; i1 < N1; ++i1)
        for (int i2 = 0; i2 < N2; ++i2, ++id) {
          Vec y{};
          y[0] = static_cast<double>(i0) / N0;
          if (d > 1) y[1] = static_cast<double>(i1) / N1;
          if (d > 2) y[2] = static_cast<double>(i2) / N2;
          ynode[id] = y;
        }
  }
  if (a_static) {
    a_tab.resize(total * apack);
    Mat av{};
    for (std::size_t id = 0; id < total; ++id) {
      f.a(ynode[id], e.e, av);
      double* p = &a_tab[id * apack];
      if (d == 2) {
        p[0] = at(av, 0, 0);
        p[1] = at(av, 1, 1);
        p[2] = at(av, 0, 1);
      } else {
        p[0] = at(av, 0, 0);
        p[1] = at(av, 1, 1);
        p[2] = at(av, 2, 2);
        p[3] = at(av, 0, 1);
        p[4] = at(av, 0, 2);
        p[5] = at(av, 1, 2);
      }
    }
  }
  if (m_static) {
    my_tab.resize(total);
    for (std::size_t id = 0; id < total; ++id) {
      double base = f.m0;
      for (const ScalarTerm& t : f.m_terms)
        base += t.amp * std::cos(kTwoPi * dot(d, to_vec(d, t.k), ynode[id]) + t.phase);
      my_tab[id] = base;
    }
  }
  const bool m_tilts = m_static && f.m_ecoef != 0;

  std::vector<int> jp0(N0), jm0(N0), jp1(N1), jm1(N1), jp2(N2), jm2(N2);
  for (int i = 0; i < N0; ++i) {
    jp0[i] = (i + 1 == N0) ? 0 : i + 1;
    jm0[i] = (i == 0) ? N0 - 1 : i - 1;
  }
  for (int i = 0; i < N1; ++i) {
    jp1[i] = (i + 1 == N1) ? 0 : i + 1;
    jm1[i] = (i == 0) ? N1 - 1 : i - 1;
  }
  for (int i = 0; i < N2; ++i) {
    jp2[i] = (i + 1 == N2) ? 0 : i + 1;
    jm2[i] = (i == 0) ? N2 - 1 : i - 1;
  }

  std::vector<double> w(total, 0.0), wn(total, 0.0);
  const std::size_t stride = std::max<std::size_t>(1, steps / std::max(16, opts.max_samples));
  st.sample_t.reserve(steps / stride + 2);
  st.sample_mean.reserve(steps / stride + 2);

  const auto record = [&](double t) {
    double mean = 0;
    for (double v : w) mean += v;
    st.sample_t.push_back(t);
    st.sample_mean.push_back(mean / static_cast<double>(total));
  };
  record(0.0);

  const double e0 = e.e[0], e1 = (d > 1) ? e.e[1] : 0.0, e2 = (d > 2) ? e.e[2] : 0.0;
  const double h0 = st.h[0], h1 = (d > 1) ? st.h[1] : 1.0, h2 = (d > 2) ? st.h[2] : 1.0;

  Mat av{}, bv{};
  for (std::size_t step = 1; step <= steps; ++step) {
    if (d == 2) {
      for (int i0 = 0; i0 < N0; ++i0) {
        const std::size_t row = static_cast<std::size_t>(i0) * N1;
        const std::size_t rp = static_cast<std::size_t>(jp0[i0]) * N1;
        const std::size_t rm = static_cast<std::size_t>(jm0[i0]) * N1;
        for (int i1 = 0; i1 < N1; ++i1) {
          const std::size_t id = row + i1;
          const double wc = w[id];
          const double wxp = w[rp + i1], wxm = w[rm + i1];
          const double wyp = w[row + jp1[i1]], wym = w[row + jm1[i1]];
          const double g0 = e0 + (wxp - wxm) / (2 * h0);
          const double g1 = e1 + (wyp - wym) / (2 * h1);
          const double gn = std::sqrt(g0 * g0 + g1 * g1);
          if (gn < 0.5) throw GradientDegenerate("simulate_front: |Du| fell below 1/2");
          const double t0 = -g1 / gn, t1 = g0 / gn; // unit tangent
          double qa;
          if (a_static) {
            const double* p = &a_tab[id * 3];
            qa = p[0] * t0 * t0 + p[1] * t1 * t1 + 2 * p[2] * t0 * t1;
          } else {
            const Vec n{g0 / gn, g1 / gn, 0};
            f.a(ynode[id], n, av);
            qa = at(av, 0, 0) * t0 * t0 + at(av, 1, 1) * t1 * t1 + 2 * at(av, 0, 1) * t0 * t1;
          }
          const double d11 = (wxp - 2 * wc + wxm) / (h0 * h0);
          const double d22 = (wyp - 2 * wc + wym) / (h1 * h1);
          const double d12 = (w[rp + jp1[i1]] - w[rp + jm1[i1]] - w[rm + jp1[i1]] +
                              w[rm + jm1[i1]]) /
                             (4 * h0 * h1);
          const double curv = d11 * t0 * t0 + d22 * t1 * t1 + 2 * d12 * t0 * t1;
          double mv;
          if (!m_static) {
            const Vec n{g0 / gn, g1 / gn, 0};
            mv = f.m(ynode[id], n);
          } else if (m_tilts) {
            mv = my_tab[id] *
                 (1.0 + f.m_ecoef * (f.m_edir[0] * g0 + f.m_edir[1] * g1) / gn);
          } else {
            mv = my_tab[id];
          }
          wn[id] = wc + dt * (qa * curv + alpha * gn) / mv;
        }
      }
    } else {
      for (int i0 = 0; i0 < N0; ++i0)
        for (int i1 = 0; i1 < N1; ++i1)
          for (int i2 = 0; i2 < N2; ++i2) {
            const auto at3 = [&](int a, int b, int c) {
              return w[(static_cast<std::size_t>(a) * N1 + b) * N2 + c];
            };
            const std::size_t id = (static_cast<std::size_t>(i0) * N1 + i1) * N2 + i2;
            const double wc = w[id];
            const double wxp = at3(jp0[i0], i1, i2), wxm = at3(jm0[i0], i1, i2);
            const double wyp = at3(i0, jp1[i1], i2), wym = at3(i0, jm1[i1], i2);
            const double wzp = at3(i0, i1, jp2[i2]), wzm = at3(i0, i1, jm2[i2]);
            Vec Du{e0 + (wxp - wxm) / (2 * h0), e1 + (wyp - wym) / (2 * h1),
                   e2 + (wzp - wzm) / (2 * h2)};
            const double gn = norm(3, Du);
            if (gn < 0.5) throw GradientDegenerate("simulate_front: |Du| fell below 1/2");
            Vec n{Du[0] / gn, Du[1] / gn, Du[2] / gn};
            if (a_static) {
              const double* p = &a_tab[id * 6];
              at(av, 0, 0) = p[0];
              at(av, 1, 1) = p[1];
              at(av, 2, 2) = p[2];
              at(av, 0, 1) = at(av, 1, 0) = p[3];
              at(av, 0, 2) = at(av, 2, 0) = p[4];
              at(av, 1, 2) = at(av, 2, 1) = p[5];
            } else {
              f.a(ynode[id], n, av);
            }
            bv = project_matrix(3, av, n);
            Mat hess{};
            at(hess, 0, 0) = (wxp - 2 * wc + wxm) / (h0 * h0);
            at(hess, 1, 1) = (wyp - 2 * wc + wym) / (h1 * h1);
            at(hess, 2, 2) = (wzp - 2 * wc + wzm) / (h2 * h2);
            at(hess, 0, 1) = at(hess, 1, 0) =
                (at3(jp0[i0], jp1[i1], i2) - at3(jp0[i0], jm1[i1], i2) -
                 at3(jm0[i0], jp1[i1], i2) + at3(jm0[i0], jm1[i1], i2)) /
                (4 * h0 * h1);
            at(hess, 0, 2) = at(hess, 2, 0) =
                (at3(jp0[i0], i1, jp2[i2]) - at3(jp0[i0], i1, jm2[i2]) -
                 at3(jm0[i0], i1, jp2[i2]) + at3(jm0[i0], i1, jm2[i2])) /
                (4 * h0 * h2);
            at(hess, 1, 2) = at(hess, 2, 1) =
                (at3(i0, jp1[i1], jp2[i2]) - at3(i0, jp1[i1], jm2[i2]) -
                 at3(i0, jm1[i1], jp2[i2]) + at3(i0, jm1[i1], jm2[i2])) /
                (4 * h1 * h2);
            const double tr = trace_prod(3, bv, hess);
            const double mv = m_static
                                  ? my_tab[id] * (m_tilts ? 1.0 + f.m_ecoef * dot(3, f.m_edir, n)
                                                          : 1.0)
                                  : f.m(ynode[id], n);
            wn[id] = wc + dt * (tr + alpha * gn) / mv;
          }
    }
    w.swap(wn);

    if (step % 100 == 0) {
      for (double v : w)
        if (!std::isfinite(v)) throw SolverDiverged("simulate_front: field blew up");
    }
    if (step % stride == 0 || step == steps) record(dt * static_cast<double>(step));
  }
  st.time = T_final;

  // least-squares slope of mean(w) over the trailing half of the run
  {
    std::size_t first = 0;
    while (first < st.sample_t.size() && st.sample_t[first] < 0.5 * T_final) ++first;
    if (st.sample_t.size() - first < 2) first = st.sample_t.size() / 2;
    double tb = 0, mb = 0;
    const std::size_t n = st.sample_t.size() - first;
    for (std::size_t i = first; i < st.sample_t.size(); ++i) {
      tb += st.sample_t[i];
      mb += st.sample_mean[i];
    }
    tb /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double num = 0, den = 0;
    for (std::size_t i = first; i < st.sample_t.size(); ++i) {
      num += (st.sample_t[i] - tb) * (st.sample_mean[i] - mb);
      den += (st.sample_t[i] - tb) * (st.sample_t[i] - tb);
    }
    if (den <= 0) throw Error("simulate_front: too few samples for the speed fit");
    st.speed = num / den;
    double rss = 0;
    for (std::size_t i = first; i < st.sample_t.size(); ++i) {
      const double r = st.sample_mean[i] - mb - st.speed * (st.sample_t[i] - tb);
      rss += r * r;
    }
    st.fit_rms = std::sqrt(rss / static_cast<double>(n));
  }
  st.w = std::move(w);
  log_debug("front speed fit " + std::to_string(st.speed));
  return st;
}

double front_speed_2d(const CoefficientField& f, const Direction& e, double alpha,
                      double T_final, const std::vector<int>& dims, const FrontOptions& opts) {
  if (f.d != 2) throw Error("front_speed_2d: field must be two-dimensional");
  return simulate_front(f, e, alpha, 1.0, T_final, dims, opts).speed;
}

} // namespace homog
