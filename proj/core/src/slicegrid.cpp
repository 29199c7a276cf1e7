#include "homog/slicegrid.hpp"

#include <cmath>

#include "homog/grid.hpp"

namespace homog {

SlicePullback make_pullback(const ProjectedOperator& op, const SliceChart& chart, double s,
                            int M, bool want_mobility) {
  if (M < 4) throw Error("make_pullback: M must be >= 4");
  SlicePullback p;
  p.chart = chart;
  p.s = s;
  p.M = M;
  p.sdim = chart.sdim;
  const int d = chart.e.d;
  p.c.assign(p.nodes() * p.ncomp(), 0.0);
  if (want_mobility) p.mob.assign(p.nodes(), 0.0);

  Mat bm;
  if (p.sdim == 1) {
    for (int j = 0; j < M; ++j) {
      double t = double(j) / M;
      Vec y = slice_point(chart, s, &t);
      op.b(y, bm);
      p.c[j] = quad_form(d, bm, chart.P[0]);
      if (want_mobility) p.mob[j] = op.m(y);
    }
  } else {
    std::size_t idx = 0;
    for (int j1 = 0; j1 < M; ++j1) {
      for (int j2 = 0; j2 < M; ++j2, ++idx) {
        double t[2] = {double(j1) / M, double(j2) / M};
        Vec y = slice_point(chart, s, t);
        op.b(y, bm);
        Vec bp0 = mat_vec(d, bm, chart.P[0]);
        p.c[3 * idx + 0] = dot(d, bp0, chart.P[0]);
        p.c[3 * idx + 1] = quad_form(d, bm, chart.P[1]);
        p.c[3 * idx + 2] = dot(d, bp0, chart.P[1]);
        if (want_mobility) p.mob[idx] = op.m(y);
      }
    }
  }
  return p;
}

Vec pullback_point(const SlicePullback& p, int j1, int j2) {
  double t[2] = {double(j1) / p.M, double(j2) / p.M};
  return slice_point(p.chart, p.s, t);
}

void apply_generator(const SlicePullback& p, const std::vector<double>& u,
                     std::vector<double>& out) {
  const int M = p.M;
  const double ih2 = double(M) * double(M);
  out.resize(p.nodes());
  if (p.sdim == 1) {
    for (int j = 0; j < M; ++j) {
      int jm = j == 0 ? M - 1 : j - 1;
      int jp = j == M - 1 ? 0 : j + 1;
      out[j] = p.c[j] * (u[jp] - 2.0 * u[j] + u[jm]) * ih2;
    }
    return;
  }
  for (int j1 = 0; j1 < M; ++j1) {
    int j1m = j1 == 0 ? M - 1 : j1 - 1;
    int j1p = j1 == M - 1 ? 0 : j1 + 1;
    for (int j2 = 0; j2 < M; ++j2) {
      int j2m = j2 == 0 ? M - 1 : j2 - 1;
      int j2p = j2 == M - 1 ? 0 : j2 + 1;
      std::size_t idx = std::size_t(j1) * M + j2;
      double d11 = (u[std::size_t(j1p) * M + j2] - 2.0 * u[idx] + u[std::size_t(j1m) * M + j2]);
      double d22 = (u[std::size_t(j1) * M + j2p] - 2.0 * u[idx] + u[std::size_t(j1) * M + j2m]);
      double d12 = (u[std::size_t(j1p) * M + j2p] - u[std::size_t(j1p) * M + j2m] -
                    u[std::size_t(j1m) * M + j2p] + u[std::size_t(j1m) * M + j2m]) *
                   0.25;
      out[idx] = (p.c[3 * idx] * d11 + p.c[3 * idx + 1] * d22 + 2.0 * p.c[3 * idx + 2] * d12) * ih2;
    }
  }
}

void apply_generator_adjoint(const SlicePullback& p, const std::vector<double>& q,
                             std::vector<double>& out) {
  const int M = p.M;
  const double ih2 = double(M) * double(M);
  const std::size_t n = p.nodes();
  out.assign(n, 0.0);
  if (p.sdim == 1) {
    // D2 (c q): form the product first, the stencil is its own transpose.
    for (int j = 0; j < M; ++j) {
      int jm = j == 0 ? M - 1 : j - 1;
      int jp = j == M - 1 ? 0 : j + 1;
      out[j] = (p.c[jp] * q[jp] - 2.0 * p.c[j] * q[j] + p.c[jm] * q[jm]) * ih2;
    }
    return;
  }
  std::vector<double> w(n);
  auto add_d11 = [&](const std::vector<double>& f, double scale) {
    for (int j1 = 0; j1 < M; ++j1) {
      int j1m = j1 == 0 ? M - 1 : j1 - 1;
      int j1p = j1 == M - 1 ? 0 : j1 + 1;
      for (int j2 = 0; j2 < M; ++j2) {
        std::size_t idx = std::size_t(j1) * M + j2;
        out[idx] += scale *
                    (f[std::size_t(j1p) * M + j2] - 2.0 * f[idx] + f[std::size_t(j1m) * M + j2]) *
                    ih2;
      }
    }
  };
  auto add_d22 = [&](const std::vector<double>& f, double scale) {
    for (int j1 = 0; j1 < M; ++j1) {
      for (int j2 = 0; j2 < M; ++j2) {
        int j2m = j2 == 0 ? M - 1 : j2 - 1;
        int j2p = j2 == M - 1 ? 0 : j2 + 1;
        std::size_t idx = std::size_t(j1) * M + j2;
        out[idx] += scale *
                    (f[std::size_t(j1) * M + j2p] - 2.0 * f[idx] + f[std::size_t(j1) * M + j2m]) *
                    ih2;
      }
    }
  };
  auto add_d12 = [&](const std::vector<double>& f, double scale) {
    for (int j1 = 0; j1 < M; ++j1) {
      int j1m = j1 == 0 ? M - 1 : j1 - 1;
      int j1p = j1 == M - 1 ? 0 : j1 + 1;
      for (int j2 = 0; j2 < M; ++j2) {
        int j2m = j2 == 0 ? M - 1 : j2 - 1;
        int j2p = j2 == M - 1 ? 0 : j2 + 1;
        std::size_t idx = std::size_t(j1) * M + j2;
        out[idx] += scale * 0.25 *
                    (f[std::size_t(j1p) * M + j2p] - f[std::size_t(j1p) * M + j2m] -
                     f[std::size_t(j1m) * M + j2p] + f[std::size_t(j1m) * M + j2m]) *
                    ih2;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) w[i] = p.c[3 * i] * q[i];
  add_d11(w, 1.0);
  for (std::size_t i = 0; i < n; ++i) w[i] = p.c[3 * i + 1] * q[i];
  add_d22(w, 1.0);
  for (std::size_t i = 0; i < n; ++i) w[i] = p.c[3 * i + 2] * q[i];
  add_d12(w, 2.0);
}

void generator_diagonal(const SlicePullback& p, std::vector<double>& diag) {
  const double ih2 = double(p.M) * double(p.M);
  const std::size_t n = p.nodes();
  diag.resize(n);
  if (p.sdim == 1) {
    for (std::size_t i = 0; i < n; ++i) diag[i] = -2.0 * p.c[i] * ih2;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) diag[i] = -2.0 * (p.c[3 * i] + p.c[3 * i + 1]) * ih2;
}

} // namespace homog
