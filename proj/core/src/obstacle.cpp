#include "homog/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "homog/errors.hpp"
#include "homog/linalg.hpp"
#include "homog/log.hpp"

namespace homog {

namespace {

struct CubeGrid {
  int sdim = 1;
  int M = 8;         // cells per axis
  double h = 0;
  int nodes = 0;     // per axis, M + 1
  std::size_t total = 0;
};

// node z-coordinate along one axis
double zcoord(const CubeGrid& g, double R, int i) { return -0.5 * R + g.h * i; }

} // namespace

ObstacleSolution solve_obstacle(const ProjectedOperator& op, ObstacleKind kind, const Mat& X,
                                double mu, double R, const Vec& x_shift, double theta, int M) {
  const int d = op.e.d;
  const int sdim = d - 1;
  if (!(R > 0)) throw Error("solve_obstacle: R must be positive");
  if (!(theta > 0)) throw Error("solve_obstacle: theta must be positive");
  if (M < 4) throw Error("solve_obstacle: need at least 4 cells per axis");
  if (static_cast<double>(M) < 8.0 * R / theta)
    throw Error("solve_obstacle: grid does not resolve the coefficient period");
  const SliceChart chart = slice_lattice_basis(op.e);

  CubeGrid g;
  g.sdim = sdim;
  g.M = M;
  g.h = R / M;
  g.nodes = M + 1;
  g.total = 1;
  for (int a = 0; a < sdim; ++a) g.total *= static_cast<std::size_t>(g.nodes);

  const Mat Xt = project_matrix(d, X, op.e.e);

  // frozen nodal coefficients of -tr(b D^2 u)/m and the forcing q
  std::vector<double> c11(g.total), c22, c12, qv(g.total), minv(g.total), diag(g.total);
  if (sdim == 2) {
    c22.resize(g.total);
    c12.resize(g.total);
  }
  {
    Mat bv{};
    std::size_t id = 0;
    const int n1 = (sdim == 2) ? g.nodes : 1;
    for (int i0 = 0; i0 < g.nodes; ++i0)
      for (int i1 = 0; i1 < n1; ++i1, ++id) {
        Vec y{};
        const double z0 = zcoord(g, R, i0);
        const double z1 = (sdim == 2) ? zcoord(g, R, i1) : 0.0;
        for (int c = 0; c < d; ++c) {
          y[c] = (x_shift[c] + z0 * chart.Q[0][c] + (sdim == 2 ? z1 * chart.Q[1][c] : 0.0)) /
                 theta;
          y[c] -= std::floor(y[c]);
        }
        op.b(y, bv);
        const double mv = op.m(y);
        c11[id] = quad_form(d, bv, chart.Q[0]);
        if (sdim == 2) {
          c22[id] = quad_form(d, bv, chart.Q[1]);
          double cross = 0;
          for (int r = 0; r < d; ++r)
            for (int cc = 0; cc < d; ++cc)
              cross += chart.Q[0][r] * at(bv, r, cc) * chart.Q[1][cc];
          c12[id] = cross;
        }
        minv[id] = 1.0 / mv;
        qv[id] = trace_prod(d, bv, Xt) * minv[id] + mu;
        diag[id] = (2 * c11[id] + (sdim == 2 ? 2 * c22[id] : 0.0)) / (g.h * g.h) * minv[id];
      }
  }

  std::vector<double> u(g.total, 0.0);
  const double omega = 1.5;
  const double h2 = g.h * g.h;
  const bool sub = (kind == ObstacleKind::subsolution);

  const std::size_t interior =
      (sdim == 1) ? static_cast<std::size_t>(g.M - 1)
                  : static_cast<std::size_t>(g.M - 1) * static_cast<std::size_t>(g.M - 1);
  const std::size_t cap =
      std::max<std::size_t>(20000, static_cast<std::size_t>(1e6 / std::max<std::size_t>(1, interior)) + 1);

  const auto idx = [&](int i0, int i1) {
    return (sdim == 1) ? static_cast<std::size_t>(i0)
                       : static_cast<std::size_t>(i0) * g.nodes + i1;
  };

  // residual q - Au at an interior node with the current iterate
  const auto residual_at = [&](int i0, int i1) {
    const std::size_t id = idx(i0, i1);
    double lap;
    if (sdim == 1) {
      lap = c11[id] * (u[id + 1] - 2 * u[id] + u[id - 1]) / h2;
    } else {
      const double dxx = (u[idx(i0 + 1, i1)] - 2 * u[id] + u[idx(i0 - 1, i1)]) / h2;
      const double dyy = (u[idx(i0, i1 + 1)] - 2 * u[id] + u[idx(i0, i1 - 1)]) / h2;
      const double dxy = (u[idx(i0 + 1, i1 + 1)] - u[idx(i0 + 1, i1 - 1)] -
                          u[idx(i0 - 1, i1 + 1)] + u[idx(i0 - 1, i1 - 1)]) /
                         (4 * h2);
      lap = c11[id] * dxx + c22[id] * dyy + 2 * c12[id] * dxy;
    }
    return qv[id] + lap * minv[id]; // q - Au, Au = -lap/m
  };

  std::size_t sweep = 0;
  bool update_ok = false;
  for (; sweep < cap; ++sweep) {
    double max_update = 0;
    if (sdim == 1) {
      for (int i0 = 1; i0 < g.M; ++i0) {
        const std::size_t id = idx(i0, 0);
        const double r = residual_at(i0, 0);
        double v = u[id] + omega * r / diag[id];
        v = sub ? std::min(0.0, v) : std::max(0.0, v);
        max_update = std::max(max_update, std::abs(v - u[id]));
        u[id] = v;
      }
    } else {
      for (int i0 = 1; i0 < g.M; ++i0)
        for (int i1 = 1; i1 < g.M; ++i1) {
          const std::size_t id = idx(i0, i1);
          const double r = residual_at(i0, i1);
          double v = u[id] + omega * r / diag[id];
          v = sub ? std::min(0.0, v) : std::max(0.0, v);
          max_update = std::max(max_update, std::abs(v - u[id]));
          u[id] = v;
        }
    }
    if (max_update <= 1e-10) {
      update_ok = true;
      // the update threshold alone leaves residual ~ update * diag; keep
      // sweeping until the complementarity residual itself is small
      double worst = 0;
      const int n1 = (sdim == 2) ? g.M : 1;
      for (int i0 = 1; i0 < g.M; ++i0)
        for (int i1 = (sdim == 2) ? 1 : 0; i1 < n1; ++i1) {
          const std::size_t id = idx(i0, i1);
          const double r = residual_at(i0, i1);
          if (u[id] == 0.0) {
            worst = std::max(worst, sub ? std::max(0.0, -r) : std::max(0.0, r));
          } else {
            worst = std::max(worst, std::abs(r));
          }
        }
      if (worst <= 1e-9) break;
    }
  }
  if (sweep >= cap && !update_ok)
    throw NotConverged("solve_obstacle: sweep cap exhausted");

  ObstacleSolution sol;
  sol.kind = kind;
  sol.e = op.e;
  sol.X = X;
  sol.mu = mu;
  sol.R = R;
  sol.theta = theta;
  sol.x_shift = x_shift;
  sol.sweeps = static_cast<int>(sweep);

  sol.u.domain = GridDomain::box;
  sol.u.dims.assign(sdim, g.nodes);
  sol.u.h.assign(sdim, g.h);
  sol.u.v = u;

  double scale = 0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  const double thr = 1e-12 * std::max(1.0, scale);
  sol.contact_mask.resize(g.total);
  for (std::size_t i = 0; i < g.total; ++i)
    sol.contact_mask[i] = std::abs(u[i]) <= thr ? 1 : 0;

  // a cell is in contact when every corner node is
  std::size_t contact_cells = 0;
  if (sdim == 1) {
    for (int i0 = 0; i0 < g.M; ++i0)
      if (sol.contact_mask[i0] && sol.contact_mask[i0 + 1]) ++contact_cells;
  } else {
    for (int i0 = 0; i0 < g.M; ++i0)
      for (int i1 = 0; i1 < g.M; ++i1)
        if (sol.contact_mask[idx(i0, i1)] && sol.contact_mask[idx(i0 + 1, i1)] &&
            sol.contact_mask[idx(i0, i1 + 1)] && sol.contact_mask[idx(i0 + 1, i1 + 1)])
          ++contact_cells;
  }
  double cellvol = 1;
  for (int a = 0; a < sdim; ++a) cellvol *= g.h;
  double cubevol = 1;
  for (int a = 0; a < sdim; ++a) cubevol *= R;
  sol.density = cellvol * static_cast<double>(contact_cells) / cubevol;

  double worst = 0;
  const int n1 = (sdim == 2) ? g.M : 1;
  for (int i0 = 1; i0 < g.M; ++i0)
    for (int i1 = (sdim == 2) ? 1 : 0; i1 < n1; ++i1) {
      const std::size_t id = idx(i0, i1);
      const double r = residual_at(i0, i1);
      if (sol.contact_mask[id]) {
        worst = std::max(worst, sub ? std::max(0.0, -r) : std::max(0.0, r));
      } else {
        worst = std::max(worst, std::abs(r));
      }
    }
  sol.comp_residual = worst;
  return sol;
}

std::vector<Vec> default_obstacle_shifts(const SliceChart& chart, double theta) {
  const int d = chart.e.d;
  Vec period{};
  for (int a = 0; a < chart.sdim; ++a)
    for (int c = 0; c < d; ++c) period[c] += theta * static_cast<double>(chart.B[a][c]);
  std::vector<Vec> shifts;
  for (int j = 0; j < 4; ++j) {
    Vec s{};
    for (int c = 0; c < d; ++c) s[c] = period[c] * (0.25 * j);
    shifts.push_back(s);
  }
  return shifts;
}

namespace {

double shift_density(const ProjectedOperator& op, ObstacleKind kind, const Mat& X, double mu,
                     double R, double theta, const std::vector<Vec>& shifts, int M) {
  double acc = 0;
  for (const Vec& x : shifts) acc += solve_obstacle(op, kind, X, mu, R, x, theta, M).density;
  return acc / static_cast<double>(shifts.size());
}

} // namespace

CriticalMu critical_mu(const ProjectedOperator& op, const Mat& X, double R, double theta,
                       const std::vector<Vec>& shifts, double tol, int M) {
  if (!(tol > 0)) throw Error("critical_mu: tol must be positive");
  if (shifts.empty()) throw Error("critical_mu: need at least one shift");
  const int d = op.e.d;
  const double span0 = op.field->Lambda * sym_op_norm(d, X) / op.field->m_min + 1.0;
  const double dthr = 1e-3;

  CriticalMu out;

  // subsolution: density 0 below the transition, 1 above
  {
    double lo = -span0, hi = span0, span = span0;
    int guard = 0;
    while (shift_density(op, ObstacleKind::subsolution, X, lo, R, theta, shifts, M) > dthr) {
      if (++guard > 60) throw Error("critical_mu: no subsolution lower bracket");
      lo -= span;
      span *= 2;
    }
    span = span0;
    guard = 0;
    while (shift_density(op, ObstacleKind::subsolution, X, hi, R, theta, shifts, M) <= dthr) {
      if (++guard > 60) throw Error("critical_mu: no subsolution upper bracket");
      hi += span;
      span *= 2;
    }
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (shift_density(op, ObstacleKind::subsolution, X, mid, R, theta, shifts, M) > dthr)
        hi = mid;
      else
        lo = mid;
    }
    out.sub_lo = lo;
    out.sub_hi = hi;
  }

  // supersolution: density 1 below the transition, 0 above
  {
    double lo = -span0, hi = span0, span = span0;
    int guard = 0;
    while (shift_density(op, ObstacleKind::supersolution, X, lo, R, theta, shifts, M) <= dthr) {
      if (++guard > 60) throw Error("critical_mu: no supersolution lower bracket");
      lo -= span;
      span *= 2;
    }
    span = span0;
    guard = 0;
    while (shift_density(op, ObstacleKind::supersolution, X, hi, R, theta, shifts, M) > dthr) {
      if (++guard > 60) throw Error("critical_mu: no supersolution upper bracket");
      hi += span;
      span *= 2;
    }
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (shift_density(op, ObstacleKind::supersolution, X, mid, R, theta, shifts, M) <= dthr)
        hi = mid;
      else
        lo = mid;
    }
    out.super_lo = lo;
    out.super_hi = hi;
  }

  const double ilo = std::max(out.sub_lo, out.super_lo);
  const double ihi = std::min(out.sub_hi, out.super_hi);
  if (ilo - ihi > 3 * tol)
    throw BracketsDisagree("critical_mu: sub- and supersolution brackets are disjoint");
  out.mu_hat = 0.5 * (ilo + ihi);
  log_debug("obstacle mu_hat " + std::to_string(out.mu_hat));
  return out;
}

void write_mask_pbm(const ObstacleSolution& sol, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw Error("write_mask_pbm: cannot open " + path);
  const int sdim = static_cast<int>(sol.u.dims.size());
  const int w = sol.u.dims[sdim == 1 ? 0 : 1];
  const int hgt = (sdim == 1) ? 1 : sol.u.dims[0];
  std::fprintf(fp, "P1\n%d %d\n", w, hgt);
  for (int row = 0; row < hgt; ++row) {
    for (int col = 0; col < w; ++col) {
      const std::size_t id = (sdim == 1) ? static_cast<std::size_t>(col)
                                         : static_cast<std::size_t>(row) * w + col;
      std::fprintf(fp, col + 1 == w ? "%d" : "%d ", sol.contact_mask[id] ? 1 : 0);
    }
    std::fputc('\n', fp);
  }
  std::fclose(fp);
}

} // namespace homog
