#include "homog/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace homog {

namespace {

void check_dim(int d, const char* who) {
  if (d != 2 && d != 3) throw Error(std::string(who) + ": dimension must be 2 or 3");
}

std::int64_t ivec_norm2(int d, const IVec& v) {
  std::int64_t s = 0;
  for (int i = 0; i < d; ++i) s += v[i] * v[i];
  return s;
}

// Sign convention: first nonzero entry positive.
IVec sign_fixed(int d, IVec v) {
  for (int i = 0; i < d; ++i) {
    if (v[i] != 0) {
      if (v[i] < 0)
        for (int j = 0; j < d; ++j) v[j] = -v[j];
      break;
    }
  }
  return v;
}

bool lex_less(int d, const IVec& a, const IVec& b) {
  for (int i = 0; i < d; ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

// Extended gcd: returns g = gcd(a,b) and x,y with a x + b y = g.
std::int64_t egcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
  if (b == 0) {
    x = (a >= 0) ? 1 : -1;
    y = 0;
    return std::abs(a);
  }
  std::int64_t x1, y1;
  std::int64_t g = egcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

} // namespace

Direction primitive_direction(int d, const IVec& k) {
  check_dim(d, "primitive_direction");
  std::int64_t g = 0;
  for (int i = 0; i < d; ++i) g = std::gcd(g, std::abs(k[i]));
  if (g == 0) throw ZeroVector("primitive_direction: k = 0");
  Direction dir;
  dir.d = d;
  dir.rational = true;
  for (int i = 0; i < d; ++i) dir.k[i] = k[i] / g;
  double nk = inorm(d, dir.k);
  for (int i = 0; i < d; ++i) dir.e[i] = double(dir.k[i]) / nk;
  dir.r = 1.0 / nk;
  return dir;
}

Direction irrational_direction(int d, const Vec& v) {
  check_dim(d, "irrational_direction");
  double n = norm(d, v);
  if (n < 1e-14) throw ZeroVector("irrational_direction: v = 0");
  Direction dir;
  dir.d = d;
  dir.rational = false;
  for (int i = 0; i < d; ++i) dir.e[i] = v[i] / n;
  dir.r = 0;
  return dir;
}

SliceChart slice_lattice_basis(const Direction& e) {
  if (!e.rational) throw Error("slice_lattice_basis: direction must be rational");
  const int d = e.d;
  SliceChart chart;
  chart.e = e;
  chart.sdim = d - 1;

  if (d == 2) {
    chart.B[0] = sign_fixed(2, IVec{-e.k[1], e.k[0], 0});
  } else {
    // Unimodular column elimination of k^T. The columns of U that map to the
    // zero entries of w = k U span the kernel lattice.
    IVec w = e.k;
    std::array<IVec, 3> U = {IVec{1, 0, 0}, IVec{0, 1, 0}, IVec{0, 0, 1}};
    auto nonzeros = [&]() {
      int c = 0;
      for (int i = 0; i < 3; ++i)
        if (w[i] != 0) ++c;
      return c;
    };
    while (nonzeros() > 1) {
      int p = -1;
      for (int i = 0; i < 3; ++i)
        if (w[i] != 0 && (p < 0 || std::abs(w[i]) < std::abs(w[p]))) p = i;
      for (int q = 0; q < 3; ++q) {
        if (q == p || w[q] == 0) continue;
        std::int64_t t = w[q] / w[p];
        w[q] -= t * w[p];
        for (int r = 0; r < 3; ++r) U[q][r] -= t * U[p][r];
      }
    }
    int p = 0;
    while (w[p] == 0) ++p;
    int out = 0;
    std::array<IVec, 2> ker{};
    for (int q = 0; q < 3; ++q)
      if (q != p) ker[out++] = U[q];

    // Lagrange reduction of the pair, accepting only strict decreases.
    IVec b1 = ker[0], b2 = ker[1];
    for (;;) {
      if (ivec_norm2(3, b2) < ivec_norm2(3, b1)) std::swap(b1, b2);
      double mu = idot(3, b1, b2) / double(ivec_norm2(3, b1));
      std::int64_t m = std::llround(mu);
      if (m == 0) break;
      IVec cand{b2[0] - m * b1[0], b2[1] - m * b1[1], b2[2] - m * b1[2]};
      if (ivec_norm2(3, cand) >= ivec_norm2(3, b2)) break;
      b2 = cand;
    }
    b1 = sign_fixed(3, b1);
    b2 = sign_fixed(3, b2);
    std::int64_t n1 = ivec_norm2(3, b1), n2 = ivec_norm2(3, b2);
    if (n2 < n1 || (n2 == n1 && lex_less(3, b2, b1))) std::swap(b1, b2);
    chart.B[0] = b1;
    chart.B[1] = b2;
  }
  for (int j = 0; j < chart.sdim; ++j) chart.B[j] = sign_fixed(d, chart.B[j]);

  // Gram matrix and dual basis.
  for (int i = 0; i < chart.sdim; ++i)
    for (int j = 0; j < chart.sdim; ++j) at(chart.G, i, j) = idot(d, chart.B[i], chart.B[j]);
  if (chart.sdim == 1) {
    at(chart.Ginv, 0, 0) = 1.0 / at(chart.G, 0, 0);
  } else {
    double det = at(chart.G, 0, 0) * at(chart.G, 1, 1) - at(chart.G, 0, 1) * at(chart.G, 1, 0);
    at(chart.Ginv, 0, 0) = at(chart.G, 1, 1) / det;
    at(chart.Ginv, 1, 1) = at(chart.G, 0, 0) / det;
    at(chart.Ginv, 0, 1) = -at(chart.G, 0, 1) / det;
    at(chart.Ginv, 1, 0) = -at(chart.G, 1, 0) / det;
  }
  for (int j = 0; j < chart.sdim; ++j) {
    Vec p{};
    for (int i = 0; i < chart.sdim; ++i) {
      Vec bi = to_vec(d, chart.B[i]);
      for (int r = 0; r < d; ++r) p[r] += bi[r] * at(chart.Ginv, i, j);
    }
    chart.P[j] = p;
  }

  // Gram-Schmidt chart for metric-true coordinates.
  Vec q0 = to_vec(d, chart.B[0]);
  double n0 = norm(d, q0);
  for (int i = 0; i < d; ++i) q0[i] /= n0;
  chart.Q[0] = q0;
  if (chart.sdim == 2) {
    Vec q1 = to_vec(d, chart.B[1]);
    double proj = dot(d, q1, q0);
    for (int i = 0; i < d; ++i) q1[i] -= proj * q0[i];
    double n1 = norm(d, q1);
    for (int i = 0; i < d; ++i) q1[i] /= n1;
    chart.Q[1] = q1;
  }
  return chart;
}

Vec slice_point(const SliceChart& chart, double s, const double* t) {
  const int d = chart.e.d;
  Vec y = scaled(d, chart.e.e, s);
  for (int j = 0; j < chart.sdim; ++j)
    for (int i = 0; i < d; ++i) y[i] += t[j] * double(chart.B[j][i]);
  return y;
}

std::array<double, 2> slice_monodromy(const SliceChart& chart) {
  const int d = chart.e.d;
  const IVec& k = chart.e.k;
  // l in Z^d with <l,k> = 1 by running the extended gcd across entries.
  IVec l{};
  std::int64_t g = 0;
  for (int i = 0; i < d; ++i) {
    if (k[i] == 0) continue;
    if (g == 0) {
      g = std::abs(k[i]);
      l[i] = (k[i] > 0) ? 1 : -1;
    } else {
      std::int64_t x, y;
      std::int64_t gn = egcd(g, k[i], x, y);
      for (int j = 0; j < d; ++j) l[j] *= x;
      l[i] += y;
      g = gn;
    }
  }
  Vec lperp = to_vec(d, l);
  double le = dot(d, lperp, chart.e.e);
  for (int i = 0; i < d; ++i) lperp[i] -= le * chart.e.e[i];
  std::array<double, 2> tau{};
  for (int j = 0; j < chart.sdim; ++j) tau[j] = dot(d, chart.P[j], lperp);
  return tau;
}

ApproachSpec approach_sequence(const Direction& e, const Vec& eta_in, int depth) {
  if (!e.rational) throw Error("approach_sequence: base direction must be rational");
  if (depth < 1) throw Error("approach_sequence: depth must be >= 1");
  const int d = e.d;
  double neta = norm(d, eta_in);
  if (neta < 1e-14) throw ZeroVector("approach_sequence: eta = 0");
  Vec eta = scaled(d, eta_in, 1.0 / neta);
  if (std::abs(dot(d, eta, e.e)) > 1e-10)
    throw Error("approach_sequence: eta must be orthogonal to e");

  SliceChart chart = slice_lattice_basis(e);
  const double angle_tol = 1e-3;
  const double norm_cap = 1e4;

  IVec best{};
  double best_norm = -1;
  if (chart.sdim == 1) {
    Vec b = to_vec(d, chart.B[0]);
    double c = dot(d, b, eta) / norm(d, b);
    if (c > std::cos(angle_tol)) {
      best = chart.B[0];
    } else if (-c > std::cos(angle_tol)) {
      for (int i = 0; i < d; ++i) best[i] = -chart.B[0][i];
    } else {
      throw EtaNotRepresentable("approach_sequence: eta not aligned with the slice lattice");
    }
    best_norm = norm(d, b);
  } else {
    // Exhaustive shell search over integer chart coordinates. |v| grows at
    // least like sigma_min |z|, so the scan can stop once further shells
    // cannot beat the best candidate.
    double sigma_min = std::sqrt(sym_eig_bounds(2, chart.G).first);
    double cos_tol = std::cos(angle_tol);
    for (std::int64_t zmax = 1; zmax <= 20000; zmax *= 2) {
      for (std::int64_t z1 = -zmax; z1 <= zmax; ++z1) {
        for (std::int64_t z2 = -zmax; z2 <= zmax; ++z2) {
          if (z1 == 0 && z2 == 0) continue;
          if (std::max(std::abs(z1), std::abs(z2)) <= zmax / 2) continue; // previous shells
          IVec v{};
          for (int i = 0; i < d; ++i) v[i] = z1 * chart.B[0][i] + z2 * chart.B[1][i];
          double nv = inorm(d, v);
          if (nv > norm_cap) continue;
          double cosang = (double(v[0]) * eta[0] + double(v[1]) * eta[1] + double(v[2]) * eta[2]) / nv;
          if (cosang < cos_tol) continue;
          if (best_norm < 0 || nv < best_norm ||
              (nv == best_norm && lex_less(d, v, best))) {
            best = v;
            best_norm = nv;
          }
        }
      }
      if (best_norm > 0 && sigma_min * double(zmax + 1) > best_norm) break;
    }
    if (best_norm < 0)
      throw EtaNotRepresentable("approach_sequence: no slice-lattice vector within 1e-3 of eta");
  }

  ApproachSpec spec;
  spec.e = e;
  spec.eta = eta;
  spec.k_eta = best;
  spec.depth = depth;
  double nk = inorm(d, e.k);
  std::int64_t scale = std::max<std::int64_t>(1, std::llround(best_norm / nk));
  for (int n = 1; n <= depth; ++n) {
    std::int64_t mul = (std::int64_t(1) << n) * scale;
    IVec K{};
    for (int i = 0; i < d; ++i) K[i] = mul * e.k[i] - best[i];
    Direction en = primitive_direction(d, K);
    spec.theta.push_back(std::acos(std::clamp(dot(d, en.e, e.e), -1.0, 1.0)));
    spec.sequence.push_back(en);
  }
  return spec;
}

double slice_average(const std::function<double(const Vec&)>& f, const SliceChart& chart,
                     double s, int N) {
  if (N < 2) throw Error("slice_average: N must be >= 2");
  const int d = chart.e.d;
  double sum = 0;
  if (chart.sdim == 1) {
    for (int j = 0; j < N; ++j) {
      double t = double(j) / N;
      Vec y = slice_point(chart, s, &t);
      for (int i = 0; i < d; ++i) y[i] -= std::floor(y[i]);
      sum += f(y);
    }
    return sum / N;
  }
  for (int j1 = 0; j1 < N; ++j1) {
    for (int j2 = 0; j2 < N; ++j2) {
      double t[2] = {double(j1) / N, double(j2) / N};
      Vec y = slice_point(chart, s, t);
      for (int i = 0; i < d; ++i) y[i] -= std::floor(y[i]);
      sum += f(y);
    }
  }
  return sum / (double(N) * N);
}

double slice_average(const std::function<double(const Vec&)>& f, const Direction& e, double s,
                     int N) {
  SliceChart chart = slice_lattice_basis(e);
  return slice_average(f, chart, s, N);
}

} // namespace homog
