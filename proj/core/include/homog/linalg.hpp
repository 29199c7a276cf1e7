#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace homog {

// Ambient dimension is 2 or 3. Fixed-capacity containers keep everything on
// the stack; only the first d entries (d*d for matrices) are meaningful.
inline constexpr int max_dim = 3;

using Vec = std::array<double, 3>;
using IVec = std::array<std::int64_t, 3>;
using Mat = std::array<double, 9>; // row-major with stride 3 for any d

inline double dot(int d, const Vec& a, const Vec& b) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(int d, const Vec& a) { return dot(d, a, a); }
inline double norm(int d, const Vec& a) { return std::sqrt(norm2(d, a)); }

inline Vec scaled(int d, const Vec& a, double c) {
  Vec r{};
  for (int i = 0; i < d; ++i) r[i] = c * a[i];
  return r;
}

inline Vec axpy(int d, const Vec& a, double c, const Vec& b) {
  Vec r{};
  for (int i = 0; i < d; ++i) r[i] = a[i] + c * b[i];
  return r;
}

inline double idot(int d, const IVec& a, const IVec& b) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += double(a[i]) * double(b[i]);
  return s;
}

inline double inorm(int d, const IVec& a) { return std::sqrt(idot(d, a, a)); }

inline Vec to_vec(int d, const IVec& k) {
  Vec r{};
  for (int i = 0; i < d; ++i) r[i] = double(k[i]);
  return r;
}

inline double& at(Mat& m, int i, int j) { return m[i * 3 + j]; }
inline double at(const Mat& m, int i, int j) { return m[i * 3 + j]; }

inline Mat identity(int d) {
  Mat m{};
  for (int i = 0; i < d; ++i) at(m, i, i) = 1.0;
  return m;
}

inline Mat outer(int d, const Vec& a, const Vec& b) {
  Mat m{};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) at(m, i, j) = a[i] * b[j];
  return m;
}

inline Vec mat_vec(int d, const Mat& m, const Vec& x) {
  Vec r{};
  for (int i = 0; i < d; ++i) {
    double s = 0;
    for (int j = 0; j < d; ++j) s += at(m, i, j) * x[j];
    r[i] = s;
  }
  return r;
}

inline Mat mat_mul(int d, const Mat& a, const Mat& b) {
  Mat r{};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0;
      for (int k = 0; k < d; ++k) s += at(a, i, k) * at(b, k, j);
      at(r, i, j) = s;
    }
  return r;
}

inline Mat mat_add(int d, const Mat& a, const Mat& b, double cb = 1.0) {
  Mat r{};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) at(r, i, j) = at(a, i, j) + cb * at(b, i, j);
  return r;
}

inline double quad_form(int d, const Mat& m, const Vec& x) {
  double s = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s += x[i] * at(m, i, j) * x[j];
  return s;
}

inline double trace_prod(int d, const Mat& a, const Mat& b) {
  double s = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s += at(a, i, j) * at(b, j, i);
  return s;
}

/// Extreme eigenvalues of a symmetric d x d matrix, closed form for d <= 3.
inline std::pair<double, double> sym_eig_bounds(int d, const Mat& m) {
  if (d == 1) return {at(m, 0, 0), at(m, 0, 0)};
  if (d == 2) {
    double tr = at(m, 0, 0) + at(m, 1, 1);
    double det = at(m, 0, 0) * at(m, 1, 1) - at(m, 0, 1) * at(m, 1, 0);
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return {tr / 2.0 - disc, tr / 2.0 + disc};
  }
  // d == 3, trigonometric solution of the characteristic polynomial.
  double q = (at(m, 0, 0) + at(m, 1, 1) + at(m, 2, 2)) / 3.0;
  Mat b = m;
  for (int i = 0; i < 3; ++i) at(b, i, i) -= q;
  double p2 = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) p2 += at(b, i, j) * at(b, i, j);
  double p = std::sqrt(p2 / 6.0);
  if (p < 1e-300) return {q, q};
  for (auto& x : b) x /= p;
  double detb = at(b, 0, 0) * (at(b, 1, 1) * at(b, 2, 2) - at(b, 1, 2) * at(b, 2, 1)) -
                at(b, 0, 1) * (at(b, 1, 0) * at(b, 2, 2) - at(b, 1, 2) * at(b, 2, 0)) +
                at(b, 0, 2) * (at(b, 1, 0) * at(b, 2, 1) - at(b, 1, 1) * at(b, 2, 0));
  double r = std::clamp(detb / 2.0, -1.0, 1.0);
  double phi = std::acos(r) / 3.0;
  double lo = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  double hi = q + 2.0 * p * std::cos(phi);
  return {lo, hi};
}

/// Spectral norm of a symmetric matrix.
inline double sym_op_norm(int d, const Mat& m) {
  auto [lo, hi] = sym_eig_bounds(d, m);
  return std::max(std::abs(lo), std::abs(hi));
}

inline double frobenius(int d, const Mat& m) {
  double s = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s += at(m, i, j) * at(m, i, j);
  return std::sqrt(s);
}

} // namespace homog
