#include "homog/coeffs.hpp"

#include <cmath>

#include "homog/rng.hpp"

namespace homog {

void CoefficientField::a(const Vec& y, const Vec& e, Mat& out) const {
  if (a_custom) {
    a_custom(y, e, out);
    return;
  }
  out = a0;
  for (const TrigTerm& t : a_terms) {
    double c = t.amp * std::cos(2.0 * M_PI * dot(d, to_vec(d, t.k), y) + t.phase);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) at(out, i, j) += c * at(t.mat, i, j);
  }
}

double CoefficientField::m(const Vec& y, const Vec& e) const {
  if (m_custom) return m_custom(y, e);
  double v = m0;
  for (const ScalarTerm& t : m_terms)
    v += t.amp * std::cos(2.0 * M_PI * dot(d, to_vec(d, t.k), y) + t.phase);
  if (m_ecoef != 0) v *= 1.0 + m_ecoef * dot(d, m_edir, e);
  return v;
}

CoefficientField builtin_field(const std::string& family, int d, const FieldParams& p) {
  if (d != 2 && d != 3) throw Error("builtin_field: dimension must be 2 or 3");
  CoefficientField f;
  f.d = d;
  f.family = family;

  if (family == "constant") {
    f.a0 = p.has_a0 ? p.a0 : identity(d);
  } else if (family == "isotropic-trig") {
    f.a0 = identity(d);
    for (int i = 0; i < d; ++i) at(f.a0, i, i) = p.a_base;
    for (const ScalarTerm& t : p.a_scalar_terms) {
      TrigTerm mt;
      mt.k = t.k;
      mt.amp = t.amp;
      mt.phase = t.phase;
      mt.mat = identity(d);
      f.a_terms.push_back(mt);
    }
  } else if (family == "laminar" || family == "anisotropic-trig") {
    f.a0 = p.has_a0 ? p.a0 : identity(d);
    f.a_terms = p.a_terms;
  } else {
    throw UnknownFamily("builtin_field: unknown family '" + family + "'");
  }

  f.m0 = p.m0;
  f.m_terms = p.m_terms;
  f.m_edir = p.m_edir;
  f.m_ecoef = p.m_ecoef;

  auto [lo, hi] = sym_eig_bounds(d, f.a0);
  double spread = 0;
  for (const TrigTerm& t : f.a_terms) spread += std::abs(t.amp) * sym_op_norm(d, t.mat);
  f.lambda = lo - spread;
  f.Lambda = hi + spread;

  double m_spread = 0;
  for (const ScalarTerm& t : f.m_terms) m_spread += std::abs(t.amp);
  double e_lo = 1.0, e_hi = 1.0;
  if (f.m_ecoef != 0) {
    double w = std::abs(f.m_ecoef) * norm(d, f.m_edir);
    e_lo = 1.0 - w;
    e_hi = 1.0 + w;
  }
  f.m_min = (f.m0 - m_spread) * e_lo;

  if (f.lambda <= 0)
    throw EllipticityViolation("builtin_field: assembled a is not uniformly elliptic");
  if (f.m_min <= 0) throw EllipticityViolation("builtin_field: mobility is not uniformly positive");
  (void)e_hi;
  return f;
}

Mat project_matrix(int d, const Mat& X, const Vec& e) {
  // (I - ee^T) X (I - ee^T)
  Vec Xe = mat_vec(d, X, e);
  double eXe = dot(d, e, Xe);
  Mat out = X;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      at(out, i, j) += -e[i] * Xe[j] - Xe[i] * e[j] + eXe * e[i] * e[j];
  return out;
}

void ProjectedOperator::b(const Vec& y, Mat& out) const {
  Mat a;
  field->a(y, e.e, a);
  out = project_matrix(field->d, a, e.e);
}

double ProjectedOperator::m(const Vec& y) const { return field->m(y, e.e); }

double ProjectedOperator::tr_bX(const Vec& y, const Mat& X) const {
  Mat bm;
  b(y, bm);
  return trace_prod(field->d, bm, X);
}

ProjectedOperator project_A(const CoefficientField& f, const Direction& e) {
  if (f.d != e.d) throw Error("project_A: dimension mismatch");
  ProjectedOperator op;
  op.field = &f;
  op.e = e;
  return op;
}

EllipticityEstimate verify_ellipticity(const CoefficientField& f, int n_samples,
                                       std::uint64_t seed) {
  if (n_samples < 1) throw Error("verify_ellipticity: n_samples must be >= 1");
  Rng rng(seed);
  const int d = f.d;
  EllipticityEstimate est;
  est.lambda_hat = 1e300;
  est.Lambda_hat = -1e300;
  est.m_min_hat = 1e300;
  Mat a;
  for (int n = 0; n < n_samples; ++n) {
    Vec y{};
    for (int i = 0; i < d; ++i) y[i] = rng.uniform();
    Vec e{};
    double ne = 0;
    do {
      for (int i = 0; i < d; ++i) e[i] = rng.normal();
      ne = norm(d, e);
    } while (ne < 1e-8);
    for (int i = 0; i < d; ++i) e[i] /= ne;

    f.a(y, e, a);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        if (std::abs(at(a, i, j) - at(a, j, i)) > 1e-12 * (1.0 + std::abs(at(a, i, j))))
          throw EllipticityViolation("verify_ellipticity: a(y,e) is not symmetric");
    auto [lo, hi] = sym_eig_bounds(d, a);
    est.lambda_hat = std::min(est.lambda_hat, lo);
    est.Lambda_hat = std::max(est.Lambda_hat, hi);
    est.m_min_hat = std::min(est.m_min_hat, f.m(y, e));
  }
  if (est.lambda_hat < f.lambda - 1e-9)
    throw EllipticityViolation("verify_ellipticity: sampled eigenvalue below declared lambda");
  if (est.Lambda_hat > f.Lambda + 1e-9)
    throw EllipticityViolation("verify_ellipticity: sampled eigenvalue above declared Lambda");
  if (est.m_min_hat < f.m_min - 1e-9)
    throw EllipticityViolation("verify_ellipticity: sampled mobility below declared m_min");
  return est;
}

} // namespace homog
