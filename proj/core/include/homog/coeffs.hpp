#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "homog/lattice.hpp"
#include "homog/linalg.hpp"

namespace homog {

/// Matrix-valued trigonometric term amp * cos(2 pi <k,y> + phase) * mat.
struct TrigTerm {
  IVec k{};
  double amp = 0;
  double phase = 0;
  Mat mat{};
};

/// Scalar trigonometric term amp * cos(2 pi <k,y> + phase).
struct ScalarTerm {
  IVec k{};
  double amp = 0;
  double phase = 0;
};

/// Periodic diffusion tensor a(y,e) and mobility m(y,e) with declared
/// ellipticity bounds. Built-in families are finite trigonometric sums; user
/// fields plug in through the custom evaluators and must declare their own
/// bounds.
struct CoefficientField {
  int d = 2;
  std::string family = "constant";

  Mat a0{};
  std::vector<TrigTerm> a_terms;

  double m0 = 1;
  std::vector<ScalarTerm> m_terms;
  Vec m_edir{};
  double m_ecoef = 0; // m scaled by (1 + m_ecoef * <m_edir, e>)

  double lambda = 1;
  double Lambda = 1;
  double m_min = 1;

  std::function<void(const Vec&, const Vec&, Mat&)> a_custom;
  std::function<double(const Vec&, const Vec&)> m_custom;

  bool a_constant_in_y() const { return !a_custom && a_terms.empty(); }
  bool m_constant_in_y() const { return !m_custom && m_terms.empty(); }

  void a(const Vec& y, const Vec& e, Mat& out) const;
  double m(const Vec& y, const Vec& e) const;
};

/// Parameters accepted by builtin_field. Unused members are ignored by the
/// family being built.
struct FieldParams {
  bool has_a0 = false;
  Mat a0{};
  double a_base = 1;
  std::vector<ScalarTerm> a_scalar_terms; // isotropic-trig
  std::vector<TrigTerm> a_terms;          // laminar, anisotropic-trig
  double m0 = 1;
  std::vector<ScalarTerm> m_terms;
  Vec m_edir{};
  double m_ecoef = 0;
};

/// Families: constant, isotropic-trig, laminar, anisotropic-trig.
/// Throws UnknownFamily for anything else and EllipticityViolation when the
/// assembled bounds fail lambda > 0 or m_min > 0.
CoefficientField builtin_field(const std::string& family, int d, const FieldParams& p);

/// X projected onto the plane orthogonal to e: (I - ee^T) X (I - ee^T).
Mat project_matrix(int d, const Mat& X, const Vec& e);

/// The operator data entering every cell problem for a fixed direction:
/// b(y) = (I - ee^T) a(y,e) (I - ee^T) and m_e(y) = m(y,e).
struct ProjectedOperator {
  const CoefficientField* field = nullptr;
  Direction e;

  void b(const Vec& y, Mat& out) const;
  double m(const Vec& y) const;
  double tr_bX(const Vec& y, const Mat& X) const;
  bool constant_in_y() const { return field->a_constant_in_y() && field->m_constant_in_y(); }
};

ProjectedOperator project_A(const CoefficientField& f, const Direction& e);

struct EllipticityEstimate {
  double lambda_hat = 0;
  double Lambda_hat = 0;
  double m_min_hat = 0;
};

/// Monte Carlo sweep over (y, e) samples checking the declared bounds and the
/// symmetry of a. Throws EllipticityViolation when a sample falls outside
/// the declared range by more than 1e-9.
EllipticityEstimate verify_ellipticity(const CoefficientField& f, int n_samples,
                                       std::uint64_t seed);

} // namespace homog
