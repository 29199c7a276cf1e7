#include <cmath>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "homog/cellsolve.hpp"
#include "homog/coeffs.hpp"
#include "homog/errors.hpp"

using namespace homog;

namespace {

CoefficientField harmonic_fixture() {
  FieldParams p;
  p.a_base = 2;
  p.a_scalar_terms.push_back({IVec{1, 0, 0}, 1.0, 0.0});
  return builtin_field("isotropic-trig", 2, p);
}

CoefficientField unit_field_with_m(std::vector<ScalarTerm> terms, int d) {
  FieldParams p;
  p.m_terms = std::move(terms);
  return builtin_field("constant", d, p);
}

const double kGolden = 1.6180339887498949;

} // namespace

TEST_CASE("penalized solve on constant coefficients is the constant solution") {
  FieldParams p;
  p.m0 = 2.0;
  const CoefficientField f = builtin_field("constant", 2, p);
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const ProjectedOperator op = project_A(f, e);
  Mat X{};
  at(X, 0, 0) = 0.7;
  const double delta = 0.31;
  const Corrector cor = solve_penalized(op, X, delta, 16);
  // delta m V = tr(b X) with b = diag(1, 0): V = 0.7 / (delta * 2)
  const double want = 0.7 / (delta * 2.0);
  for (double v : cor.V.v) CHECK(v == doctest::Approx(want).epsilon(1e-10));
  CHECK(cor.residual_inf <= 1e-9);
}

TEST_CASE("penalized solve obeys the maximum principle bound") {
  const CoefficientField f = harmonic_fixture();
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const ProjectedOperator op = project_A(f, e);
  Mat X{};
  at(X, 0, 0) = 1.0;
  const double delta = 0.1;
  const Corrector cor = solve_penalized(op, X, delta, 32);
  double rhs_max = 0;
  for (int j = 0; j < 32; ++j)
    rhs_max = std::max(rhs_max, std::abs(3.0)); // |tr(bX)| <= 3
  for (double v : cor.V.v) CHECK(std::abs(delta * v) <= rhs_max / f.m_min + 1e-9);
}

TEST_CASE("slice cell solve matches the discrete Fourier solution") {
  // -c W'' = f - mean with c = 1: single cosine diagonalizes the stencil
  FieldParams p;
  const CoefficientField f = builtin_field("constant", 2, p);
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const SliceChart chart = slice_lattice_basis(e);
  const ProjectedOperator op = project_A(f, e);
  const auto rhs = [](const Vec& y) { return std::cos(2 * M_PI * y[0]); };
  for (int M : {32, 64}) {
    const SliceCellSolution sol = solve_slice_cell(op, chart, 0.0, rhs, M);
    CHECK(std::abs(sol.f_perp) <= 1e-12);
    const double h = 1.0 / M;
    const double omega2 = 2.0 * (1.0 - std::cos(2 * M_PI * h)) / (h * h);
    for (int j = 0; j < M; ++j) {
      const double want = (std::cos(2 * M_PI * j * h) - 1.0) / omega2; // gauge W(0) = 0
      CHECK(sol.W.v[j] == doctest::Approx(want).epsilon(1e-8));
    }
    CHECK(sol.residual_inf <= 1e-9);
  }
}

TEST_CASE("slice cell solution converges at second order") {
  const CoefficientField f = builtin_field("constant", 2, FieldParams{});
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const SliceChart chart = slice_lattice_basis(e);
  const ProjectedOperator op = project_A(f, e);
  const auto rhs = [](const Vec& y) { return std::cos(2 * M_PI * y[0]); };
  double err[2];
  const int Ms[2] = {32, 64};
  for (int i = 0; i < 2; ++i) {
    const int M = Ms[i];
    const SliceCellSolution sol = solve_slice_cell(op, chart, 0.0, rhs, M);
    double worst = 0;
    for (int j = 0; j < M; ++j) {
      const double want = (std::cos(2 * M_PI * j / double(M)) - 1.0) / (4 * M_PI * M_PI);
      worst = std::max(worst, std::abs(sol.W.v[j] - want));
    }
    err[i] = worst;
  }
  CHECK(err[0] / err[1] >= 3.5);
  CHECK(err[0] / err[1] <= 4.5);
}

TEST_CASE("incompatible slice data is rejected") {
  const CoefficientField f = builtin_field("constant", 2, FieldParams{});
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const SliceChart chart = slice_lattice_basis(e);
  const ProjectedOperator op = project_A(f, e);
  const auto rhs = [](const Vec& y) { return std::cos(2 * M_PI * y[0]); };
  const double wrong = 0.25;
  CHECK_THROWS_AS(solve_slice_cell(op, chart, 0.0, rhs, 32, &wrong), CompatibilityViolation);
}

TEST_CASE("extrapolated slice limit is exact for constant coefficients") {
  FieldParams p;
  p.m0 = 2.0;
  const CoefficientField f = builtin_field("constant", 2, p);
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const ProjectedOperator op = project_A(f, e);
  Mat X{};
  at(X, 0, 0) = 0.8;
  const OscillatingProfile prof = extract_Fperp(op, X, {0.4, 0.2, 0.1}, 16);
  // delta V = tr(bX)/m at every delta, so the limit is exact
  for (double v : prof.scalars) CHECK(v == doctest::Approx(0.8 / 2.0).epsilon(1e-9));
  CHECK(prof.err <= 1e-9);
}

TEST_CASE("extrapolated slice limit reproduces the harmonic mean") {
  const CoefficientField f = harmonic_fixture();
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const ProjectedOperator op = project_A(f, e);
  Mat X{};
  at(X, 0, 0) = 1.0; // e-perp rank one
  const OscillatingProfile prof = extract_Fperp(op, X, {0.64, 0.32, 0.16, 0.08}, 32, 2);
  double mean = 0;
  for (double v : prof.scalars) mean += v;
  mean /= double(prof.scalars.size());
  CHECK(mean == doctest::Approx(std::sqrt(3.0)).epsilon(5e-3));
}

TEST_CASE("fourier corrector inverts a single mode exactly") {
  std::vector<ScalarTerm> terms{{IVec{1, 0, 0}, 0.5, 0.0}};
  const CoefficientField f = unit_field_with_m(terms, 2);
  const Direction e = irrational_direction(2, Vec{1, kGolden, 0});
  const int N = 32;
  const Corrector cor = fourier_corrector(f, e, 8, N);
  const Vec k{1, 0, 0};
  const double kp2 = 1.0 - std::pow(dot(2, k, e.e), 2); // |k - <k,e>e|^2 for unit k
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const double want = -0.5 * std::cos(2 * M_PI * i / double(N)) / (4 * M_PI * M_PI * kp2);
      CHECK(cor.V.v[std::size_t(i) * N + j] == doctest::Approx(want).epsilon(1e-10));
    }
  CHECK(cor.residual_inf <= 1e-8 + cor.tail_bound);
  CHECK(cor.tail_bound == doctest::Approx(0.0));
}

TEST_CASE("fourier corrector flags resonant rational directions") {
  std::vector<ScalarTerm> terms{{IVec{0, 1, 0}, 0.5, 0.0}};
  const CoefficientField f = unit_field_with_m(terms, 2);
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  CHECK_THROWS_AS(fourier_corrector(f, e, 8, 32), SmallDivisor);
}

TEST_CASE("diophantine check on the golden direction") {
  const Direction e = irrational_direction(2, Vec{1, kGolden, 0});
  const DiophantineResult res = diophantine_check(e, 0.3, 1.0, 50);
  CHECK(res.pass);

  // oracle: min of |k2 - golden k1| / sqrt(1 + golden^2) * |k|
  double best = 1e300;
  IVec argmin{};
  for (int k1 = -50; k1 <= 50; ++k1)
    for (int k2 = -50; k2 <= 50; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      const double nk = std::hypot(double(k1), double(k2));
      if (nk > 50.0) continue;
      const double perp = std::abs(k2 - kGolden * k1) / std::sqrt(1 + kGolden * kGolden);
      const double val = perp * nk;
      if (val < best) {
        best = val;
        argmin = IVec{k1, k2, 0};
      }
    }
  CHECK(res.worst_value == doctest::Approx(best).epsilon(1e-10));
  CHECK(best >= 0.3);
  CHECK((res.worst_k == argmin || (res.worst_k[0] == -argmin[0] && res.worst_k[1] == -argmin[1])));
}

TEST_CASE("diophantine check fails on rational directions") {
  const Direction e = primitive_direction(2, IVec{1, 2, 0});
  const DiophantineResult res = diophantine_check(e, 0.3, 1.0, 50);
  CHECK_FALSE(res.pass);
  CHECK(res.worst_value <= 1e-12);
}

TEST_CASE("oscillating corrector vanishes when slices carry no oscillation") {
  // m depends on <y, e> only, so each slice sees constant data
  std::vector<ScalarTerm> terms{{IVec{0, 1, 0}, 0.5, 0.0}};
  const CoefficientField f = unit_field_with_m(terms, 2);
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const OscillatingCorrector oc = oscillating_corrector(f, e, 8, 16);
  for (double w : oc.W) CHECK(std::abs(w) <= 1e-10);
  for (int i = 0; i < oc.S; ++i) {
    const double s = e.r * i / oc.S;
    CHECK(oc.m_perp[i] == doctest::Approx(1.0 + 0.5 * std::cos(2 * M_PI * s)).epsilon(1e-10));
  }
  CHECK(oc.m_pl == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("oscillating corrector slices are gauged to mean zero") {
  std::vector<ScalarTerm> terms{{IVec{1, 0, 0}, 0.4, 0.0}, {IVec{0, 1, 0}, 0.2, 0.0}};
  const CoefficientField f = unit_field_with_m(terms, 2);
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const OscillatingCorrector oc = oscillating_corrector(f, e, 6, 32);
  REQUIRE(int(oc.W.size()) == 6 * 32);
  for (int i = 0; i < 6; ++i) {
    double mean = 0;
    for (int j = 0; j < 32; ++j) mean += oc.W[std::size_t(i) * 32 + j];
    CHECK(std::abs(mean / 32) <= 1e-10);
  }
  CHECK(oc.residual_inf <= 1e-8);
}

TEST_CASE("grid blocks roundtrip through the binary format") {
  GridFunction g;
  g.domain = GridDomain::torus;
  g.dims = {4, 3};
  g.h = {0.25, 1.0 / 3};
  g.v.resize(12);
  for (int i = 0; i < 12; ++i) g.v[i] = std::sin(i * 0.7) * 1e-3;
  const std::string path = "/tmp/homog_grid_test.bin";
  write_grid_binary(g, path);
  const GridFunction back = read_grid_binary(path);
  REQUIRE(back.dims == g.dims);
  REQUIRE(back.h.size() == g.h.size());
  for (std::size_t i = 0; i < g.v.size(); ++i) CHECK(back.v[i] == g.v[i]);
  std::remove(path.c_str());
}
