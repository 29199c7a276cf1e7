#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "homog/errors.hpp"
#include "homog/lattice.hpp"

using namespace homog;

namespace {

std::int64_t gcd3(std::int64_t a, std::int64_t b, std::int64_t c) {
  return std::gcd(std::gcd(std::abs(a), std::abs(b)), std::abs(c));
}

// all primitive integer vectors with |k|_inf <= box, first nonzero positive
std::vector<IVec> primitive_box(int d, int box) {
  std::vector<IVec> out;
  const int zlo = (d == 3) ? -box : 0, zhi = (d == 3) ? box : 0;
  for (int i = -box; i <= box; ++i)
    for (int j = -box; j <= box; ++j)
      for (int z = zlo; z <= zhi; ++z) {
        IVec k{i, j, z};
        if (gcd3(i, j, z) != 1) continue;
        int lead = 0;
        for (int c = 0; c < d; ++c)
          if (k[c] != 0) {
            lead = (k[c] > 0) ? 1 : -1;
            break;
          }
        if (lead != 1) continue;
        out.push_back(k);
      }
  return out;
}

} // namespace

TEST_CASE("primitive_direction reduces to the primitive representative") {
  const Direction e = primitive_direction(2, IVec{2, 4, 0});
  CHECK(e.k[0] == 1);
  CHECK(e.k[1] == 2);
  CHECK(e.r == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-14));
  CHECK(norm(2, e.e) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(primitive_direction(3, IVec{0, 0, 0}), ZeroVector);

  const Direction neg = primitive_direction(2, IVec{-3, 6, 0});
  CHECK(neg.k[0] == -1);
  CHECK(neg.k[1] == 2);
}

TEST_CASE("r_e equals 1 over |k| for every primitive direction in a box") {
  for (int d : {2, 3})
    for (const IVec& k : primitive_box(d, 5)) {
      const Direction e = primitive_direction(d, k);
      CHECK(e.r * inorm(d, k) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("r_e is the smallest positive lattice height along e") {
  // oracle: brute-force min of <l, e> > 0 over |l|_inf <= 10
  for (const IVec& k : {IVec{1, 2, 0}, IVec{3, -1, 0}, IVec{1, 2, 3}, IVec{2, -3, 1}}) {
    const int d = (k[2] == 0) ? 2 : 3;
    const Direction e = primitive_direction(d, k);
    double best = 1e300;
    const int zb = (d == 3) ? 10 : 0;
    for (int i = -10; i <= 10; ++i)
      for (int j = -10; j <= 10; ++j)
        for (int z = -zb; z <= zb; ++z) {
          const double h = i * e.e[0] + j * e.e[1] + z * e.e[2];
          if (h > 1e-12) best = std::min(best, h);
        }
    CHECK(e.r == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("irrational_direction normalizes and flags") {
  const Direction e = irrational_direction(2, Vec{1.0, 1.6180339887498949, 0.0});
  CHECK_FALSE(e.rational);
  CHECK(norm(2, e.e) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(irrational_direction(3, Vec{0, 0, 0}), ZeroVector);
}

TEST_CASE("slice basis spans the integer kernel") {
  for (const IVec& k : primitive_box(3, 3)) {
    const Direction e = primitive_direction(3, k);
    const SliceChart chart = slice_lattice_basis(e);
    REQUIRE(chart.sdim == 2);
    CHECK(idot(3, chart.B[0], k) == 0.0);
    CHECK(idot(3, chart.B[1], k) == 0.0);

    // oracle: every kernel vector in a box is an integer combination
    for (int i = -3; i <= 3; ++i)
      for (int j = -3; j <= 3; ++j)
        for (int z = -3; z <= 3; ++z) {
          if (i * k[0] + j * k[1] + z * k[2] != 0) continue;
          const Vec v{double(i), double(j), double(z)};
          const double al = dot(3, chart.P[0], v);
          const double be = dot(3, chart.P[1], v);
          CHECK(al == doctest::Approx(std::round(al)).epsilon(1e-9));
          CHECK(be == doctest::Approx(std::round(be)).epsilon(1e-9));
          for (int c = 0; c < 3; ++c) {
            const double rec = std::round(al) * chart.B[0][c] + std::round(be) * chart.B[1][c];
            CHECK(rec == doctest::Approx(v[c]).epsilon(1e-9));
          }
        }
  }
}

TEST_CASE("slice basis is reduced, sign-fixed, and ordered") {
  for (const IVec& k : primitive_box(3, 3)) {
    const Direction e = primitive_direction(3, k);
    const SliceChart chart = slice_lattice_basis(e);
    const double n0 = inorm(3, chart.B[0]), n1 = inorm(3, chart.B[1]);
    CHECK(n0 <= n1 + 1e-12);
    const double ip = std::abs(idot(3, chart.B[0], chart.B[1]));
    CHECK(ip <= 0.5 * n0 * n0 + 1e-9); // Lagrange-reduced pair
    for (int a = 0; a < 2; ++a) {
      int lead = 0;
      for (int c = 0; c < 3; ++c)
        if (chart.B[a][c] != 0) {
          lead = chart.B[a][c] > 0 ? 1 : -1;
          break;
        }
      CHECK(lead == 1);
    }
  }
}

TEST_CASE("slice points sit on the requested slice") {
  for (const IVec& k : {IVec{1, 2, 0}, IVec{1, 2, 3}, IVec{0, 0, 1}}) {
    const int d = (k[2] == 0 && k[0] != 0) ? 2 : 3;
    const Direction e = primitive_direction(d, k);
    const SliceChart chart = slice_lattice_basis(e);
    const double t[2] = {0.37, 0.81};
    const Vec y = slice_point(chart, 0.21, t);
    CHECK(dot(d, y, e.e) == doctest::Approx(0.21).epsilon(1e-12));
  }
}

TEST_CASE("monodromy relates the slices at s and s + r") {
  const auto sampler = [](const Vec& y) {
    return std::cos(2 * M_PI * (y[0] + 2 * y[1] - y[2])) +
           0.3 * std::sin(2 * M_PI * (y[1] + y[2]));
  };
  for (const IVec& k : {IVec{1, 2, 3}, IVec{2, -1, 1}, IVec{1, 1, 0}}) {
    const Direction e = primitive_direction(3, k);
    const SliceChart chart = slice_lattice_basis(e);
    const std::array<double, 2> tau = slice_monodromy(chart);
    const double s = 0.13;
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) {
        const double t[2] = {i / 7.0, j / 7.0};
        const double tshift[2] = {t[0] - tau[0], t[1] - tau[1]};
        const double lhs = sampler(slice_point(chart, s + e.r, t));
        const double rhs = sampler(slice_point(chart, s, tshift));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
      }
  }
}

TEST_CASE("approach sequence tilts the axis toward the transversal") {
  const Direction e = primitive_direction(3, IVec{0, 0, 1});
  const ApproachSpec spec = approach_sequence(e, Vec{1, 0, 0}, 4);
  REQUIRE(spec.sequence.size() == 4);
  for (int n = 0; n < 4; ++n) {
    const IVec& kn = spec.sequence[n].k;
    const std::int64_t p = std::int64_t(1) << (n + 1);
    CHECK(kn[0] == -1);
    CHECK(kn[1] == 0);
    CHECK(kn[2] == p);
    if (n > 0) CHECK(spec.theta[n] < spec.theta[n - 1]);
  }
  CHECK(spec.theta[3] < 1e-1);
}

TEST_CASE("approach sequence rejects bad transversals") {
  const Direction e = primitive_direction(3, IVec{0, 0, 1});
  CHECK_THROWS_AS(approach_sequence(e, Vec{0, 0, 0}, 3), ZeroVector);
  CHECK_THROWS_AS(approach_sequence(e, Vec{0, 0.5, 0.9}, 3), Error); // not orthogonal
  const Direction ei = irrational_direction(3, Vec{1, 1.6180339887498949, 0});
  CHECK_THROWS_AS(approach_sequence(ei, Vec{0, 0, 1}, 3), Error);
}

TEST_CASE("slice averages detect resonant modes exactly") {
  const auto f = [](const Vec& y) { return std::cos(2 * M_PI * (y[0] + 2 * y[1])); };
  // mode (1,2): resonant only when k_e is parallel to it
  const Direction res = primitive_direction(2, IVec{1, 2, 0});
  CHECK(slice_average(f, res, 0.0, 64) == doctest::Approx(1.0).epsilon(1e-12));
  for (const IVec& k : {IVec{1, 3, 0}, IVec{3, 1, 0}, IVec{2, 3, 0}, IVec{-1, 4, 0}}) {
    const Direction e = primitive_direction(2, k);
    CHECK(std::abs(slice_average(f, e, 0.217, 64)) <= 1e-12);
  }
}

TEST_CASE("slice average equals the uniform chart-grid quadrature") {
  const Direction e = primitive_direction(3, IVec{1, 2, 3});
  const SliceChart chart = slice_lattice_basis(e);
  const auto f = [](const Vec& y) {
    return 1.0 + 0.5 * std::cos(2 * M_PI * (y[0] - y[1])) + 0.25 * std::sin(2 * M_PI * y[2]);
  };
  double acc = 0;
  const int N = 24;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const double t[2] = {double(i) / N, double(j) / N};
      Vec y = slice_point(chart, 0.4, t);
      for (int c = 0; c < 3; ++c) y[c] -= std::floor(y[c]);
      acc += f(y);
    }
  acc /= N * N;
  CHECK(slice_average(f, chart, 0.4, N) == doctest::Approx(acc).epsilon(1e-13));
}
