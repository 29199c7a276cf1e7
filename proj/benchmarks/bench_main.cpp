#include <benchmark/benchmark.h>

#include "homog/cellsolve.hpp"
#include "homog/front.hpp"
#include "homog/measures.hpp"
#include "homog/obstacle.hpp"

namespace {

using namespace homog;

CoefficientField bench_field() {
  FieldParams p;
  p.a_base = 2.0;
  ScalarTerm t;
  t.k = IVec{1, 0, 0};
  t.amp = 1.0;
  p.a_scalar_terms.push_back(t);
  ScalarTerm mt;
  mt.k = IVec{1, 1, 0};
  mt.amp = 0.5;
  p.m_terms.push_back(mt);
  return builtin_field("isotropic-trig", 2, p);
}

void BM_penalized_solve(benchmark::State& state) {
  const CoefficientField f = bench_field();
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const ProjectedOperator op = project_A(f, e);
  const Mat X = identity(2);
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) {
    Corrector c = solve_penalized(op, X, 0.25, N);
    benchmark::DoNotOptimize(c.residual_inf);
  }
}
BENCHMARK(BM_penalized_solve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_invariant_measure(benchmark::State& state) {
  const CoefficientField f = bench_field();
  const Direction e = primitive_direction(2, IVec{1, 2, 0});
  const ProjectedOperator op = project_A(f, e);
  const SliceChart chart = slice_lattice_basis(e);
  const int M = static_cast<int>(state.range(0));
  for (auto _ : state) {
    InvariantMeasure mu = invariant_measure_slice(op, chart, 0.1, M);
    benchmark::DoNotOptimize(mu.residual);
  }
}
BENCHMARK(BM_invariant_measure)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_front_steps(benchmark::State& state) {
  const CoefficientField f = bench_field();
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) {
    FrontState st = simulate_front(f, e, 1.0, 1.0, 0.001, {N, N});
    benchmark::DoNotOptimize(st.speed);
  }
}
BENCHMARK(BM_front_steps)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_psor(benchmark::State& state) {
  const CoefficientField f = bench_field();
  const Direction e = primitive_direction(2, IVec{0, 1, 0});
  const ProjectedOperator op = project_A(f, e);
  Mat X = identity(2);
  at(X, 0, 0) = -1.0;
  at(X, 1, 1) = -1.0;
  const int M = static_cast<int>(state.range(0));
  for (auto _ : state) {
    ObstacleSolution sol =
        solve_obstacle(op, ObstacleKind::subsolution, X, 0.5, 8.0, Vec{}, 1.0, M);
    benchmark::DoNotOptimize(sol.density);
  }
}
BENCHMARK(BM_psor)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
