#include <benchmark/benchmark.h>

#include <numbers>

#include "gylab/continuum.hpp"
#include "gylab/operators.hpp"
#include "gylab/regularize.hpp"

using namespace gylab;

namespace {

ProblemSpec scalar_problem() {
  return ProblemSpec{anharmonic(1.0, 1.0, 0.1), quadratic_generator(1.0), quadratic_generator(-1.0),
                     1.0, 1.0, Vector::Constant(1, 0.2), Vector::Constant(1, 0.1)};
}

struct Fixture {
  ProblemSpec spec;
  Lattice lat;
  DiscretePath path;
  Fixture(ProblemSpec s, Index points)
      : spec(std::move(s)), lat(points, spec.horizon),
        path(solve_critical_path(spec, lat).path) {}
};

void BM_DetDense(benchmark::State& state) {
  const Fixture f(random_quadratic_problem(1, 2), state.range(0));
  const Matrix dense = assemble_hj(f.spec, f.lat, f.path).to_dense();
  for (auto _ : state) benchmark::DoNotOptimize(det_dense(dense).det);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DetDense)->RangeMultiplier(2)->Range(8, 256)->Complexity();

void BM_DetSchur(benchmark::State& state) {
  const Fixture f(random_quadratic_problem(1, 2), state.range(0));
  const HJMatrix hj = assemble_hj(f.spec, f.lat, f.path);
  for (auto _ : state) benchmark::DoNotOptimize(det_schur_hj(hj).det);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DetSchur)->RangeMultiplier(4)->Range(8, 8192)->Complexity(benchmark::oN);

void BM_DetTransfer(benchmark::State& state) {
  const Fixture f(random_quadratic_problem(1, 2), state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(det_transfer_hj(f.spec, f.lat, f.path).det);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DetTransfer)->RangeMultiplier(4)->Range(8, 8192)->Complexity(benchmark::oN);

void BM_DetPrime(benchmark::State& state) {
  const Fixture f(scalar_problem(), state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(det_prime_assembled(f.spec, f.lat, f.path).det);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DetPrime)->RangeMultiplier(4)->Range(101, 6464)->Complexity(benchmark::oN);

void BM_Newton(benchmark::State& state) {
  const ProblemSpec spec = scalar_problem();
  const Lattice lat(state.range(0), spec.horizon);
  for (auto _ : state) benchmark::DoNotOptimize(solve_critical_path(spec, lat).residual_norm);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Newton)->RangeMultiplier(4)->Range(101, 6464)->Complexity(benchmark::oN);

void BM_ZetaDet(benchmark::State& state) {
  const ProblemSpec spec = scalar_problem();
  ShootOptions opts;
  opts.steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(zeta_det(spec, 0.0, opts).value);
}
BENCHMARK(BM_ZetaDet)->Arg(1024)->Arg(4096)->Arg(16384);

void BM_LatticeSweep(benchmark::State& state) {
  const ProblemSpec spec = scalar_problem();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        lattice_limit(spec, default_n_list(), LimitTarget::a).extrapolated.limit);
}
BENCHMARK(BM_LatticeSweep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
