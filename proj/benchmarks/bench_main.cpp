#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "magnetic_gaps/bloch.hpp"
#include "magnetic_gaps/intervals.hpp"
#include "magnetic_gaps/model_op.hpp"

using namespace magnetic_gaps;

namespace {

Polynomial2 radial_k2() {
  const double c = 4.0 * std::pow(std::numbers::pi, 3);
  Polynomial2 b0;
  b0.set_coefficient(2, 0, c);
  b0.set_coefficient(0, 2, c);
  return b0;
}

void BM_AssembleModel(benchmark::State& state) {
  const auto problem = make_model_problem(radial_k2(), 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_model(problem));
}
BENCHMARK(BM_AssembleModel)->Arg(64)->Arg(128);

void BM_ModelLowest4(benchmark::State& state) {
  const auto op = assemble_model(make_model_problem(radial_k2(), 1.0, static_cast<int>(state.range(0))));
  EigOptions o;
  o.m = 4;
  o.preconditioner = state.range(1) ? PreconditionerKind::ShiftedFactorization : PreconditionerKind::Jacobi;
  o.shift = 10.0;
  o.max_iter = 5000;
  o.stagnation_window = 500;
  for (auto _ : state) benchmark::DoNotOptimize(lowest_eigs(op, o));
}
BENCHMARK(BM_ModelLowest4)->Args({64, 0})->Args({64, 1})->Args({128, 1})->Unit(benchmark::kMillisecond);

void BM_BlochFiber(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto field = PeriodicScalarField::test_field();
  const double h = 1.0 / n;
  const auto op = assemble_bloch(make_bloch_problem(field, h, {0.3, 0.7}, auto_grid(n)));
  EigOptions o;
  o.m = 2 * 4;
  o.preconditioner = PreconditionerKind::ShiftedFactorization;
  o.shift = 30.0 * std::pow(h, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(lowest_eigs(op, o));
}
BENCHMARK(BM_BlochFiber)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Transfer(benchmark::State& state) {
  TransferParams p;
  p.rho = 1.1;
  p.beta1 = p.beta2 = 1.05;
  p.gamma1 = p.gamma2 = 0.02;
  p.eps1 = p.eps2 = 0.03;
  p.alpha1 = p.alpha2 = 50.0;
  for (auto _ : state) benchmark::DoNotOptimize(transfer(p, {2.0, 5.0}));
}
BENCHMARK(BM_Transfer);

}  // namespace

BENCHMARK_MAIN();
