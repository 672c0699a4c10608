#include <benchmark/benchmark.h>

#include <random>

#include "palflow/network.hpp"
#include "palflow/registry.hpp"

namespace {

using namespace palflow;

Vector random_vector(Index n, std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = uni(rng);
  return v;
}

void BM_prox_l1(benchmark::State& state) {
  const Index n = state.range(0);
  auto phi = ProxFunction::l1_norm(n);
  std::mt19937 rng(7);
  Vector v = random_vector(n, rng);
  SmoothingParam mu(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(phi.prox(v, mu));
}
BENCHMARK(BM_prox_l1)->Arg(16)->Arg(256)->Arg(4096);

void BM_moreau_grad_l1(benchmark::State& state) {
  const Index n = state.range(0);
  auto phi = ProxFunction::l1_norm(n);
  std::mt19937 rng(7);
  Vector v = random_vector(n, rng);
  SmoothingParam mu(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(phi.moreau_grad(v, mu));
}
BENCHMARK(BM_moreau_grad_l1)->Arg(16)->Arg(256)->Arg(4096);

void BM_vector_field_rosen_suzuki(benchmark::State& state) {
  const ProblemSpec spec = find_problem("rosen-suzuki-central")->make();
  DynamicsParams params(SmoothingParam(0.1), 1.0, spec.ineq_count());
  std::mt19937 rng(7);
  PrimalDualState s;
  s.x = random_vector(spec.n(), rng);
  s.lambda = Vector::Ones(spec.ineq_count());
  s.nu = random_vector(spec.eq_count(), rng);
  s.w = random_vector(spec.m(), rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(vector_field(spec, s, params));
}
BENCHMARK(BM_vector_field_rosen_suzuki);

void BM_integrate_step(benchmark::State& state) {
  const ProblemSpec spec = find_problem("rosen-suzuki-central")->make();
  DynamicsParams params(SmoothingParam(0.1), 1.0, spec.ineq_count());
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;  // 1000 fixed steps per iteration
  cfg.record_every = 1000000;
  PrimalDualState s0 = default_initial_state(spec);
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate(spec, s0, params, cfg));
}
BENCHMARK(BM_integrate_step)->Unit(benchmark::kMillisecond);

void BM_distributed_field(benchmark::State& state) {
  NetworkProblem np = rosen_suzuki_network();
  DynamicsParams params(SmoothingParam(0.1), 1.0, np.spec.total_ineq());
  for (auto _ : state)
    benchmark::DoNotOptimize(distributed_field(np.spec, np.initial, params));
}
BENCHMARK(BM_distributed_field);

}  // namespace

BENCHMARK_MAIN();
