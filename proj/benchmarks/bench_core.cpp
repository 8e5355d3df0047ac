#include <algorithm>
#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "annihilate/harness.hpp"
#include "annihilate/hjsolver.hpp"
#include "annihilate/integrator.hpp"
#include "annihilate/moments.hpp"
#include "annihilate/particles.hpp"

using namespace annihilate;

namespace {

ParticleState random_state(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  std::sort(x.begin(), x.end());
  std::vector<int> b(n);
  for (int& c : b) c = rng() % 2 ? 1 : -1;
  return make_state(x, b);
}

void BM_Velocities(benchmark::State& st) {
  const ParticleState s = random_state(static_cast<std::size_t>(st.range(0)), 1);
  for (auto _ : st) benchmark::DoNotOptimize(velocities(s));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_Velocities)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oNSquared);

void BM_Step(benchmark::State& st) {
  const ParticleState s = lattice_state(static_cast<std::size_t>(st.range(0)));
  IntegratorConfig c;
  for (auto _ : st) benchmark::DoNotOptimize(step(s, 1e-3, c));
}
BENCHMARK(BM_Step)->Arg(16)->Arg(64)->Arg(256);

void BM_EvolveWithEvents(benchmark::State& st) {
  const ParticleState s = random_state(static_cast<std::size_t>(st.range(0)), 2);
  IntegratorConfig c;
  c.t_end = 0.05;
  c.abs_tol = 1e-9;
  c.rel_tol = 1e-8;
  c.cluster_gap = 1e-6;
  for (auto _ : st) benchmark::DoNotOptimize(evolve(s, c).events.size());
}
BENCHMARK(BM_EvolveWithEvents)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_StepHJ(benchmark::State& st) {
  SchemeConfig c;
  c.L = 3.0;
  c.h = 1.0 / static_cast<double>(st.range(0));
  const GridFunction u = sample_grid([](double x) { return std::tanh(3.0 * x); }, c);
  for (auto _ : st) benchmark::DoNotOptimize(step_hj(u, c).values.data());
}
BENCHMARK(BM_StepHJ)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_MomentsRoundTrip(benchmark::State& st) {
  const ParticleState s = random_state(static_cast<std::size_t>(st.range(0)), 3);
  for (auto _ : st) benchmark::DoNotOptimize(reconstruct_positions(moments(s.positions)));
}
BENCHMARK(BM_MomentsRoundTrip)->Arg(4)->Arg(8)->Arg(12);

}  // namespace
BENCHMARK_MAIN();
