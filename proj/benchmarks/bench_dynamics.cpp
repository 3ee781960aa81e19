#include "slung/dynamics.hpp"
#include "slung/env.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace slung;

void BM_HybridStepHover(benchmark::State& state) {
  const PhysicalParams p;
  SystemState s = hover_state({0.0, 0.0, 3.0}, p);
  PhysicalCommand cmd;
  cmd.thrust_accel = p.hover_thrust_accel();
  for (auto _ : state) {
    s = hybrid_step(s, cmd, p, 0.01).state;
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_HybridStepHover);

void BM_HybridStepSlack(benchmark::State& state) {
  const PhysicalParams p;
  SystemState start = hover_state({0.0, 0.0, 3.0}, p);
  start.phase = CablePhase::kSlack;
  start.x_l += Vec3(0.0, 0.0, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hybrid_step(start, PhysicalCommand{}, p, 0.01));
  }
}
BENCHMARK(BM_HybridStepSlack);

void BM_EnvironmentStep(benchmark::State& state) {
  EnvConfig cfg;
  Environment env(cfg, Rng(3));
  env.reset();
  const Vec4 action(-0.365, 0.0, 0.0, 0.0);
  for (auto _ : state) {
    const StepOutcome out = env.step(action);
    if (out.done) env.reset();
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_EnvironmentStep);

}  // namespace
