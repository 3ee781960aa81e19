#include "slung/hdss.hpp"
#include "slung/tracks.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace slung;

void BM_SeedAttempt(benchmark::State& state) {
  const PhysicalParams p;
  const SeedConfig cfg;
  const WaypointKind kind = state.range(0) ? WaypointKind::kInverted : WaypointKind::kUpright;
  const Waypoint wp = make_waypoint(cfg.workspace.center(), kind, 0.3);
  Rng rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(seed_attempt(wp, cfg, p, rng));
  }
}
BENCHMARK(BM_SeedAttempt)->Arg(0)->Arg(1);

void BM_TautBackstep(benchmark::State& state) {
  const PhysicalParams p;
  const SeedConfig cfg;
  Rng rng(6);
  const FlatChain goal = sample_goal_chain(make_waypoint({0.0, 0.0, 4.0}, WaypointKind::kUpright, 0.0),
                                           cfg, p, rng);
  const Vec3 snap(0.5, -0.3, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(backstep_taut(goal, snap, cfg, p));
  }
}
BENCHMARK(BM_TautBackstep);

}  // namespace
