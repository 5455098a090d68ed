#include <benchmark/benchmark.h>

#include <random>

#include "inlab/gait.hpp"
#include "inlab/planar_sim.hpp"
#include "inlab/ppo.hpp"

using namespace inlab;

static void BM_SimStep(benchmark::State& state) {
  PlanarSim sim(build_quadruped());
  const auto pose = nominal_pose(RobotKind::Quadruped);
  SimState s = sim.standing_state(pose);
  for (auto _ : state) {
    sim.step(s, pose);
    benchmark::DoNotOptimize(s.base.x);
  }
}
BENCHMARK(BM_SimStep);

static void BM_ActorForward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  ActorCritic<float> ac(26, 8);
  ac.init(rng);
  const auto obs = ActorCritic<float>::Mat::Random(26, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ac.mean(obs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ActorForward)->Arg(1)->Arg(40)->Arg(2048);

static void BM_PpoLossGrad(benchmark::State& state) {
  std::mt19937_64 rng(2);
  ActorCritic<float> ac(26, 8);
  ac.init(rng);
  Minibatch<float> mb;
  mb.obs = ActorCritic<float>::Mat::Random(26, 2048);
  mb.actions = ActorCritic<float>::Mat::Random(8, 2048);
  mb.old_log_probs = ActorCritic<float>::Vec::Zero(2048);
  mb.advantages = ActorCritic<float>::Vec::Random(2048);
  mb.returns = ActorCritic<float>::Vec::Random(2048);
  PpoConfig cfg;
  Gradients<float> g;
  for (auto _ : state) benchmark::DoNotOptimize(ppo_loss(ac, mb, cfg, &g).total);
}
BENCHMARK(BM_PpoLossGrad)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
