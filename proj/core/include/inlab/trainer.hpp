#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "inlab/config.hpp"
#include "inlab/environment.hpp"
#include "inlab/policy.hpp"
#include "inlab/ppo.hpp"
#include "inlab/training_log.hpp"

namespace inlab {

// Network precision used for rollouts and updates.
using Real = float;
using Policy = ActorCritic<Real>;

// Runs fn(0..tasks-1) on a fixed set of threads. Task i always runs on worker
// i % workers, and callers write to disjoint slots, so results do not depend
// on the worker count.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void run(int tasks, const std::function<void(int)>& fn);
  int workers() const { return workers_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int workers_ = 1;
};

struct TrainHooks {
  std::function<void(const IterationRow&)> on_iteration;
  // Called for every environment step (env index, step info); runs on worker threads.
  std::function<void(int, const StepInfo&)> on_step;
};

struct TrainResult {
  TrainingLog log;
  Policy policy;
  double wall_seconds = 0.0;
};

Policy make_policy(const TrainConfig& cfg);

TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks = {});

struct EvalMetrics {
  double mean_reward = 0.0;
  double mean_mimic = 0.0;
  int falls = 0;
  double mean_forward_velocity = 0.0;
  std::vector<int> episode_lengths;
  std::vector<double> episode_rewards;
};

// Deterministic rollout with the mean action and no disturbances. Episodes end
// on a fall or after `episode_steps` (default: the whole duration); the robot is
// reset until `duration_s` of simulated time has elapsed.
// `on_state` sees the state after every step.
EvalMetrics evaluate(const Policy& policy, const TrainConfig& cfg, double duration_s,
                     const GaitDefinition* gait_override = nullptr, int episode_steps = -1,
                     const std::function<void(const SimState&)>& on_state = {});

}  // namespace inlab
