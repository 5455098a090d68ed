#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "inlab/action_pipeline.hpp"
#include "inlab/config.hpp"
#include "inlab/gait.hpp"
#include "inlab/observation.hpp"
#include "inlab/planar_sim.hpp"
#include "inlab/reward.hpp"

namespace inlab {

// Everything an environment copy needs; shared read-only between copies.
struct EnvSpec {
  RobotKind robot = RobotKind::Quadruped;
  PlanarSim sim;
  GaitDefinition gait;
  FeedbackConfig feedback;
  RewardConfig reward;
  ObservationLayout layout;
  DisturbanceConfig disturbance;
  std::vector<JointRange> ranges;
  int max_episode_steps = static_cast<int>(kEpisodeSteps);

  EnvSpec(const TrainConfig& cfg);
};

struct StepInfo {
  RewardBreakdown reward;
  bool done = false;
  bool fell = false;       // pitch beyond the fall threshold (or a blowup)
  bool truncated = false;  // episode step limit reached
  bool blowup = false;
  std::vector<double> a_ff, a_fb, a_t, theta_cmd;
};

struct EpisodeStats {
  int steps = 0;
  RewardBreakdown sum;
  double start_x = 0.0;
  double end_x = 0.0;
  bool fell = false;

  double forward_velocity(double dt = 0.01) const {
    return steps > 0 ? (end_x - start_x) / (steps * dt) : 0.0;
  }
};

// One environment copy: simulator state, action pipeline, disturbance schedule
// and a private random stream.
class LocomotionEnv {
 public:
  LocomotionEnv(std::shared_ptr<const EnvSpec> spec, std::uint64_t seed);

  // Full reset to the gait's t = 0 standing posture.
  void reset();
  // Starts a new episode from the current physical state (gait clock and
  // feedback filter restart, the robot is not moved).
  void begin_episode();

  void observe(std::span<double> out) const;
  std::vector<double> observe() const;
  StepInfo step(std::span<const double> a_nn);

  // Gait clock since the episode start (s).
  double gait_time() const { return state_.time - episode_start_time_; }
  const EpisodeStats& episode() const { return episode_; }
  const SimState& state() const { return state_; }
  SimState& mutable_state() { return state_; }
  const EnvSpec& spec() const { return *spec_; }
  std::mt19937_64& rng() { return rng_; }

  // Replaces the feedforward (adaptation experiments).
  void set_gait(GaitDefinition gait) { gait_override_ = std::make_shared<GaitDefinition>(std::move(gait)); }
  const GaitDefinition& gait() const { return gait_override_ ? *gait_override_ : spec_->gait; }

 private:
  std::shared_ptr<const EnvSpec> spec_;
  std::shared_ptr<GaitDefinition> gait_override_;
  SimState state_;
  PipelineState pipeline_;
  PushDisturbance push_;
  std::mt19937_64 rng_;
  EpisodeStats episode_;
  double episode_start_time_ = 0.0;
};

// Seed of environment copy `index` derived from the run seed.
std::uint64_t env_seed(std::uint64_t seed, int index);

}  // namespace inlab
