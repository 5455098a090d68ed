#include "inlab/environment.hpp"

#include <cmath>

#include "inlab/error.hpp"

namespace inlab {

EnvSpec::EnvSpec(const TrainConfig& cfg)
    : robot(cfg.robot),
      sim(cfg.model(), cfg.sim_config()),
      gait(cfg.gait_definition()),
      feedback(cfg.feedback()),
      reward(cfg.reward()),
      layout(cfg.layout()),
      disturbance(cfg.disturbance),
      ranges(sim.model().joint_ranges()),
      max_episode_steps(cfg.max_episode_steps) {
  feedback.validate(ranges.size());
}

std::uint64_t env_seed(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), 0x5eedu};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

LocomotionEnv::LocomotionEnv(std::shared_ptr<const EnvSpec> spec, std::uint64_t seed)
    : spec_(std::move(spec)), pipeline_(spec_->ranges.size()), push_(spec_->disturbance), rng_(seed) {
  reset();
}

void LocomotionEnv::reset() {
  state_ = reset_robot(spec_->sim, gait());
  push_.reset();
  begin_episode();
}

void LocomotionEnv::begin_episode() {
  inlab::reset(pipeline_);
  episode_start_time_ = state_.time;
  state_.step = 0;
  episode_ = EpisodeStats{};
  episode_.start_x = state_.base.x;
  episode_.end_x = state_.base.x;
}

void LocomotionEnv::observe(std::span<double> out) const {
  if (spec_->layout.uses_reference()) {
    const auto ref = reference_angles(gait(), gait_time());
    inlab::observe(state_, spec_->layout, spec_->ranges, ref, out);
  } else {
    inlab::observe(state_, spec_->layout, spec_->ranges, {}, out);
  }
}

std::vector<double> LocomotionEnv::observe() const {
  std::vector<double> out(spec_->layout.size());
  observe(out);
  return out;
}

StepInfo LocomotionEnv::step(std::span<const double> a_nn) {
  const auto& sp = *spec_;
  const std::size_t n = sp.ranges.size();
  if (a_nn.size() != n) throw ConfigError("environment step: action size mismatch");
  StepInfo info;
  const double t0 = gait_time();
  info.a_ff = feedforward_vector(gait(), sp.ranges, t0);
  info.a_fb.resize(n);
  info.a_t.resize(n);
  info.theta_cmd.resize(n);
  filter_step(pipeline_, a_nn, info.a_fb);
  compose(info.a_ff, info.a_fb, sp.feedback, info.a_t);
  for (std::size_t j = 0; j < n; ++j) info.theta_cmd[j] = to_command_angle(info.a_t[j], sp.ranges[j]);

  std::vector<double> leg_prev, leg_next;
  std::vector<bool> support;
  const bool leg_reward = sp.reward.velocity == VelocityVariant::LegAngular;
  const auto& model = sp.sim.model();
  auto leg_angles = [&]() {
    std::vector<double> out(model.legs);
    for (int l = 0; l < model.legs; ++l) {
      out[l] = leg_angle(rad2deg(state_.joint_angle(model.hip_joint(l))),
                         rad2deg(state_.joint_angle(model.knee_joint(l))));
    }
    return out;
  };
  if (leg_reward) {
    leg_prev = leg_angles();
    support = support_flags(gait(), t0);
  }

  if (sp.disturbance.enabled) push_.apply(state_, rng_);
  try {
    sp.sim.step(state_, info.theta_cmd);
  } catch (const SimulationBlowup&) {
    info.blowup = true;
    info.fell = true;
    info.done = true;
    episode_.steps += 1;
    episode_.fell = true;
    return info;
  }

  const Termination term = check_termination(state_, sp.max_episode_steps);
  info.fell = term == Termination::Fell;
  info.truncated = term == Termination::Timeout;
  info.done = info.fell || info.truncated;

  const auto theta = sp.sim.joint_angles_deg(state_);
  const auto ref = reference_angles(gait(), gait_time());
  const Vec2 v = body_velocity(state_.base);
  RewardInputs in;
  in.theta = theta;
  in.theta_ref = ref;
  in.pitch = rad2deg(state_.base.pitch);
  in.v_forward = v.x();
  in.v_vertical = v.y();
  in.robot = sp.robot;
  if (leg_reward) {
    leg_next = leg_angles();
    in.leg_prev = leg_prev;
    in.leg_next = leg_next;
    in.support = support;
  }
  info.reward = evaluate_reward(sp.reward, in);
  if (info.fell && sp.reward.alive) {
    info.reward.total -= info.reward.alive;
    info.reward.alive = 0.0;
  }

  episode_.steps += 1;
  episode_.end_x = state_.base.x;
  episode_.fell = info.fell;
  episode_.sum.mimic += info.reward.mimic;
  episode_.sum.alive += info.reward.alive;
  episode_.sum.balance += info.reward.balance;
  episode_.sum.velocity += info.reward.velocity;
  episode_.sum.sync += info.reward.sync;
  episode_.sum.total += info.reward.total;
  return info;
}

}  // namespace inlab
