#include "inlab/reward.hpp"

#include <cmath>

#include "inlab/error.hpp"

namespace inlab {

double reward_mimic(std::span<const double> theta, std::span<const double> theta_ref) {
  if (theta.size() != theta_ref.size()) throw ConfigError("reward_mimic: size mismatch");
  double err = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) err += std::abs(theta[i] - theta_ref[i]);
  return 1.2 - 0.02 * err;
}

double reward_balance(double pitch, double yaw, double roll) {
  return -0.1 * (std::abs(pitch) + std::abs(yaw) + std::abs(roll));
}

std::string to_string(VelocityVariant v) {
  switch (v) {
    case VelocityVariant::None: return "none";
    case VelocityVariant::Step: return "step";
    case VelocityVariant::Walk: return "walk";
    case VelocityVariant::Jump: return "jump";
    case VelocityVariant::LegAngular: return "leg_angular";
  }
  return "none";
}

VelocityVariant velocity_variant_from_string(const std::string& name) {
  if (name == "none") return VelocityVariant::None;
  if (name == "step") return VelocityVariant::Step;
  if (name == "walk") return VelocityVariant::Walk;
  if (name == "jump") return VelocityVariant::Jump;
  if (name == "leg_angular") return VelocityVariant::LegAngular;
  throw ConfigError("unknown velocity reward variant '" + name + "'");
}

double reward_velocity(double vf, double vl, double vv, VelocityVariant variant) {
  switch (variant) {
    case VelocityVariant::Step: return -std::abs(vf) - std::abs(vl) - std::abs(vv);
    case VelocityVariant::Walk: return vf - std::abs(vl) - std::abs(vv);
    case VelocityVariant::Jump: return vf - std::abs(vl) + std::abs(vv);
    default: break;
  }
  throw ConfigError("reward_velocity: variant '" + to_string(variant) + "' is not a velocity term");
}

double reward_sync(std::span<const double> left, std::span<const double> right) {
  if (left.size() != 3 || right.size() != 3) throw ConfigError("reward_sync expects 3 joints per leg");
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d += std::abs(left[i] - right[i]);
  return -0.05 * d;
}

double reward_sync(RobotKind robot, std::span<const double> theta) {
  if (robot != RobotKind::Biped) throw ConfigError("the sync reward applies to the biped only");
  if (theta.size() != 6) throw ConfigError("reward_sync expects 6 biped joints");
  return reward_sync(theta.subspan(0, 3), theta.subspan(3, 3));
}

double reward_leg_angular(std::span<const double> leg_prev, std::span<const double> leg_next,
                          const std::vector<bool>& support, bool* balanced) {
  if (leg_prev.size() != leg_next.size() || leg_prev.size() != support.size()) {
    throw ConfigError("reward_leg_angular: size mismatch");
  }
  double r = 0.0;
  int stance = 0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const double omega = leg_next[i] - leg_prev[i];
    if (support[i]) {
      r += omega;
      ++stance;
    } else {
      r -= omega;
    }
  }
  if (balanced) *balanced = 2 * stance == static_cast<int>(support.size());
  return r;
}

RewardConfig RewardConfig::preset(RobotKind robot, const std::string& gait) {
  RewardConfig c;
  if (gait == "stepping") {
    c.mimic = true;
    c.velocity = VelocityVariant::Step;
  } else if (gait == "walk" || gait == "level_walk" || gait == "march_walk" || gait == "trot" ||
             gait == "pace" || gait == "bound") {
    c.velocity = VelocityVariant::Walk;
  } else if (gait == "hop" || gait == "pronk") {
    c.velocity = VelocityVariant::Jump;
  } else if (gait == "jump") {
    c.velocity = VelocityVariant::Jump;
    c.sync = robot == RobotKind::Biped;
  } else if (gait == "leg_angular") {
    c.alive = false;
    c.balance = false;
    c.velocity = VelocityVariant::LegAngular;
  } else {
    throw ConfigError("no reward preset for gait '" + gait + "'");
  }
  c.validate(robot);
  return c;
}

void RewardConfig::validate(RobotKind robot) const {
  if (sync && robot != RobotKind::Biped) throw ConfigError("the sync reward applies to the biped only");
  if (velocity == VelocityVariant::LegAngular && robot != RobotKind::Quadruped) {
    throw ConfigError("the leg angular reward applies to the quadruped only");
  }
}

RewardBreakdown evaluate_reward(const RewardConfig& c, const RewardInputs& in) {
  RewardBreakdown r;
  if (c.mimic) r.mimic = reward_mimic(in.theta, in.theta_ref);
  if (c.alive) r.alive = reward_alive();
  if (c.balance) r.balance = reward_balance(in.pitch, in.yaw, in.roll);
  if (c.velocity == VelocityVariant::LegAngular) {
    r.velocity = reward_leg_angular(in.leg_prev, in.leg_next, in.support);
  } else if (c.velocity != VelocityVariant::None) {
    r.velocity = reward_velocity(in.v_forward, in.v_lateral, in.v_vertical, c.velocity);
  }
  if (c.sync) r.sync = reward_sync(in.robot, in.theta);
  r.total = r.mimic + r.alive + r.balance + r.velocity + r.sync;
  return r;
}

double total_reward(const RewardConfig& c, const RewardInputs& in) {
  return evaluate_reward(c, in).total;
}

void to_json(nlohmann::json& j, const RewardConfig& c) {
  j = nlohmann::json{{"mimic", c.mimic},
                     {"alive", c.alive},
                     {"balance", c.balance},
                     {"velocity", to_string(c.velocity)},
                     {"sync", c.sync}};
}

void from_json(const nlohmann::json& j, RewardConfig& c) {
  RewardConfig d;
  c.mimic = j.value("mimic", d.mimic);
  c.alive = j.value("alive", d.alive);
  c.balance = j.value("balance", d.balance);
  c.velocity = velocity_variant_from_string(j.value("velocity", to_string(d.velocity)));
  c.sync = j.value("sync", d.sync);
}

}  // namespace inlab
