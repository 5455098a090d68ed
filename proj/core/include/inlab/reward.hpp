#pragma once

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

#include "inlab/gait.hpp"

namespace inlab {

// All angles in degrees, velocities in m/s.

// 1.2 - 0.02 * sum |theta - theta_ref| over all joints.
double reward_mimic(std::span<const double> theta, std::span<const double> theta_ref);

inline double reward_alive() { return 1.0; }

double reward_balance(double pitch, double yaw, double roll);

enum class VelocityVariant { None, Step, Walk, Jump, LegAngular };

std::string to_string(VelocityVariant v);
VelocityVariant velocity_variant_from_string(const std::string& name);

// Step: -|vf|-|vl|-|vv|; Walk: vf-|vl|-|vv|; Jump: vf-|vl|+|vv|.
double reward_velocity(double v_forward, double v_lateral, double v_vertical,
                       VelocityVariant variant);

// -0.05 * sum over (hip, knee, ankle) of |left - right|.
double reward_sync(std::span<const double> left, std::span<const double> right);

// Sync reward taken from a full biped joint vector [L hip, knee, ankle, R hip, knee, ankle].
double reward_sync(RobotKind robot, std::span<const double> theta);

// Virtual leg angle from hip and knee pitch.
inline double leg_angle(double theta_hfe, double theta_kfe) { return theta_hfe + 0.5 * theta_kfe; }

// Per leg: omega = leg_next - leg_prev. Stance legs add omega, swing legs
// subtract it. `balanced` (optional) reports whether the stance/swing split was 2/2.
double reward_leg_angular(std::span<const double> leg_prev, std::span<const double> leg_next,
                          const std::vector<bool>& support, bool* balanced = nullptr);

struct RewardConfig {
  bool mimic = false;
  bool alive = true;
  bool balance = true;
  VelocityVariant velocity = VelocityVariant::Step;
  bool sync = false;

  // Reward presets per gait: "stepping", walking gaits (walk, level_walk,
  // march_walk, trot, pace, bound), jumping gaits (hop, pronk), biped "jump",
  // and "leg_angular" for the online protocol.
  static RewardConfig preset(RobotKind robot, const std::string& gait);
  void validate(RobotKind robot) const;
};

struct RewardInputs {
  std::span<const double> theta;      // joint angles
  std::span<const double> theta_ref;  // reference joint angles
  double pitch = 0.0, yaw = 0.0, roll = 0.0;
  double v_forward = 0.0, v_lateral = 0.0, v_vertical = 0.0;
  std::span<const double> leg_prev;  // leg angles at k
  std::span<const double> leg_next;  // leg angles at k + 1
  std::vector<bool> support;
  RobotKind robot = RobotKind::Quadruped;
};

struct RewardBreakdown {
  double mimic = 0.0;
  double alive = 0.0;
  double balance = 0.0;
  double velocity = 0.0;
  double sync = 0.0;
  double total = 0.0;
};

RewardBreakdown evaluate_reward(const RewardConfig& config, const RewardInputs& in);
double total_reward(const RewardConfig& config, const RewardInputs& in);

void to_json(nlohmann::json& j, const RewardConfig& c);
void from_json(const nlohmann::json& j, RewardConfig& c);

}  // namespace inlab
