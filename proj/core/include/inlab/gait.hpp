#pragma once

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

#include "inlab/units.hpp"

namespace inlab {

enum class TrajectoryKind { Sinusoid, Ramp, Composite, Constant };

struct CompositeTerm;

// One joint's reference angle as a function of time. Angles are in degrees.
//
// Sinusoid: theta0 + delta_theta * (1 - cos(2*pi*(t/period + phase))) / 2
// Ramp:     theta0 + delta_theta * t / period, for t in [0, period]
// Constant: theta0
// Composite: within one cycle of `period`, every term whose window contains the
//   cycle phase contributes weight * term(local time since the window start).
struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::Constant;
  double theta0 = 0.0;
  double delta_theta = 0.0;
  double period = 1.0;
  double phase = 0.0;
  std::vector<CompositeTerm> terms;

  static TrajectorySpec constant(double theta0);
  static TrajectorySpec sinusoid(double theta0, double delta_theta, double period,
                                 double phase = 0.0);
  static TrajectorySpec ramp(double theta0, double delta_theta, double period);
  static TrajectorySpec composite(std::vector<CompositeTerm> terms, double period,
                                  double phase = 0.0);
};

struct CompositeTerm {
  TrajectorySpec spec;
  double weight = 1.0;
  double window_begin = 0.0;  // fraction of the composite period, inclusive
  double window_end = 1.0;    // exclusive
};

struct RampSample {
  double angle = 0.0;
  bool clamped = false;  // t was outside [0, period] and was clamped
};

// Fractional part in [0, 1).
double wrap_phase(double x);

double eval_sinusoid(const TrajectorySpec& spec, double t);
RampSample eval_ramp(const TrajectorySpec& spec, double t);
double eval_trajectory(const TrajectorySpec& spec, double t);

// Maps a reference angle into [-1, 1] over the joint range. Throws RangeError
// when the reference lies outside the range.
double normalize_to_action(double theta_ref, const JointRange& range);

enum class SupportScheduleKind { DutyCycle, AlwaysStance };

// Leg stance classification: with DutyCycle a leg is in stance while its local
// phase fract(t / gait_period + leg offset) is below `duty`.
struct SupportSchedule {
  SupportScheduleKind kind = SupportScheduleKind::DutyCycle;
  double duty = 0.5;
};

struct GaitJoint {
  int joint_id = 0;
  int leg = 0;
  TrajectorySpec spec;
};

struct GaitDefinition {
  std::string name;
  double gait_period = 0.5;
  std::vector<GaitJoint> joints;  // sorted by joint_id, ids 0..n-1
  std::vector<double> leg_phase_offsets;
  SupportSchedule support;

  int joint_count() const { return static_cast<int>(joints.size()); }
  int leg_count() const { return static_cast<int>(leg_phase_offsets.size()); }

  // Throws ConfigError when joint ids are not exactly 0..n-1 or legs are out of range.
  void validate() const;
};

// Per-joint reference angles (degrees) including each leg's phase shift.
std::vector<double> reference_angles(const GaitDefinition& gait, double t);

// Per-joint normalized feedforward actions a_ff in [-1, 1].
std::vector<double> feedforward_vector(const GaitDefinition& gait,
                                       std::span<const JointRange> ranges, double t);

// Per-leg stance flags (true = stance).
std::vector<bool> support_flags(const GaitDefinition& gait, double t);

// Copies with the time scale or the swing amplitude changed; used by the adaptation sweep.
GaitDefinition scale_period(const GaitDefinition& gait, double factor);
GaitDefinition scale_amplitude(const GaitDefinition& gait, double factor);

void to_json(nlohmann::json& j, const TrajectorySpec& spec);
void from_json(const nlohmann::json& j, TrajectorySpec& spec);
void to_json(nlohmann::json& j, const GaitDefinition& gait);
void from_json(const nlohmann::json& j, GaitDefinition& gait);

// ---------------------------------------------------------------------------
// Gait library

enum class RobotKind { Biped, Quadruped };

std::string to_string(RobotKind kind);
RobotKind robot_kind_from_string(const std::string& name);

// Tunable swing parameters shared by the built-in gaits.
struct GaitParams {
  double period = 0.5;
  double hip_amplitude = 20.0;
  double knee_amplitude = 40.0;
  double ankle_amplitude = 20.0;
};

void to_json(nlohmann::json& j, const GaitParams& p);
void from_json(const nlohmann::json& j, GaitParams& p);

// Built-in gaits. Quadruped: trot, pace, bound, pronk. Biped: walk, level_walk,
// march_walk, hop, jump. "stepping" is the stepping-in-place feedforward (trot
// for the quadruped, walk for the biped).
GaitDefinition make_gait(RobotKind robot, const std::string& name, const GaitParams& params = {});
std::vector<std::string> gait_names(RobotKind robot);

// Nominal standing pose (degrees) the built-in gaits swing around.
std::vector<double> nominal_pose(RobotKind robot);

}  // namespace inlab
