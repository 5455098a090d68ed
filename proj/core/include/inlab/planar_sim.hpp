#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "inlab/gait.hpp"
#include "inlab/robot_model.hpp"

namespace inlab {

struct ContactParams {
  double stiffness = 5.0e4;    // N/m
  double damping = 800.0;      // N s/m
  double friction = 0.8;       // Coulomb coefficient
  double reg_velocity = 0.01;  // m/s, linear friction region

  void validate() const;
};

struct DisturbanceConfig {
  bool enabled = false;
  double magnitude_min = 0.0;  // N
  double magnitude_max = 0.0;
  double interval_min = 1.0;  // s between push onsets
  double interval_max = 3.0;
  double duration = 0.1;  // s

  void validate() const;
};

struct SimConfig {
  ContactParams contact;
  bool contacts_enabled = true;
  double gravity = 9.81;
  int substeps = 10;
  // Fixed base: the trunk is held at `base_pose` and only joints move.
  bool fixed_base = false;
  Eigen::Vector3d base_pose = Eigen::Vector3d::Zero();  // x, z, pitch(rad)
};

// Trunk-frame quantities derived from the generalized state.
struct BaseState {
  double x = 0.0, z = 0.0, pitch = 0.0;  // m, m, rad (positive nose down)
  double vx = 0.0, vz = 0.0, pitch_rate = 0.0;
};

// Generalized coordinates. Floating base: q = [com_x, com_z, pitch, joints...]
// where (com_x, com_z) is the whole-robot center of mass; fixed base: q = joints.
// Joint angles in radians, positive about +y.
struct SimState {
  Eigen::VectorXd q;
  Eigen::VectorXd v;
  std::vector<bool> contact;  // per contact point
  double time = 0.0;
  std::int64_t step = 0;
  double push_force = 0.0;  // horizontal external force on the trunk, N
  BaseState base;

  int joints = 0;

  int joint_offset() const { return static_cast<int>(q.size()) - joints; }
  double joint_angle(int j) const { return q[joint_offset() + j]; }
  double joint_velocity(int j) const { return v[joint_offset() + j]; }
};

enum class Termination { Continue, Fell, Timeout };

inline constexpr double kFallPitchDeg = 10.0;
inline constexpr std::int64_t kEpisodeSteps = 1000;

// PD servo torque, clamped to +/- tau_max. Angles in radians.
double pd_torque(double theta_cmd, double theta, double theta_dot, double kp, double kd,
                 double tau_max);

// Penalty contact with a flat ground at z = 0. Returns (Fx, Fz) on the point.
Vec2 contact_force(const Vec2& position, const Vec2& velocity, const ContactParams& params);

Termination check_termination(const SimState& state, std::int64_t max_steps = kEpisodeSteps);

// Smoothed sign used by the friction model: linear below the regularization velocity.
double smooth_sign(double v, double reg_velocity);

class PlanarSim {
 public:
  PlanarSim(RobotModel model, SimConfig config = {});

  const RobotModel& model() const { return model_; }
  const SimConfig& config() const { return config_; }
  int dof() const { return dof_; }

  // State with the trunk at (x, z, pitch) and the given joint angles (radians),
  // at rest.
  SimState make_state(double x, double z, double pitch, std::span<const double> joints_rad) const;

  // Upright state resting on the ground with joints at `joints_deg`.
  SimState standing_state(std::span<const double> joints_deg) const;

  // Advances by dt_control with PD servos tracking theta_cmd (degrees).
  void step(SimState& state, std::span<const double> theta_cmd_deg, double dt_control = 0.01) const;

  // Advances by dt_control with directly applied joint torques (clamped to tau_max
  // unless tau_max is zero).
  void step_torque(SimState& state, std::span<const double> torques, double dt_control = 0.01) const;

  double kinetic_energy(const SimState& state) const;
  double potential_energy(const SimState& state) const;
  Vec2 linear_momentum(const SimState& state) const;

  // World positions of the contact points / body frames.
  std::vector<Vec2> contact_positions(const SimState& state) const;
  std::vector<Vec2> body_origins(const SimState& state) const;
  // Per-leg contact (any of the leg's contact points loaded).
  std::vector<bool> foot_contacts(const SimState& state) const;

  std::vector<double> joint_angles_deg(const SimState& state) const;

  // Refreshes state.base from the generalized coordinates.
  void update_base(SimState& state) const;

 private:
  struct Actuation;
  void substep(SimState& state, const Actuation& act, double dt) const;
  void integrate(SimState& state, const Actuation& act, double dt_control) const;

  RobotModel model_;
  SimConfig config_;
  int dof_ = 0;
  int rot_offset_ = 0;  // index of the first rotational dof (pitch or joint 0)
};

// Schedules random horizontal pushes on the trunk.
class PushDisturbance {
 public:
  explicit PushDisturbance(DisturbanceConfig cfg = {});

  // Updates state.push_force for the current time. Deterministic given the RNG stream.
  void apply(SimState& state, std::mt19937_64& rng);
  void reset() { next_onset_ = -1.0; active_until_ = -1.0; force_ = 0.0; }
  const DisturbanceConfig& config() const { return cfg_; }

 private:
  DisturbanceConfig cfg_;
  double next_onset_ = -1.0;
  double active_until_ = -1.0;
  double force_ = 0.0;
};

// Convenience wrapper matching the functional form: push schedule applied to a state.
void apply_push(SimState& state, PushDisturbance& disturbance, std::mt19937_64& rng);

// Upright standing state at the gait's t = 0 reference posture.
SimState reset_robot(const PlanarSim& sim, const GaitDefinition& gait);

void to_json(nlohmann::json& j, const ContactParams& c);
void from_json(const nlohmann::json& j, ContactParams& c);
void to_json(nlohmann::json& j, const DisturbanceConfig& d);
void from_json(const nlohmann::json& j, DisturbanceConfig& d);

}  // namespace inlab
