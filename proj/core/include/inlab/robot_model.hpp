#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "inlab/gait.hpp"
#include "inlab/units.hpp"

namespace inlab {

using Vec2 = Eigen::Vector2d;  // (x forward, z up)

// A rigid link of the planar tree. Body 0 is the floating trunk; body i > 0 is
// moved by joint i - 1 and its parent always has a smaller index.
struct Body {
  std::string name;
  int parent = -1;
  double mass = 0.0;
  double length = 0.0;
  Vec2 com = Vec2::Zero();     // center of mass in the body frame
  double inertia = 0.0;        // about the center of mass, kg m^2
  Vec2 attach = Vec2::Zero();  // joint location in the parent frame
};

struct Joint {
  std::string name;
  JointRange range;  // degrees
  double kp = 0.0;   // N m / rad
  double kd = 0.0;   // N m s / rad
  double tau_max = 0.0;
  int leg = -1;
};

struct ContactPoint {
  int body = 0;
  Vec2 local = Vec2::Zero();
  int leg = -1;  // -1 for trunk contacts
};

struct RobotModel {
  RobotKind kind = RobotKind::Quadruped;
  std::vector<Body> bodies;
  std::vector<Joint> joints;
  std::vector<ContactPoint> contacts;
  int legs = 0;
  // Penalty spring-damper applied beyond the joint range.
  double limit_stiffness = 1.0e5;
  double limit_damping = 200.0;

  int joint_count() const { return static_cast<int>(joints.size()); }
  double total_mass() const;
  std::vector<JointRange> joint_ranges() const;
  // Joint index of the hip and knee pitch joints of a leg.
  int hip_joint(int leg) const;
  int knee_joint(int leg) const;
};

struct LinkSpec {
  double mass = 1.0;
  double length = 0.1;
};

// Mass/geometry and servo parameters the builders use; all overridable from config.
struct RobotGeometry {
  LinkSpec trunk, thigh, shank, foot;
  double kp = 0.0;
  double kd = 0.0;
  double tau_max = 0.0;
};

RobotGeometry default_geometry(RobotKind kind);

RobotModel build_quadruped(const RobotGeometry& geometry = default_geometry(RobotKind::Quadruped));
RobotModel build_biped(const RobotGeometry& geometry = default_geometry(RobotKind::Biped));
RobotModel build_robot(RobotKind kind, const RobotGeometry& geometry);

void to_json(nlohmann::json& j, const RobotGeometry& g);
// Missing fields keep the values already in `g`.
void apply_overrides(const nlohmann::json& j, RobotGeometry& g);

// Single pendulum: a fixed trunk carrying one unactuated link. Used to validate
// the integrator against an independent ODE solution.
RobotModel build_pendulum(double mass, double length);

}  // namespace inlab
