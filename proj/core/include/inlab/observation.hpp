#pragma once

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

#include "inlab/planar_sim.hpp"

namespace inlab {

enum class ObsVariant { Full, FullRO, Hardware };

std::string to_string(ObsVariant v);
ObsVariant obs_variant_from_string(const std::string& name);

// Layouts (n = joint_count):
//   Full:     quaternion(4) angular velocity(3) linear velocity(3) theta(n) theta_dot(n)
//   FullRO:   Full followed by theta_ref(n)
//   Hardware: pitch, roll, angular velocity(3), theta(n), theta_dot(n)
// Orientation and velocities are expressed in the body frame.
struct ObservationLayout {
  ObsVariant variant = ObsVariant::Full;
  int joint_count = 0;

  int size() const;
  bool uses_reference() const { return variant == ObsVariant::FullRO; }
};

// Joint velocities enter the observation multiplied by this factor (rad/s).
inline constexpr double kJointRateScale = 0.1;

// Joint angles (degrees) map to (theta - mid) / half_span.
double scale_joint_angle(double theta_deg, const JointRange& range);

// Writes the observation into `out` (size layout.size()). `theta_ref_deg` must be
// non-empty exactly when the layout uses the reference.
void observe(const SimState& state, const ObservationLayout& layout,
             std::span<const JointRange> ranges, std::span<const double> theta_ref_deg,
             std::span<double> out);

std::vector<double> observe(const SimState& state, const ObservationLayout& layout,
                            std::span<const JointRange> ranges,
                            std::span<const double> theta_ref_deg = {});

// Base velocity rotated into the body frame: (forward, vertical).
Vec2 body_velocity(const BaseState& base);

}  // namespace inlab
