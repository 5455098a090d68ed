#pragma once

#include <algorithm>
#include <numbers>

namespace inlab {

constexpr double kPi = std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Joint range of motion in degrees.
struct JointRange {
  double theta_min = -180.0;
  double theta_max = 180.0;

  constexpr double span() const { return theta_max - theta_min; }
  constexpr double mid() const { return 0.5 * (theta_min + theta_max); }
  constexpr double half_span() const { return 0.5 * span(); }
  constexpr double clamp(double deg) const { return std::clamp(deg, theta_min, theta_max); }
  constexpr bool contains(double deg) const { return deg >= theta_min && deg <= theta_max; }
};

}  // namespace inlab
