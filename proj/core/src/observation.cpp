#include "inlab/observation.hpp"

#include <cmath>

#include "inlab/error.hpp"

namespace inlab {

std::string to_string(ObsVariant v) {
  switch (v) {
    case ObsVariant::Full: return "full";
    case ObsVariant::FullRO: return "full_ro";
    case ObsVariant::Hardware: return "hardware";
  }
  return "full";
}

ObsVariant obs_variant_from_string(const std::string& name) {
  if (name == "full") return ObsVariant::Full;
  if (name == "full_ro" || name == "full_RO") return ObsVariant::FullRO;
  if (name == "hardware") return ObsVariant::Hardware;
  throw ConfigError("unknown observation variant '" + name + "'");
}

int ObservationLayout::size() const {
  switch (variant) {
    case ObsVariant::Full: return 10 + 2 * joint_count;
    case ObsVariant::FullRO: return 10 + 3 * joint_count;
    case ObsVariant::Hardware: return 5 + 2 * joint_count;
  }
  return 0;
}

double scale_joint_angle(double theta_deg, const JointRange& range) {
  return (theta_deg - range.mid()) / range.half_span();
}

Vec2 body_velocity(const BaseState& base) {
  // World-to-body is the inverse pitch rotation.
  const double c = std::cos(base.pitch), s = std::sin(base.pitch);
  return Vec2(base.vx * c - base.vz * s, base.vx * s + base.vz * c);
}

void observe(const SimState& state, const ObservationLayout& layout,
             std::span<const JointRange> ranges, std::span<const double> theta_ref_deg,
             std::span<double> out) {
  const int n = layout.joint_count;
  if (state.joints != n || static_cast<int>(ranges.size()) != n) {
    throw ConfigError("observe: joint count mismatch");
  }
  if (static_cast<int>(out.size()) != layout.size()) {
    throw ConfigError("observe: output buffer has the wrong size");
  }
  if (layout.uses_reference() != !theta_ref_deg.empty()) {
    throw ConfigError("observe: reference angles must be supplied iff the layout includes them");
  }
  if (layout.uses_reference() && static_cast<int>(theta_ref_deg.size()) != n) {
    throw ConfigError("observe: reference size mismatch");
  }

  const BaseState& b = state.base;
  std::size_t k = 0;
  if (layout.variant == ObsVariant::Hardware) {
    out[k++] = b.pitch;
    out[k++] = 0.0;  // roll
  } else {
    out[k++] = std::cos(0.5 * b.pitch);
    out[k++] = 0.0;
    out[k++] = std::sin(0.5 * b.pitch);
    out[k++] = 0.0;
  }
  out[k++] = 0.0;
  out[k++] = b.pitch_rate;
  out[k++] = 0.0;
  if (layout.variant != ObsVariant::Hardware) {
    const Vec2 v = body_velocity(b);
    out[k++] = v.x();
    out[k++] = 0.0;
    out[k++] = v.y();
  }
  for (int j = 0; j < n; ++j) out[k++] = scale_joint_angle(rad2deg(state.joint_angle(j)), ranges[j]);
  for (int j = 0; j < n; ++j) out[k++] = kJointRateScale * state.joint_velocity(j);
  if (layout.uses_reference()) {
    for (int j = 0; j < n; ++j) out[k++] = scale_joint_angle(theta_ref_deg[j], ranges[j]);
  }
}

std::vector<double> observe(const SimState& state, const ObservationLayout& layout,
                            std::span<const JointRange> ranges,
                            std::span<const double> theta_ref_deg) {
  std::vector<double> out(layout.size());
  observe(state, layout, ranges, theta_ref_deg, out);
  return out;
}

}  // namespace inlab
