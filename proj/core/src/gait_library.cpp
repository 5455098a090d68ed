#include <algorithm>

#include "inlab/error.hpp"
#include "inlab/gait.hpp"

namespace inlab {

std::string to_string(RobotKind kind) {
  return kind == RobotKind::Biped ? "biped" : "quadruped";
}

RobotKind robot_kind_from_string(const std::string& name) {
  if (name == "biped") return RobotKind::Biped;
  if (name == "quadruped") return RobotKind::Quadruped;
  throw ConfigError("unknown robot '" + name + "' (expected biped or quadruped)");
}

void to_json(nlohmann::json& j, const GaitParams& p) {
  j = nlohmann::json{{"period", p.period},
                     {"hip_amplitude", p.hip_amplitude},
                     {"knee_amplitude", p.knee_amplitude},
                     {"ankle_amplitude", p.ankle_amplitude}};
}

void from_json(const nlohmann::json& j, GaitParams& p) {
  GaitParams d;
  p.period = j.value("period", d.period);
  p.hip_amplitude = j.value("hip_amplitude", d.hip_amplitude);
  p.knee_amplitude = j.value("knee_amplitude", d.knee_amplitude);
  p.ankle_amplitude = j.value("ankle_amplitude", d.ankle_amplitude);
}

// Joint angles are rotations about the lateral (+y) axis with x forward and z
// up, so a positive hip angle swings a hanging leg backward and a negative knee
// angle folds the shank forward. The nominal stance keeps each foot under its
// hip (hip + knee/2 = 0).
std::vector<double> nominal_pose(RobotKind robot) {
  if (robot == RobotKind::Quadruped) {
    return {25.0, -50.0, 25.0, -50.0, 25.0, -50.0, 25.0, -50.0};
  }
  return {20.0, -40.0, 20.0, 20.0, -40.0, 20.0};
}

namespace {

// Swing lift peaks at local phase 0.75 and bottoms out at 0.25, so a leg is in
// stance over local phase [0, 0.5) and swings over [0.5, 1).
constexpr double kSwingPhase = 0.75;

GaitDefinition quadruped_gait(const std::string& name, std::vector<double> offsets,
                              const GaitParams& p) {
  const auto pose = nominal_pose(RobotKind::Quadruped);
  GaitDefinition g;
  g.name = name;
  g.gait_period = p.period;
  g.leg_phase_offsets = std::move(offsets);
  for (int leg = 0; leg < 4; ++leg) {
    g.joints.push_back({2 * leg, leg,
                        TrajectorySpec::sinusoid(pose[2 * leg], p.hip_amplitude, p.period,
                                                 kSwingPhase)});
    g.joints.push_back({2 * leg + 1, leg,
                        TrajectorySpec::sinusoid(pose[2 * leg + 1], -p.knee_amplitude, p.period,
                                                 kSwingPhase)});
  }
  return g;
}

struct BipedLegSpecs {
  TrajectorySpec hip, knee, ankle;
};

GaitDefinition biped_gait(const std::string& name, std::vector<double> offsets,
                          const BipedLegSpecs& leg_specs, const GaitParams& p) {
  GaitDefinition g;
  g.name = name;
  g.gait_period = p.period;
  g.leg_phase_offsets = std::move(offsets);
  for (int leg = 0; leg < 2; ++leg) {
    g.joints.push_back({3 * leg, leg, leg_specs.hip});
    g.joints.push_back({3 * leg + 1, leg, leg_specs.knee});
    g.joints.push_back({3 * leg + 2, leg, leg_specs.ankle});
  }
  return g;
}

BipedLegSpecs biped_swing(const GaitParams& p, bool level_foot) {
  const auto pose = nominal_pose(RobotKind::Biped);
  BipedLegSpecs s;
  s.hip = TrajectorySpec::sinusoid(pose[0], p.hip_amplitude, p.period, kSwingPhase);
  s.knee = TrajectorySpec::sinusoid(pose[1], -p.knee_amplitude, p.period, kSwingPhase);
  s.ankle = level_foot
                ? TrajectorySpec::sinusoid(pose[2], p.knee_amplitude - p.hip_amplitude, p.period,
                                           kSwingPhase)
                : TrajectorySpec::constant(pose[2]);
  return s;
}

// Slow crouch by `crouch` degrees over the first half cycle, then a half-cosine
// extension back to the nominal angle.
TrajectorySpec crouch_and_extend(double nominal, double crouch, double period) {
  std::vector<CompositeTerm> terms;
  terms.push_back({TrajectorySpec::ramp(nominal, crouch, 0.5 * period), 1.0, 0.0, 0.5});
  terms.push_back({TrajectorySpec::sinusoid(nominal + crouch, -crouch, period), 1.0, 0.5, 1.0});
  return TrajectorySpec::composite(std::move(terms), period);
}

}  // namespace

GaitDefinition make_gait(RobotKind robot, const std::string& name, const GaitParams& p) {
  if (robot == RobotKind::Quadruped) {
    // Legs: 0 front-left, 1 front-right, 2 hind-left, 3 hind-right.
    if (name == "trot" || name == "stepping") return quadruped_gait(name, {0.0, 0.5, 0.5, 0.0}, p);
    if (name == "pace") return quadruped_gait(name, {0.0, 0.5, 0.0, 0.5}, p);
    if (name == "bound") return quadruped_gait(name, {0.0, 0.0, 0.5, 0.5}, p);
    if (name == "pronk") return quadruped_gait(name, {0.0, 0.0, 0.0, 0.0}, p);
    throw ConfigError("unknown quadruped gait '" + name + "'");
  }

  const auto pose = nominal_pose(RobotKind::Biped);
  if (name == "walk" || name == "stepping") {
    return biped_gait(name, {0.0, 0.5}, biped_swing(p, false), p);
  }
  if (name == "level_walk") return biped_gait(name, {0.0, 0.5}, biped_swing(p, true), p);
  if (name == "march_walk") {
    // Larger hip swing with an extra ramped knee-up during the swing half.
    GaitParams big = p;
    big.hip_amplitude = 1.5 * p.hip_amplitude;
    BipedLegSpecs s = biped_swing(big, true);
    const double lift = 0.5 * p.hip_amplitude;
    std::vector<CompositeTerm> hip_terms;
    hip_terms.push_back({s.hip, 1.0, 0.0, 1.0});
    hip_terms.push_back({TrajectorySpec::ramp(0.0, lift, 0.25 * p.period), 1.0, 0.5, 0.75});
    hip_terms.push_back({TrajectorySpec::ramp(lift, -lift, 0.25 * p.period), 1.0, 0.75, 1.0});
    // The composite evaluates the sinusoid term at time since the window start,
    // so it carries the swing phase itself and the composite has none.
    s.hip = TrajectorySpec::composite(std::move(hip_terms), p.period);
    return biped_gait(name, {0.0, 0.5}, s, p);
  }
  if (name == "hop") {
    BipedLegSpecs s;
    s.hip = crouch_and_extend(pose[0], p.hip_amplitude, p.period);
    s.knee = crouch_and_extend(pose[1], -p.knee_amplitude, p.period);
    s.ankle = crouch_and_extend(pose[2], p.knee_amplitude - p.hip_amplitude, p.period);
    return biped_gait(name, {0.0, 0.0}, s, p);
  }
  if (name == "jump") return biped_gait(name, {0.0, 0.0}, biped_swing(p, true), p);
  throw ConfigError("unknown biped gait '" + name + "'");
}

std::vector<std::string> gait_names(RobotKind robot) {
  if (robot == RobotKind::Quadruped) return {"trot", "pace", "bound", "pronk"};
  return {"walk", "level_walk", "march_walk", "hop", "jump"};
}

}  // namespace inlab
