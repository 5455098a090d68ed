#include "inlab/robot_model.hpp"

#include "inlab/error.hpp"

namespace inlab {

double RobotModel::total_mass() const {
  double m = 0.0;
  for (const auto& b : bodies) m += b.mass;
  return m;
}

std::vector<JointRange> RobotModel::joint_ranges() const {
  std::vector<JointRange> out;
  out.reserve(joints.size());
  for (const auto& j : joints) out.push_back(j.range);
  return out;
}

int RobotModel::hip_joint(int leg) const {
  const int per_leg = kind == RobotKind::Quadruped ? 2 : 3;
  return per_leg * leg;
}

int RobotModel::knee_joint(int leg) const { return hip_joint(leg) + 1; }

RobotGeometry default_geometry(RobotKind kind) {
  RobotGeometry g;
  if (kind == RobotKind::Quadruped) {
    g.trunk = {6.0, 0.36};
    g.thigh = {1.0, 0.2};
    g.shank = {0.2, 0.2};
    g.foot = {0.0, 0.0};
    g.kp = 180.0;
    g.kd = 8.0;
    g.tau_max = 33.5;
  } else {
    g.trunk = {8.0, 0.4};
    g.thigh = {1.5, 0.3};
    g.shank = {1.0, 0.3};
    g.foot = {0.3, 0.15};
    g.kp = 2000.0;
    g.kd = 100.0;
    g.tau_max = 200.0;
  }
  return g;
}

namespace {

double rod_inertia(double mass, double length) { return mass * length * length / 12.0; }

Body leg_link(const std::string& name, int parent, const LinkSpec& spec, Vec2 attach) {
  Body b;
  b.name = name;
  b.parent = parent;
  b.mass = spec.mass;
  b.length = spec.length;
  b.com = Vec2(0.0, -0.5 * spec.length);
  b.inertia = rod_inertia(spec.mass, spec.length);
  b.attach = attach;
  return b;
}

Joint servo(const std::string& name, JointRange range, const RobotGeometry& g, int leg) {
  return Joint{name, range, g.kp, g.kd, g.tau_max, leg};
}

}  // namespace

RobotModel build_quadruped(const RobotGeometry& g) {
  RobotModel m;
  m.kind = RobotKind::Quadruped;
  m.legs = 4;

  Body trunk;
  trunk.name = "trunk";
  trunk.mass = g.trunk.mass;
  trunk.length = g.trunk.length;
  trunk.inertia = g.trunk.mass * (g.trunk.length * g.trunk.length + 0.1 * 0.1) / 12.0;
  m.bodies.push_back(trunk);

  const double half = 0.5 * g.trunk.length;
  const char* leg_names[] = {"FL", "FR", "HL", "HR"};
  const double hip_x[] = {half, half, -half, -half};
  const JointRange hip_range{-90.0, 210.0};
  const JointRange knee_range{-94.5, 7.5};

  for (int leg = 0; leg < 4; ++leg) {
    const std::string n = leg_names[leg];
    const int thigh = static_cast<int>(m.bodies.size());
    m.bodies.push_back(leg_link(n + "_thigh", 0, g.thigh, Vec2(hip_x[leg], 0.0)));
    m.joints.push_back(servo(n + "_hip_pitch", hip_range, g, leg));
    const int shank = static_cast<int>(m.bodies.size());
    m.bodies.push_back(leg_link(n + "_shank", thigh, g.shank, Vec2(0.0, -g.thigh.length)));
    m.joints.push_back(servo(n + "_knee_pitch", knee_range, g, leg));
    m.contacts.push_back({shank, Vec2(0.0, -g.shank.length), leg});
  }
  // Belly corners so a collapsed robot rests on the ground.
  m.contacts.push_back({0, Vec2(half, -0.05), -1});
  m.contacts.push_back({0, Vec2(-half, -0.05), -1});
  return m;
}

RobotModel build_biped(const RobotGeometry& g) {
  RobotModel m;
  m.kind = RobotKind::Biped;
  m.legs = 2;

  // Trunk frame origin at the hip axis; the trunk stands upright above it.
  Body trunk;
  trunk.name = "trunk";
  trunk.mass = g.trunk.mass;
  trunk.length = g.trunk.length;
  trunk.com = Vec2(0.0, 0.5 * g.trunk.length);
  trunk.inertia = g.trunk.mass * (g.trunk.length * g.trunk.length + 0.2 * 0.2) / 12.0;
  m.bodies.push_back(trunk);

  const JointRange hip_range{-60.0, 120.0};
  const JointRange knee_range{-170.0, 10.0};
  const JointRange ankle_range{-60.0, 60.0};
  const char* leg_names[] = {"L", "R"};
  const double heel = 0.25 * g.foot.length;
  const double sole = 0.05;

  for (int leg = 0; leg < 2; ++leg) {
    const std::string n = leg_names[leg];
    const int thigh = static_cast<int>(m.bodies.size());
    m.bodies.push_back(leg_link(n + "_thigh", 0, g.thigh, Vec2::Zero()));
    m.joints.push_back(servo(n + "_hip_pitch", hip_range, g, leg));
    const int shank = static_cast<int>(m.bodies.size());
    m.bodies.push_back(leg_link(n + "_shank", thigh, g.shank, Vec2(0.0, -g.thigh.length)));
    m.joints.push_back(servo(n + "_knee_pitch", knee_range, g, leg));

    Body foot;
    foot.name = n + "_foot";
    foot.parent = shank;
    foot.mass = g.foot.mass;
    foot.length = g.foot.length;
    foot.com = Vec2(0.5 * g.foot.length - heel, -0.8 * sole);
    foot.inertia = g.foot.mass * (g.foot.length * g.foot.length + sole * sole) / 12.0;
    foot.attach = Vec2(0.0, -g.shank.length);
    const int foot_body = static_cast<int>(m.bodies.size());
    m.bodies.push_back(foot);
    m.joints.push_back(servo(n + "_ankle_pitch", ankle_range, g, leg));

    m.contacts.push_back({foot_body, Vec2(-heel, -sole), leg});
    m.contacts.push_back({foot_body, Vec2(g.foot.length - heel, -sole), leg});
  }
  m.contacts.push_back({0, Vec2(0.0, -0.02), -1});
  return m;
}

RobotModel build_robot(RobotKind kind, const RobotGeometry& geometry) {
  return kind == RobotKind::Quadruped ? build_quadruped(geometry) : build_biped(geometry);
}

RobotModel build_pendulum(double mass, double length) {
  RobotModel m;
  m.kind = RobotKind::Quadruped;
  m.legs = 0;
  Body base;
  base.name = "base";
  base.mass = 1.0;
  base.inertia = 1.0;
  m.bodies.push_back(base);
  Body link;
  link.name = "link";
  link.parent = 0;
  link.mass = mass;
  link.length = length;
  link.com = Vec2(0.0, -0.5 * length);
  link.inertia = rod_inertia(mass, length);
  m.bodies.push_back(link);
  m.joints.push_back(Joint{"pivot", JointRange{-360.0, 360.0}, 0.0, 0.0, 0.0, -1});
  return m;
}

void to_json(nlohmann::json& j, const RobotGeometry& g) {
  auto link = [](const LinkSpec& s) { return nlohmann::json{{"mass", s.mass}, {"length", s.length}}; };
  j = nlohmann::json{{"trunk", link(g.trunk)}, {"thigh", link(g.thigh)}, {"shank", link(g.shank)},
                     {"foot", link(g.foot)},   {"kp", g.kp},          {"kd", g.kd},
                     {"tau_max", g.tau_max}};
}

void apply_overrides(const nlohmann::json& j, RobotGeometry& g) {
  auto link = [&](const char* key, LinkSpec& s) {
    if (!j.contains(key)) return;
    const auto& l = j.at(key);
    s.mass = l.value("mass", s.mass);
    s.length = l.value("length", s.length);
    if (!(s.length > 0.0) || s.mass < 0.0) {
      throw ConfigError(std::string("invalid link override for '") + key + "'");
    }
  };
  link("trunk", g.trunk);
  link("thigh", g.thigh);
  link("shank", g.shank);
  link("foot", g.foot);
  g.kp = j.value("kp", g.kp);
  g.kd = j.value("kd", g.kd);
  g.tau_max = j.value("tau_max", g.tau_max);
}

}  // namespace inlab
