#include "inlab/planar_sim.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "inlab/error.hpp"

namespace inlab {

namespace {

constexpr int kMaxDof = 16;

using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDof, kMaxDof>;
using VecD = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDof, 1>;
using Jac = Eigen::Matrix<double, 2, Eigen::Dynamic, 0, 2, kMaxDof>;

// Rotation about +y acting on (x, z).
Vec2 rotate(double angle, const Vec2& v) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Vec2(v.x() * c + v.y() * s, -v.x() * s + v.y() * c);
}

// d/d(angle) of rotate(angle, v) expressed through r = rotate(angle, v).
Vec2 perp(const Vec2& r) { return Vec2(r.y(), -r.x()); }

}  // namespace

void ContactParams::validate() const {
  if (!(stiffness > 0.0 && damping > 0.0 && reg_velocity > 0.0)) {
    throw ConfigError("contact parameters must be positive");
  }
  if (!(friction > 0.0 && friction <= 2.0)) throw ConfigError("friction must lie in (0, 2]");
}

void DisturbanceConfig::validate() const {
  if (magnitude_min < 0.0 || magnitude_max < magnitude_min || interval_min < 0.0 ||
      interval_max < interval_min || duration < 0.0) {
    throw ConfigError("disturbance ranges must be nonnegative and ordered");
  }
}

double pd_torque(double theta_cmd, double theta, double theta_dot, double kp, double kd,
                 double tau_max) {
  const double tau = kp * (theta_cmd - theta) - kd * theta_dot;
  return std::clamp(tau, -tau_max, tau_max);
}

double smooth_sign(double v, double reg_velocity) {
  if (v > reg_velocity) return 1.0;
  if (v < -reg_velocity) return -1.0;
  return v / reg_velocity;
}

Vec2 contact_force(const Vec2& position, const Vec2& velocity, const ContactParams& params) {
  if (position.y() >= 0.0) return Vec2::Zero();
  const double penetration = -position.y();
  // velocity.y() > 0 means separating.
  const double normal = std::max(0.0, params.stiffness * penetration - params.damping * velocity.y());
  const double tangential =
      -params.friction * normal * smooth_sign(velocity.x(), params.reg_velocity);
  return Vec2(tangential, normal);
}

Termination check_termination(const SimState& state, std::int64_t max_steps) {
  if (std::abs(rad2deg(state.base.pitch)) > kFallPitchDeg) return Termination::Fell;
  if (state.step >= max_steps) return Termination::Timeout;
  return Termination::Continue;
}

// ---------------------------------------------------------------------------

struct PlanarSim::Actuation {
  enum class Kind { Servo, Torque } kind = Kind::Servo;
  std::span<const double> values;  // radians (servo) or N m (torque)
};

namespace {

// Positions/velocities of every body for one configuration.
struct Kinematics {
  std::vector<double> angle;
  std::vector<double> omega;
  std::vector<Vec2> origin;  // world
  std::vector<Vec2> com;     // world
  Vec2 shift = Vec2::Zero();
  Vec2 mean_com_rel = Vec2::Zero();
};

}  // namespace

PlanarSim::PlanarSim(RobotModel model, SimConfig config)
    : model_(std::move(model)), config_(std::move(config)) {
  if (model_.bodies.empty()) throw ConfigError("robot model has no bodies");
  if (model_.bodies.size() != model_.joints.size() + 1) {
    throw ConfigError("robot model must have one joint per non-trunk body");
  }
  for (std::size_t b = 1; b < model_.bodies.size(); ++b) {
    const int p = model_.bodies[b].parent;
    if (p < 0 || p >= static_cast<int>(b)) throw ConfigError("bodies must be topologically ordered");
  }
  if (config_.substeps < 1) throw ConfigError("substeps must be at least 1");
  config_.contact.validate();
  rot_offset_ = config_.fixed_base ? 0 : 2;
  dof_ = config_.fixed_base ? model_.joint_count() : 3 + model_.joint_count();
  if (dof_ > kMaxDof) throw ConfigError("robot exceeds the maximum supported dof count");
}

namespace {

struct Frame {
  const RobotModel& model;
  const SimConfig& config;
  int joint_offset;
  int dof;
};

Kinematics compute_kinematics(const Frame& f, const Eigen::VectorXd& q, const Eigen::VectorXd& v) {
  const auto& bodies = f.model.bodies;
  const std::size_t nb = bodies.size();
  Kinematics k;
  k.angle.resize(nb);
  k.omega.resize(nb);
  k.origin.resize(nb);
  k.com.resize(nb);

  const bool floating = !f.config.fixed_base;
  k.angle[0] = floating ? q[2] : f.config.base_pose[2];
  k.omega[0] = floating ? v[2] : 0.0;
  k.origin[0] = Vec2::Zero();
  k.com[0] = rotate(k.angle[0], bodies[0].com);
  for (std::size_t b = 1; b < nb; ++b) {
    const int p = bodies[b].parent;
    const int j = f.joint_offset + static_cast<int>(b) - 1;
    k.angle[b] = k.angle[p] + q[j];
    k.omega[b] = k.omega[p] + v[j];
    k.origin[b] = k.origin[p] + rotate(k.angle[p], bodies[b].attach);
    k.com[b] = k.origin[b] + rotate(k.angle[b], bodies[b].com);
  }

  if (floating) {
    Vec2 mc = Vec2::Zero();
    double mt = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      mc += bodies[b].mass * k.com[b];
      mt += bodies[b].mass;
    }
    k.mean_com_rel = mc / mt;
    k.shift = Vec2(q[0], q[1]) - k.mean_com_rel;
  } else {
    k.shift = f.config.base_pose.head<2>();
  }
  for (std::size_t b = 0; b < nb; ++b) {
    k.origin[b] += k.shift;
    k.com[b] += k.shift;
  }
  return k;
}

// Jacobian of a world point fixed on `body`, before removing the mean COM motion.
void point_jacobian_rel(const Frame& f, const Kinematics& k, int body, const Vec2& p, Jac& J) {
  J.setZero(2, f.dof);
  int a = body;
  while (a >= 1) {
    J.col(f.joint_offset + a - 1) = perp(p - k.origin[a]);
    a = f.model.bodies[a].parent;
  }
  if (!f.config.fixed_base) J.col(2) = perp(p - k.origin[0]);
}

}  // namespace

SimState PlanarSim::make_state(double x, double z, double pitch,
                               std::span<const double> joints_rad) const {
  if (static_cast<int>(joints_rad.size()) != model_.joint_count()) {
    throw ConfigError("make_state: joint count mismatch");
  }
  SimState s;
  s.joints = model_.joint_count();
  s.q = Eigen::VectorXd::Zero(dof_);
  s.v = Eigen::VectorXd::Zero(dof_);
  const int jo = dof_ - s.joints;
  for (int j = 0; j < s.joints; ++j) s.q[jo + j] = joints_rad[j];
  if (!config_.fixed_base) {
    s.q[2] = pitch;
    // Place the trunk origin at (x, z): the COM coordinates follow from kinematics.
    s.q[0] = 0.0;
    s.q[1] = 0.0;
    Frame f{model_, config_, jo, dof_};
    const auto k = compute_kinematics(f, s.q, s.v);
    s.q[0] = x + k.mean_com_rel.x();
    s.q[1] = z + k.mean_com_rel.y();
  }
  s.contact.assign(model_.contacts.size(), false);
  update_base(s);
  return s;
}

SimState PlanarSim::standing_state(std::span<const double> joints_deg) const {
  std::vector<double> rad(joints_deg.size());
  std::transform(joints_deg.begin(), joints_deg.end(), rad.begin(), deg2rad);
  SimState s = make_state(0.0, 0.0, 0.0, rad);
  double lowest = 0.0;
  bool any = false;
  const auto pts = contact_positions(s);
  for (std::size_t c = 0; c < pts.size(); ++c) {
    if (model_.contacts[c].leg < 0) continue;
    lowest = any ? std::min(lowest, pts[c].y()) : pts[c].y();
    any = true;
  }
  return make_state(0.0, any ? -lowest : 0.0, 0.0, rad);
}

void PlanarSim::update_base(SimState& s) const {
  if (config_.fixed_base) {
    s.base = BaseState{config_.base_pose[0], config_.base_pose[1], config_.base_pose[2], 0, 0, 0};
    return;
  }
  const int jo = dof_ - s.joints;
  Frame f{model_, config_, jo, dof_};
  const auto k = compute_kinematics(f, s.q, s.v);
  // Trunk origin velocity = COM velocity - d/dt(mean COM offset).
  Vec2 mean_rate = Vec2::Zero();
  double mt = 0.0;
  Jac J;
  for (std::size_t b = 0; b < model_.bodies.size(); ++b) {
    point_jacobian_rel(f, k, static_cast<int>(b), k.com[b], J);
    mean_rate += model_.bodies[b].mass * (J.rightCols(dof_ - 2) * s.v.tail(dof_ - 2));
    mt += model_.bodies[b].mass;
  }
  mean_rate /= mt;
  Jac J0;
  point_jacobian_rel(f, k, 0, k.origin[0], J0);
  const Vec2 rel_rate = J0.rightCols(dof_ - 2) * s.v.tail(dof_ - 2);
  s.base.x = k.origin[0].x();
  s.base.z = k.origin[0].y();
  s.base.pitch = s.q[2];
  s.base.vx = s.v[0] + rel_rate.x() - mean_rate.x();
  s.base.vz = s.v[1] + rel_rate.y() - mean_rate.y();
  s.base.pitch_rate = s.v[2];
}

void PlanarSim::step(SimState& state, std::span<const double> theta_cmd_deg,
                     double dt_control) const {
  if (static_cast<int>(theta_cmd_deg.size()) != model_.joint_count()) {
    throw ConfigError("step: command size mismatch");
  }
  std::vector<double> cmd(theta_cmd_deg.size());
  std::transform(theta_cmd_deg.begin(), theta_cmd_deg.end(), cmd.begin(), deg2rad);
  integrate(state, Actuation{Actuation::Kind::Servo, cmd}, dt_control);
}

void PlanarSim::step_torque(SimState& state, std::span<const double> torques,
                            double dt_control) const {
  if (static_cast<int>(torques.size()) != model_.joint_count()) {
    throw ConfigError("step_torque: torque size mismatch");
  }
  integrate(state, Actuation{Actuation::Kind::Torque, torques}, dt_control);
}

void PlanarSim::integrate(SimState& state, const Actuation& act, double dt_control) const {
  const double dt = dt_control / config_.substeps;
  for (int i = 0; i < config_.substeps; ++i) substep(state, act, dt);
  if (!state.q.allFinite() || !state.v.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite state at t=" << state.time;
    throw SimulationBlowup(msg.str());
  }
  state.time += dt_control;
  state.step += 1;
  update_base(state);
}

void PlanarSim::substep(SimState& s, const Actuation& act, double dt) const {
  const int n = dof_;
  const int jo = n - s.joints;
  const bool floating = !config_.fixed_base;
  const auto& bodies = model_.bodies;
  const std::size_t nb = bodies.size();
  Frame f{model_, config_, jo, n};
  const Kinematics k = compute_kinematics(f, s.q, s.v);

  // Center-of-mass Jacobians with the whole-body mean removed (floating base).
  std::vector<Jac> Jc(nb);
  for (std::size_t b = 0; b < nb; ++b) point_jacobian_rel(f, k, static_cast<int>(b), k.com[b], Jc[b]);
  Jac mean_J = Jac::Zero(2, n);
  const double mt = model_.total_mass();
  if (floating) {
    for (std::size_t b = 0; b < nb; ++b) mean_J += bodies[b].mass * Jc[b];
    mean_J /= mt;
    for (std::size_t b = 0; b < nb; ++b) Jc[b] -= mean_J;
  }

  // Velocity-product accelerations of the COMs (q_ddot = 0).
  std::vector<Vec2> bias_origin(nb), bias_com(nb);
  bias_origin[0] = Vec2::Zero();
  bias_com[0] = -k.omega[0] * k.omega[0] * (k.com[0] - k.origin[0]);
  for (std::size_t b = 1; b < nb; ++b) {
    const int p = bodies[b].parent;
    bias_origin[b] = bias_origin[p] - k.omega[p] * k.omega[p] * (k.origin[b] - k.origin[p]);
    bias_com[b] = bias_origin[b] - k.omega[b] * k.omega[b] * (k.com[b] - k.origin[b]);
  }
  if (floating) {
    Vec2 mean_bias = Vec2::Zero();
    for (std::size_t b = 0; b < nb; ++b) mean_bias += bodies[b].mass * bias_com[b];
    mean_bias /= mt;
    for (auto& a : bias_com) a -= mean_bias;
  }

  MatD M = MatD::Zero(n, n);
  VecD h = VecD::Zero(n);
  VecD Q = VecD::Zero(n);
  MatD K = MatD::Zero(n, n);
  MatD D = MatD::Zero(n, n);
  const Vec2 g(0.0, -config_.gravity);

  for (std::size_t b = 0; b < nb; ++b) {
    const double m = bodies[b].mass;
    M.noalias() += m * Jc[b].transpose() * Jc[b];
    h.noalias() += m * Jc[b].transpose() * bias_com[b];
    if (!floating) Q.noalias() += m * Jc[b].transpose() * g;
    // Angular velocity of body b is the sum of the pitch and ancestor joint rates.
    if (floating) M(2, 2) += bodies[b].inertia;
    for (int a = static_cast<int>(b); a >= 1; a = bodies[a].parent) {
      const int ja = jo + a - 1;
      if (floating) {
        M(2, ja) += bodies[b].inertia;
        M(ja, 2) += bodies[b].inertia;
      }
      for (int c = static_cast<int>(b); c >= 1; c = bodies[c].parent) {
        M(ja, jo + c - 1) += bodies[b].inertia;
      }
    }
  }
  if (floating) {
    // The center of mass is decoupled from the rotational coordinates.
    M.topLeftCorner(2, 2) = mt * Eigen::Matrix2d::Identity();
    M.block(0, 2, 2, n - 2).setZero();
    M.block(2, 0, n - 2, 2).setZero();
    h.head<2>().setZero();
    Q[1] += mt * g.y();
  }

  // Joint actuation and limits.
  std::vector<bool> limited(s.joints, false);
  auto add_limit = [&](int d, double excess, double rate) {
    Q[d] += -model_.limit_stiffness * excess - model_.limit_damping * rate;
    K(d, d) += model_.limit_stiffness;
    D(d, d) += model_.limit_damping;
    limited[d - jo] = true;
  };
  for (int j = 0; j < s.joints; ++j) {
    const auto& joint = model_.joints[j];
    const int d = jo + j;
    const double theta = s.q[d];
    const double rate = s.v[d];
    if (act.kind == Actuation::Kind::Servo) {
      const double raw = joint.kp * (act.values[j] - theta) - joint.kd * rate;
      if (std::abs(raw) <= joint.tau_max) {
        Q[d] += raw;
        K(d, d) += joint.kp;
        D(d, d) += joint.kd;
      } else {
        Q[d] += std::copysign(joint.tau_max, raw);
      }
    } else {
      const double tau = act.values[j];
      Q[d] += joint.tau_max > 0.0 ? std::clamp(tau, -joint.tau_max, joint.tau_max) : tau;
    }
    const double lo = deg2rad(joint.range.theta_min);
    const double hi = deg2rad(joint.range.theta_max);
    if (theta > hi || theta < lo) add_limit(d, theta > hi ? theta - hi : theta - lo, rate);
  }

  // External push on the trunk center of mass.
  if (s.push_force != 0.0) {
    Jac J = Jc[0];
    if (floating) J.leftCols<2>() = Eigen::Matrix2d::Identity();
    Q.noalias() += J.transpose() * Vec2(s.push_force, 0.0);
  }

  // Ground contacts.
  if (config_.contacts_enabled) {
    const auto& cp = config_.contact;
    Jac J;
    for (std::size_t c = 0; c < model_.contacts.size(); ++c) {
      const auto& pt = model_.contacts[c];
      const Vec2 p = k.origin[pt.body] + rotate(k.angle[pt.body], pt.local);
      s.contact[c] = false;
      if (p.y() >= 0.0) continue;
      point_jacobian_rel(f, k, pt.body, p, J);
      if (floating) {
        J -= mean_J;
        J.leftCols<2>() = Eigen::Matrix2d::Identity();
      }
      const Vec2 vel = J * s.v;
      const Vec2 force = contact_force(p, vel, cp);
      if (force.y() <= 0.0) continue;
      s.contact[c] = true;
      Q.noalias() += J.transpose() * force;
      const auto Jz = J.row(1);
      const auto Jx = J.row(0);
      K.noalias() += cp.stiffness * Jz.transpose() * Jz;
      D.noalias() += cp.damping * Jz.transpose() * Jz;
      if (std::abs(vel.x()) < cp.reg_velocity) {
        D.noalias() += (cp.friction * force.y() / cp.reg_velocity) * Jx.transpose() * Jx;
      }
    }
  }

  // Linearly implicit in the stiffness/damping terms, then position update
  // with the new velocity. A joint that would end the substep outside its
  // range gets its limit spring added and the step is solved again, so light
  // links cannot tunnel through a limit within one substep.
  VecD dv;
  for (;;) {
    const MatD A = M + dt * D + (dt * dt) * K;
    const VecD rhs = dt * (Q - h) - (dt * dt) * (K * s.v);
    dv = A.ldlt().solve(rhs);
    bool added = false;
    for (int j = 0; j < s.joints; ++j) {
      const int d = jo + j;
      if (limited[j]) continue;
      const double next = s.q[d] + dt * (s.v[d] + dv[d]);
      const auto& r = model_.joints[j].range;
      if (next > deg2rad(r.theta_max)) {
        add_limit(d, s.q[d] - deg2rad(r.theta_max), s.v[d]);
      } else if (next < deg2rad(r.theta_min)) {
        add_limit(d, s.q[d] - deg2rad(r.theta_min), s.v[d]);
      } else {
        continue;
      }
      limited[j] = true;
      added = true;
    }
    if (!added) break;
  }
  s.v += dv;
  s.q += dt * s.v;
}

double PlanarSim::kinetic_energy(const SimState& s) const {
  const int n = dof_;
  const int jo = n - s.joints;
  Frame f{model_, config_, jo, n};
  const auto k = compute_kinematics(f, s.q, s.v);
  const double mt = model_.total_mass();
  double ke = 0.0;
  Jac J;
  Jac mean_J = Jac::Zero(2, n);
  std::vector<Jac> Jc(model_.bodies.size());
  for (std::size_t b = 0; b < model_.bodies.size(); ++b) {
    point_jacobian_rel(f, k, static_cast<int>(b), k.com[b], Jc[b]);
    mean_J += model_.bodies[b].mass * Jc[b];
  }
  mean_J /= mt;
  for (std::size_t b = 0; b < model_.bodies.size(); ++b) {
    Vec2 vel;
    if (config_.fixed_base) {
      vel = Jc[b] * s.v;
    } else {
      J = Jc[b] - mean_J;
      J.leftCols<2>() = Eigen::Matrix2d::Identity();
      vel = J * s.v;
    }
    ke += 0.5 * model_.bodies[b].mass * vel.squaredNorm();
    ke += 0.5 * model_.bodies[b].inertia * k.omega[b] * k.omega[b];
  }
  return ke;
}

double PlanarSim::potential_energy(const SimState& s) const {
  Frame f{model_, config_, dof_ - s.joints, dof_};
  const auto k = compute_kinematics(f, s.q, s.v);
  double pe = 0.0;
  for (std::size_t b = 0; b < model_.bodies.size(); ++b) {
    pe += model_.bodies[b].mass * config_.gravity * k.com[b].y();
  }
  return pe;
}

Vec2 PlanarSim::linear_momentum(const SimState& s) const {
  if (!config_.fixed_base) return model_.total_mass() * Vec2(s.v[0], s.v[1]);
  Frame f{model_, config_, dof_ - s.joints, dof_};
  const auto k = compute_kinematics(f, s.q, s.v);
  Vec2 p = Vec2::Zero();
  Jac J;
  for (std::size_t b = 0; b < model_.bodies.size(); ++b) {
    point_jacobian_rel(f, k, static_cast<int>(b), k.com[b], J);
    p += model_.bodies[b].mass * (J * s.v);
  }
  return p;
}

std::vector<Vec2> PlanarSim::contact_positions(const SimState& s) const {
  Frame f{model_, config_, dof_ - s.joints, dof_};
  const auto k = compute_kinematics(f, s.q, s.v);
  std::vector<Vec2> out;
  out.reserve(model_.contacts.size());
  for (const auto& pt : model_.contacts) {
    out.push_back(k.origin[pt.body] + rotate(k.angle[pt.body], pt.local));
  }
  return out;
}

std::vector<Vec2> PlanarSim::body_origins(const SimState& s) const {
  Frame f{model_, config_, dof_ - s.joints, dof_};
  return compute_kinematics(f, s.q, s.v).origin;
}

std::vector<bool> PlanarSim::foot_contacts(const SimState& s) const {
  std::vector<bool> out(model_.legs, false);
  for (std::size_t c = 0; c < model_.contacts.size() && c < s.contact.size(); ++c) {
    const int leg = model_.contacts[c].leg;
    if (leg >= 0 && s.contact[c]) out[leg] = true;
  }
  return out;
}

std::vector<double> PlanarSim::joint_angles_deg(const SimState& s) const {
  std::vector<double> out(s.joints);
  for (int j = 0; j < s.joints; ++j) out[j] = rad2deg(s.joint_angle(j));
  return out;
}

// ---------------------------------------------------------------------------

PushDisturbance::PushDisturbance(DisturbanceConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void PushDisturbance::apply(SimState& state, std::mt19937_64& rng) {
  if (!cfg_.enabled) return;
  const double t = state.time;
  if (next_onset_ < 0.0 || t < next_onset_ - cfg_.interval_max) {
    std::uniform_real_distribution<double> first(cfg_.interval_min, cfg_.interval_max);
    next_onset_ = t + first(rng);
  }
  if (t >= next_onset_) {
    std::uniform_real_distribution<double> mag(cfg_.magnitude_min, cfg_.magnitude_max);
    std::bernoulli_distribution sign(0.5);
    std::uniform_real_distribution<double> gap(cfg_.interval_min, cfg_.interval_max);
    force_ = (sign(rng) ? 1.0 : -1.0) * mag(rng);
    active_until_ = next_onset_ + cfg_.duration;
    next_onset_ += std::max(gap(rng), cfg_.duration);
  }
  state.push_force = t < active_until_ ? force_ : 0.0;
}

void apply_push(SimState& state, PushDisturbance& disturbance, std::mt19937_64& rng) {
  disturbance.apply(state, rng);
}

SimState reset_robot(const PlanarSim& sim, const GaitDefinition& gait) {
  const auto refs = reference_angles(gait, 0.0);
  return sim.standing_state(refs);
}

void to_json(nlohmann::json& j, const ContactParams& c) {
  j = nlohmann::json{{"stiffness", c.stiffness},
                     {"damping", c.damping},
                     {"friction", c.friction},
                     {"reg_velocity", c.reg_velocity}};
}

void from_json(const nlohmann::json& j, ContactParams& c) {
  ContactParams d;
  c.stiffness = j.value("stiffness", d.stiffness);
  c.damping = j.value("damping", d.damping);
  c.friction = j.value("friction", d.friction);
  c.reg_velocity = j.value("reg_velocity", d.reg_velocity);
  c.validate();
}

void to_json(nlohmann::json& j, const DisturbanceConfig& d) {
  j = nlohmann::json{{"enabled", d.enabled},
                     {"magnitude_min", d.magnitude_min},
                     {"magnitude_max", d.magnitude_max},
                     {"interval_min", d.interval_min},
                     {"interval_max", d.interval_max},
                     {"duration", d.duration}};
}

void from_json(const nlohmann::json& j, DisturbanceConfig& d) {
  DisturbanceConfig def;
  d.enabled = j.value("enabled", def.enabled);
  d.magnitude_min = j.value("magnitude_min", def.magnitude_min);
  d.magnitude_max = j.value("magnitude_max", def.magnitude_max);
  d.interval_min = j.value("interval_min", def.interval_min);
  d.interval_max = j.value("interval_max", def.interval_max);
  d.duration = j.value("duration", def.duration);
  d.validate();
}

}  // namespace inlab
