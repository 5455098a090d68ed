#include "inlab/gait.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "inlab/error.hpp"

namespace inlab {

TrajectorySpec TrajectorySpec::constant(double theta0) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Constant;
  s.theta0 = theta0;
  return s;
}

TrajectorySpec TrajectorySpec::sinusoid(double theta0, double delta_theta, double period,
                                        double phase) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Sinusoid;
  s.theta0 = theta0;
  s.delta_theta = delta_theta;
  s.period = period;
  s.phase = phase;
  return s;
}

TrajectorySpec TrajectorySpec::ramp(double theta0, double delta_theta, double period) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Ramp;
  s.theta0 = theta0;
  s.delta_theta = delta_theta;
  s.period = period;
  return s;
}

TrajectorySpec TrajectorySpec::composite(std::vector<CompositeTerm> terms, double period,
                                         double phase) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Composite;
  s.terms = std::move(terms);
  s.period = period;
  s.phase = phase;
  return s;
}

double wrap_phase(double x) {
  double f = x - std::floor(x);
  // floor() of values just below an integer can round f up to exactly 1.
  return f >= 1.0 ? 0.0 : f;
}

namespace {

void require_period(const TrajectorySpec& spec) {
  if (!(spec.period > 0.0) || !std::isfinite(spec.period)) {
    std::ostringstream msg;
    msg << "trajectory period must be positive, got " << spec.period;
    throw ParameterError(msg.str());
  }
}

}  // namespace

double eval_sinusoid(const TrajectorySpec& spec, double t) {
  if (spec.kind != TrajectoryKind::Sinusoid) throw ParameterError("eval_sinusoid: kind mismatch");
  require_period(spec);
  const double u = wrap_phase(t / spec.period + spec.phase);
  return spec.theta0 + spec.delta_theta * (1.0 - std::cos(2.0 * kPi * u)) / 2.0;
}

RampSample eval_ramp(const TrajectorySpec& spec, double t) {
  if (spec.kind != TrajectoryKind::Ramp) throw ParameterError("eval_ramp: kind mismatch");
  require_period(spec);
  RampSample out;
  double tc = t;
  if (t < 0.0) {
    tc = 0.0;
    out.clamped = true;
  } else if (t > spec.period) {
    tc = spec.period;
    out.clamped = true;
  }
  out.angle = spec.theta0 + spec.delta_theta * tc / spec.period;
  return out;
}

double eval_trajectory(const TrajectorySpec& spec, double t) {
  switch (spec.kind) {
    case TrajectoryKind::Constant:
      return spec.theta0;
    case TrajectoryKind::Sinusoid:
      return eval_sinusoid(spec, t);
    case TrajectoryKind::Ramp:
      return eval_ramp(spec, t).angle;
    case TrajectoryKind::Composite: {
      if (spec.terms.empty()) throw ParameterError("composite trajectory has no terms");
      require_period(spec);
      const double u = wrap_phase(t / spec.period + spec.phase);
      double sum = 0.0;
      for (const auto& term : spec.terms) {
        if (u < term.window_begin || u >= term.window_end) continue;
        const double local = (u - term.window_begin) * spec.period;
        sum += term.weight * eval_trajectory(term.spec, local);
      }
      return sum;
    }
  }
  throw ParameterError("unknown trajectory kind");
}

double normalize_to_action(double theta_ref, const JointRange& range) {
  if (!(range.theta_min < range.theta_max)) throw ParameterError("joint range is empty");
  // Tolerate rounding noise at the bounds.
  constexpr double kSlack = 1e-9;
  if (theta_ref < range.theta_min - kSlack || theta_ref > range.theta_max + kSlack) {
    std::ostringstream msg;
    msg << "reference angle " << theta_ref << " outside joint range [" << range.theta_min << ", "
        << range.theta_max << "]";
    throw RangeError(msg.str());
  }
  return 2.0 * (theta_ref - range.theta_min) / (range.theta_max - range.theta_min) - 1.0;
}

void GaitDefinition::validate() const {
  if (!(gait_period > 0.0)) throw ParameterError("gait_period must be positive");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (joints[i].joint_id != static_cast<int>(i)) {
      throw ConfigError("gait '" + name + "': joint ids must be 0..n-1 in order, each exactly once");
    }
    if (joints[i].leg < 0 || joints[i].leg >= leg_count()) {
      throw ConfigError("gait '" + name + "': joint leg index out of range");
    }
  }
  for (double off : leg_phase_offsets) {
    if (off < 0.0 || off >= 1.0) throw ConfigError("leg phase offsets must lie in [0, 1)");
  }
}

std::vector<double> reference_angles(const GaitDefinition& gait, double t) {
  std::vector<double> out(gait.joints.size());
  for (std::size_t i = 0; i < gait.joints.size(); ++i) {
    const auto& j = gait.joints[i];
    const double shift = gait.leg_phase_offsets.at(j.leg) * gait.gait_period;
    out[i] = eval_trajectory(j.spec, t + shift);
  }
  return out;
}

std::vector<double> feedforward_vector(const GaitDefinition& gait,
                                       std::span<const JointRange> ranges, double t) {
  if (ranges.size() != gait.joints.size()) {
    std::ostringstream msg;
    msg << "gait '" << gait.name << "' has " << gait.joints.size() << " joints, robot has "
        << ranges.size();
    throw ConfigError(msg.str());
  }
  auto refs = reference_angles(gait, t);
  for (std::size_t i = 0; i < refs.size(); ++i) refs[i] = normalize_to_action(refs[i], ranges[i]);
  return refs;
}

std::vector<bool> support_flags(const GaitDefinition& gait, double t) {
  std::vector<bool> flags(gait.leg_phase_offsets.size(), true);
  if (gait.support.kind == SupportScheduleKind::AlwaysStance) return flags;
  for (std::size_t leg = 0; leg < flags.size(); ++leg) {
    const double local = wrap_phase(t / gait.gait_period + gait.leg_phase_offsets[leg]);
    flags[leg] = local < gait.support.duty;
  }
  return flags;
}

namespace {

void scale_spec_period(TrajectorySpec& s, double factor) {
  s.period *= factor;
  for (auto& term : s.terms) scale_spec_period(term.spec, factor);
}

// Sinusoids and ramps scale delta_theta; composites scale about their value at
// the start of the cycle.
void scale_spec_amplitude(TrajectorySpec& s, double factor) {
  switch (s.kind) {
    case TrajectoryKind::Sinusoid:
    case TrajectoryKind::Ramp:
      s.delta_theta *= factor;
      break;
    case TrajectoryKind::Composite: {
      // anchor + f * (x(t) - anchor), with the anchor at the start of the cycle.
      const double anchor = eval_trajectory(s, -s.phase * s.period);
      for (auto& term : s.terms) term.weight *= factor;
      s.terms.push_back({TrajectorySpec::constant((1.0 - factor) * anchor), 1.0, 0.0, 1.0});
      break;
    }
    case TrajectoryKind::Constant:
      break;
  }
}

}  // namespace

GaitDefinition scale_period(const GaitDefinition& gait, double factor) {
  if (!(factor > 0.0)) throw ParameterError("period scale factor must be positive");
  GaitDefinition out = gait;
  out.gait_period *= factor;
  for (auto& j : out.joints) scale_spec_period(j.spec, factor);
  return out;
}

GaitDefinition scale_amplitude(const GaitDefinition& gait, double factor) {
  if (!(factor >= 0.0)) throw ParameterError("amplitude scale factor must be nonnegative");
  GaitDefinition out = gait;
  for (auto& j : out.joints) scale_spec_amplitude(j.spec, factor);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::string kind_name(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::Sinusoid:
      return "sinusoid";
    case TrajectoryKind::Ramp:
      return "ramp";
    case TrajectoryKind::Composite:
      return "composite";
    case TrajectoryKind::Constant:
      return "constant";
  }
  return "constant";
}

TrajectoryKind kind_from_name(const std::string& s) {
  if (s == "sinusoid") return TrajectoryKind::Sinusoid;
  if (s == "ramp") return TrajectoryKind::Ramp;
  if (s == "composite") return TrajectoryKind::Composite;
  if (s == "constant") return TrajectoryKind::Constant;
  throw ConfigError("unknown trajectory kind '" + s + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const TrajectorySpec& spec) {
  j = nlohmann::json{{"kind", kind_name(spec.kind)},
                     {"theta0", spec.theta0},
                     {"delta_theta", spec.delta_theta},
                     {"period", spec.period},
                     {"phase", spec.phase}};
  if (spec.kind == TrajectoryKind::Composite) {
    auto terms = nlohmann::json::array();
    for (const auto& t : spec.terms) {
      nlohmann::json tj = t.spec;
      tj["weight"] = t.weight;
      tj["window"] = {t.window_begin, t.window_end};
      terms.push_back(std::move(tj));
    }
    j["terms"] = std::move(terms);
  }
}

void from_json(const nlohmann::json& j, TrajectorySpec& spec) {
  spec = TrajectorySpec{};
  spec.kind = kind_from_name(j.at("kind").get<std::string>());
  spec.theta0 = j.value("theta0", 0.0);
  spec.delta_theta = j.value("delta_theta", 0.0);
  spec.period = j.value("period", 1.0);
  spec.phase = j.value("phase", 0.0);
  if (spec.kind == TrajectoryKind::Composite) {
    for (const auto& tj : j.at("terms")) {
      CompositeTerm term;
      term.spec = tj.get<TrajectorySpec>();
      term.weight = tj.value("weight", 1.0);
      if (tj.contains("window")) {
        term.window_begin = tj.at("window").at(0).get<double>();
        term.window_end = tj.at("window").at(1).get<double>();
      }
      spec.terms.push_back(std::move(term));
    }
  }
}

void to_json(nlohmann::json& j, const GaitDefinition& gait) {
  auto joints = nlohmann::json::array();
  for (const auto& gj : gait.joints) {
    nlohmann::json jj = gj.spec;
    jj["joint_id"] = gj.joint_id;
    jj["leg"] = gj.leg;
    joints.push_back(std::move(jj));
  }
  j = nlohmann::json{
      {"name", gait.name},
      {"gait_period", gait.gait_period},
      {"joints", std::move(joints)},
      {"leg_phase_offsets", gait.leg_phase_offsets},
      {"support_schedule_kind",
       gait.support.kind == SupportScheduleKind::DutyCycle ? "duty_cycle" : "always_stance"},
      {"support_duty", gait.support.duty},
  };
}

void from_json(const nlohmann::json& j, GaitDefinition& gait) {
  gait = GaitDefinition{};
  gait.name = j.at("name").get<std::string>();
  gait.gait_period = j.at("gait_period").get<double>();
  for (const auto& jj : j.at("joints")) {
    GaitJoint gj;
    gj.spec = jj.get<TrajectorySpec>();
    gj.joint_id = jj.at("joint_id").get<int>();
    gj.leg = jj.value("leg", 0);
    gait.joints.push_back(std::move(gj));
  }
  std::sort(gait.joints.begin(), gait.joints.end(),
            [](const GaitJoint& a, const GaitJoint& b) { return a.joint_id < b.joint_id; });
  gait.leg_phase_offsets = j.at("leg_phase_offsets").get<std::vector<double>>();
  const auto kind = j.value("support_schedule_kind", std::string("duty_cycle"));
  if (kind == "duty_cycle") {
    gait.support.kind = SupportScheduleKind::DutyCycle;
  } else if (kind == "always_stance") {
    gait.support.kind = SupportScheduleKind::AlwaysStance;
  } else {
    throw ConfigError("unknown support_schedule_kind '" + kind + "'");
  }
  gait.support.duty = j.value("support_duty", 0.5);
  gait.validate();
}

}  // namespace inlab
