#include "inlab/config.hpp"

#include <cstdio>
#include <fstream>

#include "inlab/error.hpp"

namespace inlab {

std::string to_string(LearningMode m) {
  switch (m) {
    case LearningMode::IML: return "IML";
    case LearningMode::IML_RO: return "IML_RO";
    case LearningMode::INL: return "INL";
    case LearningMode::INL_RO: return "INL_RO";
  }
  return "INL";
}

LearningMode learning_mode_from_string(const std::string& name) {
  if (name == "IML") return LearningMode::IML;
  if (name == "IML_RO" || name == "IML-RO") return LearningMode::IML_RO;
  if (name == "INL") return LearningMode::INL;
  if (name == "INL_RO" || name == "INL-RO") return LearningMode::INL_RO;
  throw ConfigError("unknown learning mode '" + name + "' (expected IML, IML_RO, INL, INL_RO)");
}

GaitParams default_gait_params(RobotKind robot) {
  GaitParams p;
  if (robot == RobotKind::Quadruped) {
    p.period = 0.5;
    p.hip_amplitude = 20.0;
    p.knee_amplitude = 40.0;
    p.ankle_amplitude = 0.0;
  }
  return p;
}

TrainConfig default_train_config(RobotKind robot) {
  TrainConfig c;
  c.robot = robot;
  c.gait_params = default_gait_params(robot);
  return c;
}

void TrainConfig::validate() const {
  if (total_steps < 0) throw ConfigError("total_steps must be nonnegative");
  if (envs <= 0) throw ConfigError("envs must be positive");
  if (workers <= 0) throw ConfigError("workers must be positive");
  if (max_episode_steps <= 0) throw ConfigError("max_episode_steps must be positive");
  if (substeps <= 0) throw ConfigError("substeps must be positive");
  if (observation != "auto" && observation != "hardware") {
    throw ConfigError("observation must be 'auto' or 'hardware'");
  }
  if (observation == "hardware" && uses_reference(mode)) {
    throw ConfigError("the hardware observation cannot carry the reference");
  }
  ppo.validate();
  disturbance.validate();
  contact.validate();
  const auto g = gait_definition();
  const auto m = model();
  if (static_cast<int>(g.joints.size()) != m.joint_count()) {
    throw ConfigError("gait joint count does not match the robot");
  }
  feedback().validate(static_cast<std::size_t>(m.joint_count()));
  reward().validate(robot);
  // Every reference angle must stay inside its joint range over a cycle.
  const auto ranges = m.joint_ranges();
  for (int k = 0; k < 64; ++k) {
    (void)feedforward_vector(g, ranges, g.gait_period * k / 64.0);
  }
}

FeedbackConfig TrainConfig::feedback() const {
  FeedbackConfig f;
  f.mode = is_instruction(mode) ? ComposeMode::INL : ComposeMode::IML;
  f.k_b = k_b;
  const std::size_t n = robot == RobotKind::Quadruped ? 8 : 6;
  if (f.mode == ComposeMode::IML) f.k_b.assign(n, 1.0);
  return broadcast_to(f, n);
}

ObsVariant TrainConfig::obs_variant() const {
  if (uses_reference(mode)) return ObsVariant::FullRO;
  return observation == "hardware" ? ObsVariant::Hardware : ObsVariant::Full;
}

ObservationLayout TrainConfig::layout() const {
  return ObservationLayout{obs_variant(), robot == RobotKind::Quadruped ? 8 : 6};
}

RewardConfig TrainConfig::reward() const {
  return RewardConfig::preset(robot, reward_preset.empty() ? gait : reward_preset);
}

GaitDefinition TrainConfig::gait_definition() const { return make_gait(robot, gait, gait_params); }

RobotGeometry TrainConfig::geometry() const {
  RobotGeometry g = default_geometry(robot);
  apply_overrides(physics, g);
  return g;
}

RobotModel TrainConfig::model() const { return build_robot(robot, geometry()); }

SimConfig TrainConfig::sim_config() const {
  SimConfig s;
  s.contact = contact;
  s.substeps = substeps;
  return s;
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"robot", to_string(c.robot)},
                     {"gait", c.gait},
                     {"gait_params", c.gait_params},
                     {"mode", to_string(c.mode)},
                     {"k_b", c.k_b},
                     {"reward_preset", c.reward_preset},
                     {"observation", c.observation},
                     {"total_steps", c.total_steps},
                     {"envs", c.envs},
                     {"workers", c.workers},
                     {"seed", c.seed},
                     {"max_episode_steps", c.max_episode_steps},
                     {"disturbance", c.disturbance},
                     {"physics", c.physics},
                     {"contact", c.contact},
                     {"substeps", c.substeps},
                     {"ppo", c.ppo}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  const RobotKind robot = robot_kind_from_string(j.value("robot", std::string("quadruped")));
  c = default_train_config(robot);
  c.gait = j.value("gait", c.gait);
  if (j.contains("gait_params")) {
    GaitParams p = c.gait_params;
    const auto& g = j.at("gait_params");
    p.period = g.value("period", p.period);
    p.hip_amplitude = g.value("hip_amplitude", p.hip_amplitude);
    p.knee_amplitude = g.value("knee_amplitude", p.knee_amplitude);
    p.ankle_amplitude = g.value("ankle_amplitude", p.ankle_amplitude);
    c.gait_params = p;
  }
  c.mode = learning_mode_from_string(j.value("mode", to_string(c.mode)));
  if (j.contains("k_b")) {
    const auto& kb = j.at("k_b");
    if (kb.is_number()) {
      c.k_b = {kb.get<double>()};
    } else if (kb.is_array()) {
      c.k_b = kb.get<std::vector<double>>();
    } else {
      throw ConfigError("k_b must be a number or an array");
    }
  }
  c.reward_preset = j.value("reward_preset", c.reward_preset);
  c.observation = j.value("observation", c.observation);
  c.total_steps = j.value("total_steps", c.total_steps);
  c.envs = j.value("envs", c.envs);
  c.workers = j.value("workers", c.workers);
  c.seed = j.value("seed", c.seed);
  c.max_episode_steps = j.value("max_episode_steps", c.max_episode_steps);
  if (j.contains("disturbance")) c.disturbance = j.at("disturbance").get<DisturbanceConfig>();
  if (j.contains("physics")) c.physics = j.at("physics");
  if (j.contains("contact")) c.contact = j.at("contact").get<ContactParams>();
  c.substeps = j.value("substeps", c.substeps);
  if (j.contains("ppo")) c.ppo = j.at("ppo").get<PpoConfig>();
}

TrainConfig parse_train_config(const nlohmann::json& j) {
  TrainConfig c;
  try {
    from_json(j, c);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("configuration is not valid JSON: " + std::string(e.what()));
  }
  return parse_train_config(j);
}

std::string config_hash(const nlohmann::json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace inlab
