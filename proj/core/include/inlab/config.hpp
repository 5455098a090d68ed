#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "inlab/action_pipeline.hpp"
#include "inlab/gait.hpp"
#include "inlab/observation.hpp"
#include "inlab/planar_sim.hpp"
#include "inlab/ppo.hpp"
#include "inlab/reward.hpp"
#include "inlab/robot_model.hpp"

namespace inlab {

enum class LearningMode { IML, IML_RO, INL, INL_RO };

std::string to_string(LearningMode m);
LearningMode learning_mode_from_string(const std::string& name);
inline bool uses_reference(LearningMode m) { return m == LearningMode::IML_RO || m == LearningMode::INL_RO; }
inline bool is_instruction(LearningMode m) { return m == LearningMode::INL || m == LearningMode::INL_RO; }

// Single JSON document covering every module's knobs. Missing keys keep defaults.
struct TrainConfig {
  RobotKind robot = RobotKind::Quadruped;
  std::string gait = "stepping";
  GaitParams gait_params;
  LearningMode mode = LearningMode::INL;
  std::vector<double> k_b{0.5};  // one value (broadcast) or one per joint
  std::string reward_preset;     // empty: preset named after the gait
  std::string observation = "auto";  // auto (full or full_ro by mode) or hardware
  std::int64_t total_steps = 2'000'000;
  int envs = 12;
  int workers = 1;
  std::uint64_t seed = 0;
  int max_episode_steps = static_cast<int>(kEpisodeSteps);
  DisturbanceConfig disturbance;
  nlohmann::json physics = nlohmann::json::object();  // geometry overrides
  ContactParams contact;
  int substeps = 10;
  PpoConfig ppo;

  void validate() const;

  FeedbackConfig feedback() const;
  ObsVariant obs_variant() const;
  ObservationLayout layout() const;
  RewardConfig reward() const;
  GaitDefinition gait_definition() const;
  RobotGeometry geometry() const;
  RobotModel model() const;
  SimConfig sim_config() const;
};

// Default gait parameters per robot (period s, amplitudes degrees).
GaitParams default_gait_params(RobotKind robot);

// Defaults for a robot, with gait parameters set for that robot.
TrainConfig default_train_config(RobotKind robot);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

TrainConfig load_train_config(const std::string& path);
TrainConfig parse_train_config(const nlohmann::json& j);

// 64-bit FNV-1a hash of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

}  // namespace inlab
