#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "inlab/config.hpp"
#include "inlab/trainer.hpp"
#include "inlab/training_log.hpp"

namespace inlab {

// ---------------------------------------------------------------------------
// Curve metrics

// First cumulative env step at which the trailing `window`-row moving average of
// mean_reward reaches `fraction` of the run's final plateau (mean over the last
// 10% of rows). Returns -1 if never reached.
std::int64_t steps_to_threshold(const TrainingLog& log, int window = 10, double fraction = 0.8);

// Mean of a column over rows [begin_frac, end_frac) of the log (at least one row).
enum class LogField { Reward, Length, Mimic, ForwardVelocity };
double window_mean(const TrainingLog& log, LogField field, double begin_frac, double end_frac);

double median(std::vector<double> values);

struct RunSummary {
  std::string label;
  std::uint64_t seed = 0;
  std::int64_t steps_to_threshold = -1;
  double first_reward = 0.0;  // first 10% of iterations
  double final_reward = 0.0;  // last 10%
  double first_length = 0.0;
  double final_length = 0.0;
  double first_mimic = 0.0;
  double final_mimic = 0.0;
};

RunSummary summarize(const TrainingLog& log, const std::string& label, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Result store: trains on a miss and keeps (log, checkpoint) under
// dir/<config hash>/. An empty dir disables persistence.

inline constexpr int kResultsVersion = 2;

class RunStore {
 public:
  explicit RunStore(std::string dir = {}) : dir_(std::move(dir)) {}

  struct Run {
    TrainingLog log;
    Policy policy;
    bool cached = false;
    std::string path;  // run directory, empty without persistence
  };

  Run get(const TrainConfig& cfg, const TrainHooks& hooks = {}) const;
  std::string key(const TrainConfig& cfg) const;
  bool contains(const TrainConfig& cfg) const;
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
};

struct GroupResult {
  std::string label;
  std::vector<RunSummary> runs;
  std::vector<TrainingLog> logs;

  double median_steps_to_threshold() const;
  double median_first_reward() const;
  double median_final_reward() const;
  double median_final_length() const;
  double median_final_mimic() const;
};

// Per-mode training runs on a shared base configuration (reward unchanged).
std::vector<GroupResult> compare_modes(const TrainConfig& base, const std::vector<LearningMode>& modes,
                                       const std::vector<std::uint64_t>& seeds, const RunStore& store,
                                       const TrainHooks& hooks = {});

// INL runs per uniform k_b value.
std::vector<GroupResult> sweep_kb(const TrainConfig& base, const std::vector<double>& k_b_values,
                                  const std::vector<std::uint64_t>& seeds, const RunStore& store,
                                  const TrainHooks& hooks = {});

// ---------------------------------------------------------------------------
// Adaptation sweep

enum class AdaptParameter { Period, Amplitude };

AdaptParameter adapt_parameter_from_string(const std::string& name);
std::string to_string(AdaptParameter p);

struct AdaptResult {
  std::vector<double> factors;
  std::vector<bool> feasible;
  std::vector<int> falls;
  std::vector<double> forward_velocity;
  bool nominal_feasible = false;
  double low = 1.0;   // contiguous feasible interval containing 1.0
  double high = 1.0;
};

// Scales the feedforward by each factor, evaluates the policy for `duration_s`
// and marks the factor feasible iff no fall occurs and (when `require_forward`)
// the mean forward velocity exceeds `min_velocity`. The grid must contain 1.0.
// Sorted, deduplicated grid; throws ConfigError without 1.0 or with a nonpositive factor.
std::vector<double> checked_adapt_grid(std::vector<double> grid);

AdaptResult adapt_sweep(const Policy& policy, const TrainConfig& cfg, AdaptParameter parameter,
                        std::vector<double> grid, double duration_s = 30.0, double min_velocity = 0.05,
                        bool require_forward = true);

// ---------------------------------------------------------------------------
// Online learning protocol

struct OnlineProtocolConfig {
  TrainConfig train;  // robot, gait, k_b, observation, reward preset and PPO settings
  double walk_seconds = 3.3;
  double hold_seconds = 1.2;      // posture held while the update runs
  double recovery_seconds = 1.0;  // ramp back to the gait's t = 0 posture
  double total_minutes = 20.0;

  static OnlineProtocolConfig defaults();
  double episode_seconds() const { return walk_seconds + hold_seconds + recovery_seconds; }
  void validate() const;
};

void to_json(nlohmann::json& j, const OnlineProtocolConfig& c);
void from_json(const nlohmann::json& j, OnlineProtocolConfig& c);

struct OnlineEpisode {
  int index = 0;
  double start_time = 0.0;  // simulated seconds since the run began
  int steps = 0;
  double reward = 0.0;      // summed over the walking phase
  bool fell = false;
  bool repositioned = false;
};

struct OnlineResult {
  std::vector<OnlineEpisode> episodes;
  TrainingLog log;  // one row per episode
  int repositions = 0;

  double fall_rate() const;
  // Mean episode reward over episodes starting inside [t0, t1) seconds.
  double mean_reward_between(double t0, double t1) const;
};

OnlineResult online_protocol(const OnlineProtocolConfig& cfg);

// ---------------------------------------------------------------------------
// Plot data

void emit_plotdata(const TrainingLog& log, const std::string& path);

// Writes <dir>/<prefix>_<label>.csv (env_steps, one reward column per seed,
// median) per group and <dir>/<prefix>_summary.csv.
void emit_group_plotdata(const std::vector<GroupResult>& groups, const std::string& dir,
                         const std::string& prefix);

void emit_online_plotdata(const OnlineResult& result, const std::string& path);

}  // namespace inlab
