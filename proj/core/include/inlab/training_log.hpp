#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace inlab {

// One PPO iteration. Episode means cover the episodes that finished during the
// iteration (NaN when none did).
struct IterationRow {
  int iteration = 0;
  std::int64_t env_steps = 0;  // cumulative
  int episodes = 0;
  double mean_reward = 0.0;
  double mean_length = 0.0;
  double mean_mimic = 0.0;
  double mean_alive = 0.0;
  double mean_balance = 0.0;
  double mean_velocity = 0.0;
  double mean_sync = 0.0;
  int falls = 0;
  double mean_forward_velocity = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  int update_aborted = 0;
};

struct TrainingLog {
  std::vector<IterationRow> rows;
};

inline constexpr const char* kLogSchema = "# inlab-training-log v1";

std::vector<std::string> log_columns();

// CSV: schema line, column header, one row per iteration. Doubles are written
// with 17 significant digits so a parse reproduces them exactly.
std::string to_csv(const TrainingLog& log);
TrainingLog parse_csv(const std::string& text);

void write_log(const TrainingLog& log, const std::string& path);
TrainingLog read_log(const std::string& path);

// Trailing moving average of mean_reward over up to `window` rows.
std::vector<double> smoothed_reward(const TrainingLog& log, int window = 10);

}  // namespace inlab
