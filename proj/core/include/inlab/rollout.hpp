#pragma once

#include <cstdint>
#include <vector>

namespace inlab {

enum class StepEnd : std::uint8_t { None = 0, Terminal = 1, Truncated = 2 };

// Per-environment trajectory slice of one collection round.
struct Trajectory {
  std::vector<double> obs;      // step-major, obs_dim per step
  std::vector<double> actions;  // raw policy samples, act_dim per step
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<StepEnd> ends;
  std::vector<double> end_values;  // V(s_final) for truncated ends, else 0
  double tail_value = 0.0;         // bootstrap value after the last stored step

  std::size_t size() const { return rewards.size(); }
  void clear();
};

struct RolloutBuffer {
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<Trajectory> envs;

  RolloutBuffer() = default;
  RolloutBuffer(int obs_dim, int act_dim, int env_count);

  std::size_t size() const;
  void clear();
};

struct GaeResult {
  std::vector<double> advantages;  // (env, step) order
  std::vector<double> returns;
};

// Generalized advantage estimation. Terminal ends bootstrap with zero,
// truncated ends with their stored end value; both stop the recursion.
GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda);

// Shifts and scales to mean 0, population std 1. A constant vector is only shifted.
void normalize_advantages(std::vector<double>& adv);

}  // namespace inlab
