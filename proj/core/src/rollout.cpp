#include "inlab/rollout.hpp"

#include <cmath>

#include "inlab/error.hpp"

namespace inlab {

void Trajectory::clear() {
  obs.clear();
  actions.clear();
  log_probs.clear();
  rewards.clear();
  values.clear();
  ends.clear();
  end_values.clear();
  tail_value = 0.0;
}

RolloutBuffer::RolloutBuffer(int obs_dim_, int act_dim_, int env_count)
    : obs_dim(obs_dim_), act_dim(act_dim_), envs(env_count) {}

std::size_t RolloutBuffer::size() const {
  std::size_t n = 0;
  for (const auto& t : envs) n += t.size();
  return n;
}

void RolloutBuffer::clear() {
  for (auto& t : envs) t.clear();
}

GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda) {
  const std::size_t total = buffer.size();
  if (total == 0) throw ConfigError("compute_gae: empty buffer");
  GaeResult out;
  out.advantages.resize(total);
  out.returns.resize(total);
  std::size_t base = 0;
  for (const auto& tr : buffer.envs) {
    const std::size_t T = tr.size();
    double last = 0.0;
    for (std::size_t k = T; k-- > 0;) {
      double next_value;
      if (tr.ends[k] == StepEnd::Terminal) {
        next_value = 0.0;
        last = 0.0;
      } else if (tr.ends[k] == StepEnd::Truncated) {
        next_value = tr.end_values[k];
        last = 0.0;
      } else {
        next_value = k + 1 == T ? tr.tail_value : tr.values[k + 1];
      }
      const double delta = tr.rewards[k] + gamma * next_value - tr.values[k];
      last = delta + gamma * lambda * last;
      out.advantages[base + k] = last;
      out.returns[base + k] = last + tr.values[k];
    }
    base += T;
  }
  return out;
}

void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) return;
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double& a : adv) {
    a -= mean;
    var += a * a;
  }
  const double sd = std::sqrt(var / static_cast<double>(adv.size()));
  if (!(sd > 1e-12)) return;
  for (double& a : adv) a /= sd;
}

}  // namespace inlab
