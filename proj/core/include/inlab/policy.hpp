#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "inlab/mlp.hpp"

namespace inlab {

inline constexpr double kInitialActionStd = 0.3;
inline constexpr double kActorFinalGain = 0.01;

// Diagonal Gaussian actor with a state-independent log standard deviation,
// plus a separate value network.
template <typename S>
struct ActorCritic {
  using Mat = typename Mlp<S>::Mat;
  using Vec = typename Mlp<S>::Vec;

  Mlp<S> actor;
  Mlp<S> critic;
  Vec log_std;

  ActorCritic() = default;
  ActorCritic(int obs_dim, int act_dim, std::vector<int> actor_hidden = {512, 512, 512},
              std::vector<int> critic_hidden = {128, 128}) {
    std::vector<int> a{obs_dim};
    a.insert(a.end(), actor_hidden.begin(), actor_hidden.end());
    a.push_back(act_dim);
    std::vector<int> c{obs_dim};
    c.insert(c.end(), critic_hidden.begin(), critic_hidden.end());
    c.push_back(1);
    actor = Mlp<S>(a);
    critic = Mlp<S>(c);
    log_std = Vec::Constant(act_dim, static_cast<S>(std::log(kInitialActionStd)));
  }

  int obs_dim() const { return actor.in_dim(); }
  int act_dim() const { return actor.out_dim(); }

  template <typename Rng>
  void init(Rng& rng) {
    actor.init(rng, 1.0, kActorFinalGain);
    critic.init(rng, 1.0, 1.0);
    log_std.setConstant(static_cast<S>(std::log(kInitialActionStd)));
  }

  // Mean action clipped to [-1, 1].
  Mat mean(const Mat& obs) const { return actor.forward(obs).cwiseMax(S(-1)).cwiseMin(S(1)); }
  Vec value(const Mat& obs) const { return critic.forward(obs).row(0).transpose(); }

  template <typename T>
  ActorCritic<T> cast() const {
    ActorCritic<T> out;
    out.actor = actor.template cast<T>();
    out.critic = critic.template cast<T>();
    out.log_std = log_std.template cast<T>();
    return out;
  }
};

// Log density of `action` under N(mean, exp(log_std)^2), summed over dimensions.
template <typename S, typename A, typename M, typename L>
S gaussian_log_prob(const A& action, const M& mean, const L& log_std) {
  constexpr double half_log_2pi = 0.91893853320467274178;
  S lp = 0;
  for (Eigen::Index j = 0; j < action.size(); ++j) {
    const S z = (action[j] - mean[j]) / std::exp(log_std[j]);
    lp += -S(0.5) * z * z - log_std[j] - static_cast<S>(half_log_2pi);
  }
  return lp;
}

// Closed-form entropy sum(log_std + 0.5 log(2 pi e)).
template <typename V>
double gaussian_entropy(const V& log_std) {
  const double c = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  double h = 0.0;
  for (Eigen::Index j = 0; j < log_std.size(); ++j) h += static_cast<double>(log_std[j]) + c;
  return h;
}

// Samples a = mean + exp(log_std) * eps. Writes the pre-clip sample and returns its log-prob.
template <typename S, typename Rng>
S sample_action(const typename Mlp<S>::Vec& mean, const typename Mlp<S>::Vec& log_std, Rng& rng,
                typename Mlp<S>::Vec& action) {
  std::normal_distribution<double> n01(0.0, 1.0);
  action.resize(mean.size());
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    action[j] = mean[j] + std::exp(log_std[j]) * static_cast<S>(n01(rng));
  }
  return gaussian_log_prob<S>(action, mean, log_std);
}

}  // namespace inlab
