#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "inlab/policy.hpp"
#include "inlab/rollout.hpp"

namespace inlab {

struct PpoConfig {
  int batch_size = 2048;
  int buffer_size = 20480;
  double learning_rate = 3e-4;
  double entropy_coeff = 0.005;
  double clip_epsilon = 0.2;
  double gae_lambda = 0.95;
  int num_epoch = 3;
  double gamma = 0.99;
  double value_coeff = 0.5;
  double max_grad_norm = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

void to_json(nlohmann::json& j, const PpoConfig& c);
void from_json(const nlohmann::json& j, PpoConfig& c);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  int minibatches = 0;
  bool aborted = false;  // a non-finite loss stopped the update
};

template <typename S>
struct Gradients {
  typename Mlp<S>::Vec actor, critic, log_std;

  void zero_like(const ActorCritic<S>& ac) {
    actor = Mlp<S>::Vec::Zero(ac.actor.size());
    critic = Mlp<S>::Vec::Zero(ac.critic.size());
    log_std = Mlp<S>::Vec::Zero(ac.log_std.size());
  }
  double norm() const {
    return std::sqrt(static_cast<double>(actor.squaredNorm() + critic.squaredNorm() +
                                         log_std.squaredNorm()));
  }
  void scale(S f) {
    actor *= f;
    critic *= f;
    log_std *= f;
  }
};

template <typename S>
struct Minibatch {
  typename Mlp<S>::Mat obs;      // obs_dim x B
  typename Mlp<S>::Mat actions;  // act_dim x B
  typename Mlp<S>::Vec old_log_probs;
  typename Mlp<S>::Vec advantages;
  typename Mlp<S>::Vec returns;
};

struct LossTerms {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;  // mean squared error, before the coefficient
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

// total = policy + value_coeff * value - entropy_coeff * entropy, where policy is
// the negated clipped surrogate. Writes gradients when `grad` is non-null.
template <typename S>
LossTerms ppo_loss(const ActorCritic<S>& ac, const Minibatch<S>& mb, const PpoConfig& cfg,
                   Gradients<S>* grad) {
  using Mat = typename Mlp<S>::Mat;
  using Vec = typename Mlp<S>::Vec;
  constexpr double half_log_2pi = 0.91893853320467274178;
  const Eigen::Index B = mb.obs.cols();
  const Eigen::Index A = ac.act_dim();
  const S inv_b = S(1) / static_cast<S>(B);

  typename Mlp<S>::Cache ca, cc;
  const Mat net = ac.actor.forward(mb.obs, grad ? &ca : nullptr);
  const Mat mu = net.cwiseMax(S(-1)).cwiseMin(S(1));
  const Vec sigma = ac.log_std.array().exp().matrix();
  const Mat z = ((mb.actions - mu).array().colwise() / sigma.array()).matrix();
  const S log_norm = ac.log_std.sum() + static_cast<S>(half_log_2pi * static_cast<double>(A));
  Vec logp = (-S(0.5) * z.array().square().colwise().sum()).matrix().transpose();
  logp.array() -= log_norm;

  const S eps = static_cast<S>(cfg.clip_epsilon);
  Vec g_logp(B);
  double surr_sum = 0.0, kl_sum = 0.0;
  int clipped = 0;
  for (Eigen::Index i = 0; i < B; ++i) {
    const S ratio = std::exp(logp[i] - mb.old_log_probs[i]);
    const S adv = mb.advantages[i];
    const S s1 = ratio * adv;
    const S s2 = std::clamp(ratio, S(1) - eps, S(1) + eps) * adv;
    surr_sum += static_cast<double>(std::min(s1, s2));
    g_logp[i] = s1 <= s2 ? -adv * ratio * inv_b : S(0);
    if (std::abs(ratio - S(1)) > eps) ++clipped;
    kl_sum += static_cast<double>(mb.old_log_probs[i] - logp[i]);
  }

  const Mat v = ac.critic.forward(mb.obs, grad ? &cc : nullptr);
  const Mat verr = v - mb.returns.transpose();

  LossTerms out;
  out.policy = -surr_sum / static_cast<double>(B);
  out.value = static_cast<double>(verr.squaredNorm()) / static_cast<double>(B);
  out.entropy = gaussian_entropy(ac.log_std);
  out.total = out.policy + cfg.value_coeff * out.value - cfg.entropy_coeff * out.entropy;
  out.clip_fraction = static_cast<double>(clipped) / static_cast<double>(B);
  out.approx_kl = kl_sum / static_cast<double>(B);

  if (grad) {
    grad->zero_like(ac);
    // dlogp/dmu = z / sigma, dlogp/dlog_std = z^2 - 1.
    Mat dnet = (z.array().colwise() / sigma.array()).matrix();
    for (Eigen::Index i = 0; i < B; ++i) dnet.col(i) *= g_logp[i];
    dnet = (dnet.array() * (net.array().abs() < S(1)).template cast<S>()).matrix();
    ac.actor.backward(ca, dnet, grad->actor);
    const Mat zz = (z.array().square() - S(1)).matrix();
    grad->log_std = zz * g_logp;
    grad->log_std.array() -= static_cast<S>(cfg.entropy_coeff);
    const Mat dv = (S(2) * static_cast<S>(cfg.value_coeff) * inv_b) * verr;
    ac.critic.backward(cc, dv, grad->critic);
  }
  return out;
}

template <typename S>
class Adam {
 public:
  Adam() = default;
  explicit Adam(const ActorCritic<S>& ac) { m_.zero_like(ac); v_.zero_like(ac); }

  void step(ActorCritic<S>& ac, const Gradients<S>& g, const PpoConfig& cfg) {
    ++t_;
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    const S lr = static_cast<S>(cfg.learning_rate * std::sqrt(c2) / c1);
    const S eps = static_cast<S>(cfg.adam_eps * std::sqrt(c2));
    auto upd = [&](auto& p, const auto& gr, auto& m, auto& v) {
      m = static_cast<S>(b1) * m + static_cast<S>(1.0 - b1) * gr;
      v = static_cast<S>(b2) * v + static_cast<S>(1.0 - b2) * gr.cwiseAbs2();
      p.array() -= lr * m.array() / (v.array().sqrt() + eps);
    };
    upd(ac.actor.params(), g.actor, m_.actor, v_.actor);
    upd(ac.critic.params(), g.critic, m_.critic, v_.critic);
    upd(ac.log_std, g.log_std, m_.log_std, v_.log_std);
  }

  long steps() const { return t_; }

 private:
  Gradients<S> m_, v_;
  long t_ = 0;
};

// Runs num_epoch passes of shuffled minibatches over the buffer. `adv` must
// already be normalized; `returns` are the value targets.
template <typename S, typename Rng>
PpoStats ppo_update(ActorCritic<S>& ac, Adam<S>& opt, const RolloutBuffer& buffer,
                    const std::vector<double>& adv, const std::vector<double>& returns,
                    const PpoConfig& cfg, Rng& rng) {
  const std::size_t N = buffer.size();
  if (N == 0 || adv.size() != N || returns.size() != N) throw ConfigError("ppo_update: bad buffer");
  const int od = buffer.obs_dim, ad = buffer.act_dim;

  // Flatten in (env, step) order.
  std::vector<const double*> obs(N), act(N);
  std::vector<double> logp(N);
  {
    std::size_t k = 0;
    for (const auto& tr : buffer.envs) {
      for (std::size_t t = 0; t < tr.size(); ++t, ++k) {
        obs[k] = tr.obs.data() + t * od;
        act[k] = tr.actions.data() + t * ad;
        logp[k] = tr.log_probs[t];
      }
    }
  }

  const std::size_t bs = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), N);
  std::vector<std::size_t> idx(N);
  PpoStats stats;
  Minibatch<S> mb;
  Gradients<S> grad;
  for (int epoch = 0; epoch < cfg.num_epoch && !stats.aborted; ++epoch) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = N; i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(idx[i - 1], idx[pick(rng)]);
    }
    for (std::size_t start = 0; start + bs <= N; start += bs) {
      const auto B = static_cast<Eigen::Index>(bs);
      mb.obs.resize(od, B);
      mb.actions.resize(ad, B);
      mb.old_log_probs.resize(B);
      mb.advantages.resize(B);
      mb.returns.resize(B);
      for (Eigen::Index c = 0; c < B; ++c) {
        const std::size_t s = idx[start + static_cast<std::size_t>(c)];
        for (int r = 0; r < od; ++r) mb.obs(r, c) = static_cast<S>(obs[s][r]);
        for (int r = 0; r < ad; ++r) mb.actions(r, c) = static_cast<S>(act[s][r]);
        mb.old_log_probs[c] = static_cast<S>(logp[s]);
        mb.advantages[c] = static_cast<S>(adv[s]);
        mb.returns[c] = static_cast<S>(returns[s]);
      }
      const LossTerms lt = ppo_loss(ac, mb, cfg, &grad);
      if (!std::isfinite(lt.total) || !std::isfinite(grad.norm())) {
        stats.aborted = true;
        break;
      }
      const double gn = grad.norm();
      if (cfg.max_grad_norm > 0.0 && gn > cfg.max_grad_norm) {
        grad.scale(static_cast<S>(cfg.max_grad_norm / gn));
      }
      opt.step(ac, grad, cfg);
      stats.policy_loss += lt.policy;
      stats.value_loss += lt.value;
      stats.entropy += lt.entropy;
      stats.clip_fraction += lt.clip_fraction;
      stats.approx_kl += lt.approx_kl;
      ++stats.minibatches;
    }
  }
  if (stats.minibatches > 0) {
    const double n = stats.minibatches;
    stats.policy_loss /= n;
    stats.value_loss /= n;
    stats.entropy /= n;
    stats.clip_fraction /= n;
    stats.approx_kl /= n;
  }
  return stats;
}

}  // namespace inlab
