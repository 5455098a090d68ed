#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "inlab/checkpoint.hpp"
#include "inlab/error.hpp"
#include "inlab/ppo.hpp"

using namespace inlab;
using AC = ActorCritic<double>;
using Mat = Mlp<double>::Mat;
using Vec = Mlp<double>::Vec;

namespace {

Gradients<double>* const kNoGrad = nullptr;

// Plain loop forward pass of an MLP (tanh hidden, linear output).
std::vector<double> oracle_forward(const Mlp<double>& net, const std::vector<double>& x) {
  std::vector<double> h = x;
  for (int l = 0; l < net.layers(); ++l) {
    const auto W = net.W(l);
    const auto b = net.b(l);
    std::vector<double> z(W.rows());
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      double acc = b[r];
      for (Eigen::Index c = 0; c < W.cols(); ++c) acc += W(r, c) * h[c];
      z[r] = l + 1 < net.layers() ? std::tanh(acc) : acc;
    }
    h = std::move(z);
  }
  return h;
}

Minibatch<double> random_batch(const AC& ac, int B, std::mt19937_64& rng, double kl_spread) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u(-kl_spread, kl_spread);
  Minibatch<double> mb;
  mb.obs = Mat(ac.obs_dim(), B);
  for (Eigen::Index i = 0; i < mb.obs.size(); ++i) mb.obs.data()[i] = n01(rng);
  const Mat mu = ac.mean(mb.obs);
  mb.actions = Mat(ac.act_dim(), B);
  mb.old_log_probs = Vec(B);
  mb.advantages = Vec(B);
  mb.returns = Vec(B);
  for (int i = 0; i < B; ++i) {
    Vec a;
    const double lp = sample_action<double>(mu.col(i), ac.log_std, rng, a);
    mb.actions.col(i) = a;
    mb.old_log_probs[i] = lp + u(rng);
    mb.advantages[i] = n01(rng);
    mb.returns[i] = n01(rng);
  }
  return mb;
}

double max_rel_error(const Vec& analytic, const Vec& numeric) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i], n = numeric[i];
    const double scale = std::max({std::abs(a), std::abs(n), 1e-6});
    worst = std::max(worst, std::abs(a - n) / scale);
  }
  return worst;
}

// Central differences of the total loss over one parameter block.
Vec numeric_grad(AC& ac, Vec& block, const Minibatch<double>& mb, const PpoConfig& cfg, double h = 1e-6) {
  Vec g(block.size());
  for (Eigen::Index i = 0; i < block.size(); ++i) {
    const double keep = block[i];
    block[i] = keep + h;
    const double up = ppo_loss(ac, mb, cfg, kNoGrad).total;
    block[i] = keep - h;
    const double dn = ppo_loss(ac, mb, cfg, kNoGrad).total;
    block[i] = keep;
    g[i] = (up - dn) / (2.0 * h);
  }
  return g;
}

void check_loss_gradients(AC& ac, const Minibatch<double>& mb, const PpoConfig& cfg) {
  Gradients<double> g;
  ppo_loss(ac, mb, cfg, &g);
  EXPECT_LT(max_rel_error(g.actor, numeric_grad(ac, ac.actor.params(), mb, cfg)), 1e-5);
  EXPECT_LT(max_rel_error(g.critic, numeric_grad(ac, ac.critic.params(), mb, cfg)), 1e-5);
  EXPECT_LT(max_rel_error(g.log_std, numeric_grad(ac, ac.log_std, mb, cfg)), 1e-5);
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("inlab_test_" + name)).string();
}

}  // namespace

TEST(Mlp, ZeroParametersGiveZeroMean) {
  AC ac(5, 3, {7, 6}, {4});
  const Mat x = Mat::Random(5, 9);
  EXPECT_EQ(ac.mean(x).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mlp, ForwardMatchesLoopOracle) {
  std::mt19937_64 rng(61);
  Mlp<double> net({4, 6, 5, 3});
  net.init(rng, 1.3, 0.7);
  std::normal_distribution<double> n01(0, 1);
  for (Eigen::Index i = 0; i < net.b(0).size(); ++i) net.b(0)[i] = n01(rng);
  for (int trial = 0; trial < 20; ++trial) {
    Mat x(4, 1);
    std::vector<double> xv(4);
    for (int k = 0; k < 4; ++k) xv[k] = x(k, 0) = n01(rng);
    const Mat y = net.forward(x);
    const auto want = oracle_forward(net, xv);
    for (int k = 0; k < 3; ++k) ASSERT_NEAR(y(k, 0), want[k], 1e-12);
  }
}

TEST(Mlp, DimensionMismatchThrows) {
  AC ac(5, 2, {8}, {8});
  EXPECT_THROW(ac.mean(Mat::Zero(4, 1)), ConfigError);
  EXPECT_THROW(ac.value(Mat::Zero(6, 1)), ConfigError);
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(62);
  Mlp<double> net({3, 5, 4, 2});
  net.init(rng, 1.0, 1.0);
  const Mat x = Mat::Random(3, 6);
  const Mat w = Mat::Random(2, 6);  // loss = sum(w .* y)
  typename Mlp<double>::Cache cache;
  net.forward(x, &cache);
  Vec grad = Vec::Zero(net.size());
  net.backward(cache, w, grad);
  Vec num(net.size());
  for (Eigen::Index i = 0; i < net.size(); ++i) {
    const double keep = net.params()[i];
    net.params()[i] = keep + 1e-6;
    const double up = net.forward(x).cwiseProduct(w).sum();
    net.params()[i] = keep - 1e-6;
    const double dn = net.forward(x).cwiseProduct(w).sum();
    net.params()[i] = keep;
    num[i] = (up - dn) / 2e-6;
  }
  EXPECT_LT(max_rel_error(grad, num), 1e-5);
}

TEST(Mlp, InitScalesAndFinalGain) {
  std::mt19937_64 rng(63);
  AC ac(64, 8);
  ac.init(rng);
  const auto w0 = ac.actor.W(0);
  const double sd0 = std::sqrt(w0.squaredNorm() / static_cast<double>(w0.size()));
  EXPECT_NEAR(sd0, 1.0 / std::sqrt(64.0), 0.01 / std::sqrt(64.0) * 5);
  const auto wl = ac.actor.W(3);
  const double sdl = std::sqrt(wl.squaredNorm() / static_cast<double>(wl.size()));
  EXPECT_NEAR(sdl, 0.01 / std::sqrt(512.0), 0.1 * 0.01 / std::sqrt(512.0));
  for (Eigen::Index j = 0; j < 8; ++j) EXPECT_NEAR(std::exp(ac.log_std[j]), 0.3, 1e-15);
  EXPECT_EQ(ac.actor.dims(), (std::vector<int>{64, 512, 512, 512, 8}));
  EXPECT_EQ(ac.critic.dims(), (std::vector<int>{64, 128, 128, 1}));
}

TEST(Policy, SampleStatisticsAndLimits) {
  std::mt19937_64 rng(64);
  Vec mean(2), log_std(2), a;
  mean << 0.2, -0.4;
  log_std << std::log(0.3), std::log(0.05);
  const int N = 100000;
  double s[2] = {0, 0}, ss[2] = {0, 0};
  for (int i = 0; i < N; ++i) {
    const double lp = sample_action<double>(mean, log_std, rng, a);
    ASSERT_NEAR(lp, gaussian_log_prob<double>(a, mean, log_std), 1e-12);
    for (int j = 0; j < 2; ++j) {
      s[j] += a[j];
      ss[j] += a[j] * a[j];
    }
  }
  for (int j = 0; j < 2; ++j) {
    const double m = s[j] / N;
    const double sd = std::sqrt(ss[j] / N - m * m);
    EXPECT_NEAR(sd / std::exp(log_std[j]), 1.0, 0.02);
  }
  Vec tiny = Vec::Constant(2, -1000.0);
  sample_action<double>(mean, tiny, rng, a);
  EXPECT_EQ(a[0], mean[0]);
  EXPECT_EQ(a[1], mean[1]);

  std::mt19937_64 r1(7), r2(7);
  Vec a1, a2;
  sample_action<double>(mean, log_std, r1, a1);
  sample_action<double>(mean, log_std, r2, a2);
  EXPECT_EQ(a1, a2);
}

TEST(Policy, LogProbClosedForm) {
  Vec a(1), m(1), ls(1);
  a << 0.7;
  m << 0.1;
  ls << std::log(0.3);
  const double z = 0.6 / 0.3;
  EXPECT_NEAR(gaussian_log_prob<double>(a, m, ls), -0.5 * z * z - std::log(0.3) - 0.5 * std::log(2 * std::numbers::pi), 1e-12);
}

TEST(Policy, EntropyClosedForm) {
  std::mt19937_64 rng(65);
  std::uniform_real_distribution<double> u(-3, 1);
  for (int i = 0; i < 50; ++i) {
    Vec ls(5);
    double want = 0.0;
    for (int j = 0; j < 5; ++j) {
      ls[j] = u(rng);
      want += 0.5 * std::log(2 * std::numbers::pi * std::exp(1.0) * std::exp(2 * ls[j]));
    }
    ASSERT_NEAR(gaussian_entropy(ls), want, 1e-12);
  }
}

TEST(PpoLoss, ToyNetworkGradients) {
  std::mt19937_64 rng(66);
  AC ac(1, 1, {}, {});
  std::normal_distribution<double> n01(0, 0.5);
  for (Eigen::Index i = 0; i < ac.actor.size(); ++i) ac.actor.params()[i] = n01(rng);
  for (Eigen::Index i = 0; i < ac.critic.size(); ++i) ac.critic.params()[i] = n01(rng);
  ASSERT_EQ(ac.actor.size(), 2);
  ASSERT_EQ(ac.critic.size(), 2);
  PpoConfig cfg;
  auto mb = random_batch(ac, 16, rng, 0.1);
  mb.obs *= 0.3;  // keep the mean inside the clip range
  check_loss_gradients(ac, mb, cfg);
}

TEST(PpoLoss, SmallNetworkGradients) {
  std::mt19937_64 rng(67);
  AC ac(4, 3, {8, 6}, {5, 4});
  ac.init(rng);
  for (Eigen::Index i = 0; i < ac.actor.size(); ++i) ac.actor.params()[i] *= 1.0 + 20.0 * (i == ac.actor.size() - 1);
  PpoConfig cfg;
  // Wide log-prob offsets put samples on both sides of the clip range.
  const auto mb = random_batch(ac, 32, rng, 0.5);
  check_loss_gradients(ac, mb, cfg);
}

TEST(PpoLoss, UnitRatioSurrogateIsMinusMeanAdvantage) {
  std::mt19937_64 rng(68);
  AC ac(3, 2, {5}, {5});
  ac.init(rng);
  auto mb = random_batch(ac, 40, rng, 0.0);
  for (int i = 0; i < 40; ++i) {
    mb.old_log_probs[i] = gaussian_log_prob<double>(mb.actions.col(i), ac.mean(mb.obs).col(i), ac.log_std);
  }
  PpoConfig cfg;
  const auto lt = ppo_loss(ac, mb, cfg, kNoGrad);
  EXPECT_NEAR(lt.policy, -mb.advantages.mean(), 1e-12);
  EXPECT_EQ(lt.clip_fraction, 0.0);
}

TEST(PpoLoss, HugeEpsilonEqualsUnclippedSurrogate) {
  std::mt19937_64 rng(69);
  AC ac(3, 2, {5}, {5});
  ac.init(rng);
  const auto mb = random_batch(ac, 50, rng, 1.0);
  PpoConfig cfg;
  cfg.clip_epsilon = 1e300;
  const auto lt = ppo_loss(ac, mb, cfg, kNoGrad);
  const Mat mu = ac.mean(mb.obs);
  double surr = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double lp = gaussian_log_prob<double>(mb.actions.col(i), mu.col(i), ac.log_std);
    surr += std::exp(lp - mb.old_log_probs[i]) * mb.advantages[i];
  }
  EXPECT_NEAR(lt.policy, -surr / 50.0, 1e-12);
  EXPECT_EQ(lt.clip_fraction, 0.0);

  cfg.clip_epsilon = 0.2;
  const auto clipped = ppo_loss(ac, mb, cfg, kNoGrad);
  EXPECT_GE(clipped.clip_fraction, 0.0);
  EXPECT_LE(clipped.clip_fraction, 1.0);
  EXPECT_GT(clipped.clip_fraction, 0.0);
}

TEST(PpoLoss, LossComposition) {
  std::mt19937_64 rng(70);
  AC ac(3, 2, {5}, {5});
  ac.init(rng);
  const auto mb = random_batch(ac, 30, rng, 0.3);
  PpoConfig cfg;
  const auto lt = ppo_loss(ac, mb, cfg, kNoGrad);
  const Vec v = ac.value(mb.obs);
  const double mse = (v - mb.returns).squaredNorm() / 30.0;
  EXPECT_NEAR(lt.value, mse, 1e-12);
  EXPECT_NEAR(lt.entropy, gaussian_entropy(ac.log_std), 1e-12);
  EXPECT_NEAR(lt.total, lt.policy + 0.5 * mse - 0.005 * lt.entropy, 1e-12);
}

namespace {

// Brute force: A_t = sum_k (gamma lambda)^k delta_{t+k} up to the episode end.
std::vector<double> brute_gae(const Trajectory& tr, double g, double l) {
  const std::size_t T = tr.size();
  std::vector<double> delta(T);
  std::vector<std::size_t> last(T);
  for (std::size_t t = 0; t < T; ++t) {
    double next;
    if (tr.ends[t] == StepEnd::Terminal) {
      next = 0.0;
    } else if (tr.ends[t] == StepEnd::Truncated) {
      next = tr.end_values[t];
    } else {
      next = t + 1 < T ? tr.values[t + 1] : tr.tail_value;
    }
    delta[t] = tr.rewards[t] + g * next - tr.values[t];
  }
  std::vector<double> adv(T);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0, w = 1.0;
    for (std::size_t k = t; k < T; ++k) {
      sum += w * delta[k];
      if (tr.ends[k] != StepEnd::None) break;
      w *= g * l;
    }
    adv[t] = sum;
  }
  return adv;
}

Trajectory random_trajectory(std::mt19937_64& rng, bool integers) {
  std::uniform_int_distribution<int> len(1, 10), iv(-5, 5), endk(0, 5);
  std::uniform_real_distribution<double> rv(-2, 2);
  Trajectory tr;
  const int T = len(rng);
  for (int t = 0; t < T; ++t) {
    tr.rewards.push_back(integers ? iv(rng) : rv(rng));
    tr.values.push_back(integers ? iv(rng) : rv(rng));
    const int e = endk(rng);
    tr.ends.push_back(e == 0 ? StepEnd::Terminal : (e == 1 ? StepEnd::Truncated : StepEnd::None));
    tr.end_values.push_back(tr.ends.back() == StepEnd::Truncated ? (integers ? iv(rng) : rv(rng)) : 0.0);
  }
  tr.tail_value = integers ? iv(rng) : rv(rng);
  return tr;
}

}  // namespace

TEST(Gae, WorkedExamples) {
  RolloutBuffer buf(1, 1, 1);
  auto& tr = buf.envs[0];
  tr.rewards = {1, 1};
  tr.values = {0, 0};
  tr.ends = {StepEnd::None, StepEnd::Terminal};
  tr.end_values = {0, 0};
  const auto r = compute_gae(buf, 1.0, 1.0);
  EXPECT_EQ(r.advantages, (std::vector<double>{2, 1}));

  tr.rewards = {0, 0, 0};
  tr.values = {0, 0, 0};
  tr.ends = {StepEnd::None, StepEnd::None, StepEnd::None};
  tr.end_values = {0, 0, 0};
  for (double a : compute_gae(buf, 0.99, 0.95).advantages) EXPECT_EQ(a, 0.0);
}

TEST(Gae, LambdaZeroGivesOneStepResiduals) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    RolloutBuffer buf(1, 1, 1);
    buf.envs[0] = random_trajectory(rng, false);
    const auto& tr = buf.envs[0];
    const auto r = compute_gae(buf, 0.9, 0.0);
    for (std::size_t t = 0; t < tr.size(); ++t) {
      double next = t + 1 < tr.size() ? tr.values[t + 1] : tr.tail_value;
      if (tr.ends[t] == StepEnd::Terminal) next = 0.0;
      if (tr.ends[t] == StepEnd::Truncated) next = tr.end_values[t];
      ASSERT_NEAR(r.advantages[t], tr.rewards[t] + 0.9 * next - tr.values[t], 1e-14);
    }
  }
}

TEST(Gae, MatchesBruteForceExactlyOnDyadicEpisodes) {
  // Integer data with dyadic gamma/lambda keeps every operation exact in binary64.
  std::mt19937_64 rng(72);
  const double gammas[] = {1.0, 0.5, 0.75, 0.875};
  const double lambdas[] = {1.0, 0.5, 0.75, 0.25};
  for (int trial = 0; trial < 500; ++trial) {
    RolloutBuffer buf(1, 1, 3);
    for (auto& tr : buf.envs) tr = random_trajectory(rng, true);
    const double g = gammas[trial % 4], l = lambdas[(trial / 4) % 4];
    const auto r = compute_gae(buf, g, l);
    std::size_t base = 0;
    for (const auto& tr : buf.envs) {
      const auto want = brute_gae(tr, g, l);
      for (std::size_t t = 0; t < tr.size(); ++t) {
        ASSERT_EQ(r.advantages[base + t], want[t]);
        ASSERT_EQ(r.returns[base + t], want[t] + tr.values[t]);
      }
      base += tr.size();
    }
  }
}

TEST(Gae, MatchesBruteForceOnRealEpisodes) {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 500; ++trial) {
    RolloutBuffer buf(1, 1, 2);
    for (auto& tr : buf.envs) tr = random_trajectory(rng, false);
    const auto r = compute_gae(buf, 0.99, 0.95);
    std::size_t base = 0;
    for (const auto& tr : buf.envs) {
      const auto want = brute_gae(tr, 0.99, 0.95);
      for (std::size_t t = 0; t < tr.size(); ++t) ASSERT_NEAR(r.advantages[base + t], want[t], 1e-12);
      base += tr.size();
    }
  }
}

TEST(Gae, EmptyBufferThrows) {
  RolloutBuffer buf(1, 1, 2);
  EXPECT_THROW(compute_gae(buf, 0.99, 0.95), ConfigError);
}

TEST(Advantages, NormalizationExact) {
  std::mt19937_64 rng(74);
  std::normal_distribution<double> n(3.0, 7.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(2048 + trial);
    for (double& x : a) x = n(rng);
    normalize_advantages(a);
    double m = 0.0;
    for (double x : a) m += x;
    m /= static_cast<double>(a.size());
    double v = 0.0;
    for (double x : a) v += (x - m) * (x - m);
    const double sd = std::sqrt(v / static_cast<double>(a.size()));
    ASSERT_LT(std::abs(m), 1e-10);
    ASSERT_LT(std::abs(sd - 1.0), 1e-10);
  }
  std::vector<double> c(10, 4.0);
  normalize_advantages(c);
  for (double x : c) EXPECT_EQ(x, 0.0);
}

namespace {

RolloutBuffer random_buffer(const AC& ac, int envs, int steps, std::mt19937_64& rng, bool zero_adv_rewards) {
  RolloutBuffer buf(ac.obs_dim(), ac.act_dim(), envs);
  std::normal_distribution<double> n01(0, 1);
  for (auto& tr : buf.envs) {
    for (int t = 0; t < steps; ++t) {
      Mat o(ac.obs_dim(), 1);
      for (int k = 0; k < ac.obs_dim(); ++k) o(k, 0) = n01(rng);
      Vec a;
      const double lp = sample_action<double>(ac.mean(o).col(0), ac.log_std, rng, a);
      tr.obs.insert(tr.obs.end(), o.data(), o.data() + o.size());
      tr.actions.insert(tr.actions.end(), a.data(), a.data() + a.size());
      tr.log_probs.push_back(lp);
      tr.rewards.push_back(zero_adv_rewards ? 0.0 : n01(rng));
      tr.values.push_back(ac.value(o)[0]);
      tr.ends.push_back(StepEnd::None);
      tr.end_values.push_back(0.0);
    }
  }
  return buf;
}

}  // namespace

TEST(PpoUpdate, ZeroAdvantagesLeaveActorUnchanged) {
  std::mt19937_64 rng(75);
  AC ac(4, 2, {8}, {8});
  ac.init(rng);
  const auto buf = random_buffer(ac, 2, 64, rng, false);
  const std::vector<double> adv(128, 0.0);
  std::vector<double> ret(128, 1.0);
  PpoConfig cfg;
  cfg.batch_size = 32;
  cfg.buffer_size = 128;
  Adam<double> opt(ac);
  const AC before = ac;
  std::mt19937_64 urng(1);
  const auto stats = ppo_update(ac, opt, buf, adv, ret, cfg, urng);
  EXPECT_FALSE(stats.aborted);
  EXPECT_EQ(stats.minibatches, 12);
  EXPECT_EQ(ac.actor.params(), before.actor.params());
  EXPECT_NE(ac.critic.params(), before.critic.params());
  EXPECT_NE(ac.log_std, before.log_std);
  // The entropy bonus alone raises log_std.
  EXPECT_GT(ac.log_std.minCoeff(), before.log_std.maxCoeff());
}

TEST(PpoUpdate, DeterministicAndImprovesSurrogate) {
  std::mt19937_64 rng(76);
  AC base(4, 2, {16}, {16});
  base.init(rng);
  const auto buf = random_buffer(base, 4, 64, rng, false);
  auto gae = compute_gae(buf, 0.99, 0.95);
  normalize_advantages(gae.advantages);
  PpoConfig cfg;
  cfg.batch_size = 64;
  cfg.buffer_size = 256;
  cfg.learning_rate = 1e-3;

  auto run = [&](AC& ac) {
    Adam<double> opt(ac);
    std::mt19937_64 urng(5);
    return ppo_update(ac, opt, buf, gae.advantages, gae.returns, cfg, urng);
  };
  AC a = base, b = base;
  const auto sa = run(a);
  run(b);
  EXPECT_EQ(a.actor.params(), b.actor.params());
  EXPECT_EQ(a.critic.params(), b.critic.params());
  EXPECT_EQ(a.log_std, b.log_std);
  EXPECT_GE(sa.clip_fraction, 0.0);
  EXPECT_LE(sa.clip_fraction, 1.0);

  // Full-batch surrogate under the updated policy beats the old policy's (-mean A = 0).
  Minibatch<double> mb;
  const int N = static_cast<int>(buf.size());
  mb.obs = Mat(4, N);
  mb.actions = Mat(2, N);
  mb.old_log_probs = Vec(N);
  mb.advantages = Vec(N);
  mb.returns = Vec(N);
  int k = 0;
  for (const auto& tr : buf.envs) {
    for (std::size_t t = 0; t < tr.size(); ++t, ++k) {
      for (int r = 0; r < 4; ++r) mb.obs(r, k) = tr.obs[t * 4 + r];
      for (int r = 0; r < 2; ++r) mb.actions(r, k) = tr.actions[t * 2 + r];
      mb.old_log_probs[k] = tr.log_probs[t];
      mb.advantages[k] = gae.advantages[k];
      mb.returns[k] = gae.returns[k];
    }
  }
  EXPECT_NEAR(ppo_loss(base, mb, cfg, kNoGrad).policy, 0.0, 1e-9);
  EXPECT_LT(ppo_loss(a, mb, cfg, kNoGrad).policy, -1e-3);
}

TEST(PpoUpdate, GradientNormIsClipped) {
  std::mt19937_64 rng(77);
  AC ac(4, 2, {8}, {8});
  ac.init(rng);
  const auto buf = random_buffer(ac, 1, 32, rng, false);
  std::vector<double> adv(32), ret(32, 1e6);
  for (double& a : adv) a = 1e3;
  PpoConfig cfg;
  cfg.batch_size = 32;
  cfg.buffer_size = 32;
  cfg.num_epoch = 1;
  cfg.adam_beta1 = 0.0;
  cfg.adam_beta2 = 0.0;
  cfg.adam_eps = 1e-300;
  // With beta1 = beta2 = 0 Adam moves every parameter by exactly +-lr (sign of its
  // gradient), whatever the clip; this checks the update survives huge gradients.
  Adam<double> opt(ac);
  const AC before = ac;
  std::mt19937_64 urng(3);
  const auto stats = ppo_update(ac, opt, buf, adv, ret, cfg, urng);
  EXPECT_FALSE(stats.aborted);
  const double step = (ac.critic.params() - before.critic.params()).cwiseAbs().maxCoeff();
  EXPECT_NEAR(step, cfg.learning_rate, 1e-12);
}

TEST(PpoUpdate, NonFiniteLossAborts) {
  std::mt19937_64 rng(78);
  AC ac(4, 2, {8}, {8});
  ac.init(rng);
  const auto buf = random_buffer(ac, 1, 32, rng, false);
  std::vector<double> adv(32, 0.5), ret(32, std::numeric_limits<double>::quiet_NaN());
  PpoConfig cfg;
  cfg.batch_size = 32;
  cfg.buffer_size = 32;
  Adam<double> opt(ac);
  const AC before = ac;
  std::mt19937_64 urng(3);
  const auto stats = ppo_update(ac, opt, buf, adv, ret, cfg, urng);
  EXPECT_TRUE(stats.aborted);
  EXPECT_EQ(ac.critic.params(), before.critic.params());
}

TEST(PpoConfigTest, Validation) {
  PpoConfig c;
  EXPECT_NO_THROW(c.validate());
  c.buffer_size = 20481;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PpoConfig{};
  c.gamma = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PpoConfig{};
  c.gae_lambda = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  const nlohmann::json j = PpoConfig{};
  const auto back = j.get<PpoConfig>();
  EXPECT_EQ(back.batch_size, 2048);
  EXPECT_EQ(back.buffer_size, 20480);
  EXPECT_EQ(back.learning_rate, 3e-4);
  EXPECT_EQ(back.entropy_coeff, 0.005);
  EXPECT_EQ(back.clip_epsilon, 0.2);
  EXPECT_EQ(back.gae_lambda, 0.95);
  EXPECT_EQ(back.num_epoch, 3);
}

TEST(Checkpoint, RoundTripBitExact) {
  std::mt19937_64 rng(79);
  AC ac(26, 8);
  ac.init(rng);
  ac.log_std[3] = -0.123456789;
  const std::string path = temp_path("rt.ckpt");
  save_checkpoint(ac, 1u, path);
  const auto ck = load_checkpoint(path);
  EXPECT_EQ(ck.layout_id, 1u);
  EXPECT_EQ(ck.params.actor.dims(), ac.actor.dims());
  EXPECT_EQ(ck.params.critic.dims(), ac.critic.dims());
  EXPECT_EQ(std::memcmp(ck.params.actor.params().data(), ac.actor.params().data(),
                        sizeof(double) * ac.actor.size()),
            0);
  EXPECT_EQ(std::memcmp(ck.params.critic.params().data(), ac.critic.params().data(),
                        sizeof(double) * ac.critic.size()),
            0);
  EXPECT_EQ(ck.params.log_std, ac.log_std);
  const Mat x = Mat::Random(26, 4);
  EXPECT_EQ(ck.params.mean(x), ac.mean(x));

  ActorCritic<float> f = ac.cast<float>();
  save_checkpoint(f, 0u, path);
  const auto back = load_checkpoint(path).params.cast<float>();
  EXPECT_EQ(back.actor.params(), f.actor.params());
  EXPECT_EQ(back.critic.params(), f.critic.params());
  std::remove(path.c_str());
}

TEST(Checkpoint, CorruptFilesRejected) {
  std::mt19937_64 rng(80);
  AC ac(5, 2, {4}, {4});
  ac.init(rng);
  const std::string path = temp_path("bad.ckpt");
  save_checkpoint(ac, 0u, path);
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
  };
  write(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(load_checkpoint(path), FormatError);
  std::string magic = bytes;
  magic[0] = 'X';
  write(magic);
  EXPECT_THROW(load_checkpoint(path), FormatError);
  std::string version = bytes;
  version[8] = 99;
  write(version);
  EXPECT_THROW(load_checkpoint(path), FormatError);
  write(bytes + "x");
  EXPECT_THROW(load_checkpoint(path), FormatError);
  write(bytes);
  EXPECT_NO_THROW(load_checkpoint(path));
  EXPECT_THROW(load_checkpoint_for(path, 6, 2, 0u), ConfigError);
  EXPECT_THROW(load_checkpoint_for(path, 5, 3, 0u), ConfigError);
  EXPECT_THROW(load_checkpoint_for(path, 5, 2, 1u), ConfigError);
  EXPECT_NO_THROW(load_checkpoint_for(path, 5, 2, 0u));
  EXPECT_THROW(load_checkpoint(temp_path("missing.ckpt")), FormatError);
  std::remove(path.c_str());
}
