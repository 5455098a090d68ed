#include "inlab/trainer.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "inlab/error.hpp"
#include "inlab/rollout.hpp"

namespace inlab {

struct WorkerPool::Impl {
  std::vector<std::thread> threads;
  std::mutex mu;
  std::condition_variable start_cv, done_cv;
  const std::function<void(int)>* fn = nullptr;
  int tasks = 0;
  long generation = 0;
  int pending = 0;
  bool stop = false;
};

WorkerPool::WorkerPool(int workers) : impl_(std::make_unique<Impl>()), workers_(std::max(1, workers)) {
  for (int w = 1; w < workers_; ++w) {
    impl_->threads.emplace_back([this, w] {
      long seen = 0;
      for (;;) {
        const std::function<void(int)>* fn;
        int tasks;
        {
          std::unique_lock lk(impl_->mu);
          impl_->start_cv.wait(lk, [&] { return impl_->stop || impl_->generation != seen; });
          if (impl_->stop) return;
          seen = impl_->generation;
          fn = impl_->fn;
          tasks = impl_->tasks;
        }
        for (int i = w; i < tasks; i += workers_) (*fn)(i);
        std::lock_guard lk(impl_->mu);
        if (--impl_->pending == 0) impl_->done_cv.notify_one();
      }
    });
  }
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lk(impl_->mu);
    impl_->stop = true;
  }
  impl_->start_cv.notify_all();
  for (auto& t : impl_->threads) t.join();
}

void WorkerPool::run(int tasks, const std::function<void(int)>& fn) {
  if (workers_ == 1) {
    for (int i = 0; i < tasks; ++i) fn(i);
    return;
  }
  {
    std::lock_guard lk(impl_->mu);
    impl_->fn = &fn;
    impl_->tasks = tasks;
    impl_->pending = workers_ - 1;
    ++impl_->generation;
  }
  impl_->start_cv.notify_all();
  for (int i = 0; i < tasks; i += workers_) fn(i);
  std::unique_lock lk(impl_->mu);
  impl_->done_cv.wait(lk, [&] { return impl_->pending == 0; });
}

Policy make_policy(const TrainConfig& cfg) {
  const int od = cfg.layout().size();
  const int ad = cfg.model().joint_count();
  Policy p(od, ad);
  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ull + 1);
  p.init(rng);
  return p;
}

namespace {

void add_episode(IterationRow& row, const EpisodeStats& e, double& fv_sum) {
  row.episodes += 1;
  row.mean_reward += e.sum.total;
  row.mean_length += e.steps;
  row.mean_mimic += e.sum.mimic;
  row.mean_alive += e.sum.alive;
  row.mean_balance += e.sum.balance;
  row.mean_velocity += e.sum.velocity;
  row.mean_sync += e.sum.sync;
  row.falls += e.fell ? 1 : 0;
  fv_sum += e.forward_velocity();
}

void finish_means(IterationRow& row, double fv_sum) {
  if (row.episodes == 0) {
    const double nan = std::nan("");
    row.mean_reward = row.mean_length = row.mean_mimic = row.mean_alive = nan;
    row.mean_balance = row.mean_velocity = row.mean_sync = row.mean_forward_velocity = nan;
    return;
  }
  const double n = row.episodes;
  row.mean_reward /= n;
  row.mean_length /= n;
  row.mean_mimic /= n;
  row.mean_alive /= n;
  row.mean_balance /= n;
  row.mean_velocity /= n;
  row.mean_sync /= n;
  row.mean_forward_velocity = fv_sum / n;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  auto spec = std::make_shared<const EnvSpec>(cfg);
  const int E = cfg.envs;
  const int od = spec->layout.size();
  const int ad = static_cast<int>(spec->ranges.size());

  std::vector<LocomotionEnv> envs;
  envs.reserve(E);
  for (int e = 0; e < E; ++e) envs.emplace_back(spec, env_seed(cfg.seed, e));

  TrainResult result;
  result.policy = make_policy(cfg);
  Policy& policy = result.policy;
  Adam<Real> opt(policy);
  std::mt19937_64 update_rng(cfg.seed ^ 0xA5A5A5A5DEADBEEFull);
  WorkerPool pool(cfg.workers);

  RolloutBuffer buffer(od, ad, E);
  std::vector<std::vector<EpisodeStats>> finished(E);
  Policy::Mat obs_mat(od, E);
  std::vector<double> obs_tmp(static_cast<std::size_t>(od) * E);
  std::int64_t total = 0;
  int iteration = 0;

  while (total < cfg.total_steps) {
    buffer.clear();
    for (auto& f : finished) f.clear();
    const int steps = cfg.ppo.buffer_size;
    const int rounds = (steps + E - 1) / E;
    for (int r = 0; r < rounds; ++r) {
      const int active = std::min(E, steps - r * E);
      for (int e = 0; e < E; ++e) {
        envs[e].observe(std::span<double>(obs_tmp.data() + static_cast<std::size_t>(e) * od, od));
        for (int k = 0; k < od; ++k) obs_mat(k, e) = static_cast<Real>(obs_tmp[static_cast<std::size_t>(e) * od + k]);
      }
      const Policy::Mat mean = policy.mean(obs_mat);
      const Policy::Vec values = policy.value(obs_mat);
      pool.run(active, [&](int e) {
        auto& env = envs[e];
        auto& tr = buffer.envs[e];
        Policy::Vec a;
        const Policy::Vec mu = mean.col(e);
        const Real lp = sample_action<Real>(mu, policy.log_std, env.rng(), a);
        const double* o = obs_tmp.data() + static_cast<std::size_t>(e) * od;
        tr.obs.insert(tr.obs.end(), o, o + od);
        std::vector<double> a_nn(a.data(), a.data() + ad);
        tr.actions.insert(tr.actions.end(), a_nn.begin(), a_nn.end());
        tr.log_probs.push_back(lp);
        tr.values.push_back(values[e]);
        const StepInfo info = env.step(a_nn);
        if (hooks.on_step) hooks.on_step(e, info);
        tr.rewards.push_back(info.reward.total);
        double end_value = 0.0;
        StepEnd end = StepEnd::None;
        if (info.done) {
          if (info.fell) {
            end = StepEnd::Terminal;
          } else {
            end = StepEnd::Truncated;
            const auto ob = env.observe();
            Policy::Mat m(od, 1);
            for (int k = 0; k < od; ++k) m(k, 0) = static_cast<Real>(ob[k]);
            end_value = policy.value(m)[0];
          }
          finished[e].push_back(env.episode());
          env.reset();
        }
        tr.ends.push_back(end);
        tr.end_values.push_back(end_value);
      });
    }
    for (int e = 0; e < E; ++e) {
      envs[e].observe(std::span<double>(obs_tmp.data() + static_cast<std::size_t>(e) * od, od));
      for (int k = 0; k < od; ++k) obs_mat(k, e) = static_cast<Real>(obs_tmp[static_cast<std::size_t>(e) * od + k]);
    }
    const Policy::Vec tails = policy.value(obs_mat);
    for (int e = 0; e < E; ++e) buffer.envs[e].tail_value = tails[e];

    GaeResult gae = compute_gae(buffer, cfg.ppo.gamma, cfg.ppo.gae_lambda);
    normalize_advantages(gae.advantages);
    const PpoStats st = ppo_update(policy, opt, buffer, gae.advantages, gae.returns, cfg.ppo, update_rng);

    total += static_cast<std::int64_t>(buffer.size());
    IterationRow row;
    row.iteration = iteration++;
    row.env_steps = total;
    double fv_sum = 0.0;
    for (const auto& list : finished) {
      for (const auto& ep : list) add_episode(row, ep, fv_sum);
    }
    finish_means(row, fv_sum);
    row.policy_loss = st.policy_loss;
    row.value_loss = st.value_loss;
    row.entropy = st.entropy;
    row.clip_fraction = st.clip_fraction;
    row.approx_kl = st.approx_kl;
    row.update_aborted = st.aborted ? 1 : 0;
    result.log.rows.push_back(row);
    if (hooks.on_iteration) hooks.on_iteration(row);
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

EvalMetrics evaluate(const Policy& policy, const TrainConfig& base, double duration_s,
                     const GaitDefinition* gait_override, int episode_steps,
                     const std::function<void(const SimState&)>& on_state) {
  const long steps = std::lround(duration_s / 0.01);
  EvalMetrics m;
  if (steps <= 0) return m;
  TrainConfig cfg = base;
  cfg.disturbance.enabled = false;
  cfg.max_episode_steps = episode_steps > 0 ? episode_steps : static_cast<int>(steps);
  auto spec = std::make_shared<const EnvSpec>(cfg);
  const int od = spec->layout.size();
  if (policy.obs_dim() != od || policy.act_dim() != static_cast<int>(spec->ranges.size())) {
    throw ConfigError("policy dimensions do not match the configuration");
  }
  LocomotionEnv env(spec, env_seed(cfg.seed, 0));
  if (gait_override) {
    env.set_gait(*gait_override);
    env.reset();
  }
  Policy::Mat o(od, 1);
  std::vector<double> ob(od);
  double dist = 0.0, mimic = 0.0;
  long elapsed = 0;
  for (long k = 0; k < steps; ++k) {
    env.observe(ob);
    for (int i = 0; i < od; ++i) o(i, 0) = static_cast<Real>(ob[i]);
    const Policy::Mat mu = policy.mean(o);
    std::vector<double> a(mu.data(), mu.data() + mu.rows());
    const StepInfo info = env.step(a);
    if (on_state) on_state(env.state());
    const bool last = k + 1 == steps;
    if (info.done || last) {
      const auto& ep = env.episode();
      m.episode_lengths.push_back(ep.steps);
      m.episode_rewards.push_back(ep.sum.total);
      mimic += ep.sum.mimic;
      dist += ep.end_x - ep.start_x;
      elapsed += ep.steps;
      if (info.fell) ++m.falls;
      if (!last) env.reset();
    }
  }
  double s = 0.0;
  for (double r : m.episode_rewards) s += r;
  m.mean_reward = s / static_cast<double>(m.episode_rewards.size());
  m.mean_mimic = mimic / static_cast<double>(m.episode_rewards.size());
  m.mean_forward_velocity = elapsed > 0 ? dist / (static_cast<double>(elapsed) * 0.01) : 0.0;
  return m;
}

}  // namespace inlab
