#include "inlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "inlab/checkpoint.hpp"
#include "inlab/error.hpp"
#include "inlab/rollout.hpp"

namespace inlab {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------

namespace {

double field_of(const IterationRow& r, LogField f) {
  switch (f) {
    case LogField::Reward: return r.mean_reward;
    case LogField::Length: return r.mean_length;
    case LogField::Mimic: return r.mean_mimic;
    case LogField::ForwardVelocity: return r.mean_forward_velocity;
  }
  return r.mean_reward;
}

}  // namespace

double window_mean(const TrainingLog& log, LogField field, double begin_frac, double end_frac) {
  const std::size_t n = log.rows.size();
  if (n == 0) return std::nan("");
  auto lo = static_cast<std::size_t>(std::floor(begin_frac * static_cast<double>(n)));
  auto hi = static_cast<std::size_t>(std::ceil(end_frac * static_cast<double>(n)));
  lo = std::min(lo, n - 1);
  hi = std::clamp(hi, lo + 1, n);
  double s = 0.0;
  int k = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double v = field_of(log.rows[i], field);
    if (std::isfinite(v)) {
      s += v;
      ++k;
    }
  }
  return k ? s / k : std::nan("");
}

std::int64_t steps_to_threshold(const TrainingLog& log, int window, double fraction) {
  if (log.rows.empty()) return -1;
  const double plateau = window_mean(log, LogField::Reward, 0.9, 1.0);
  const auto smooth = smoothed_reward(log, window);
  const double threshold = fraction * plateau;
  for (std::size_t i = 0; i < smooth.size(); ++i) {
    if (smooth[i] >= threshold) return log.rows[i].env_steps;
  }
  return -1;
}

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

RunSummary summarize(const TrainingLog& log, const std::string& label, std::uint64_t seed) {
  RunSummary s;
  s.label = label;
  s.seed = seed;
  s.steps_to_threshold = steps_to_threshold(log);
  s.first_reward = window_mean(log, LogField::Reward, 0.0, 0.1);
  s.final_reward = window_mean(log, LogField::Reward, 0.9, 1.0);
  s.first_length = window_mean(log, LogField::Length, 0.0, 0.1);
  s.final_length = window_mean(log, LogField::Length, 0.9, 1.0);
  s.first_mimic = window_mean(log, LogField::Mimic, 0.0, 0.1);
  s.final_mimic = window_mean(log, LogField::Mimic, 0.9, 1.0);
  return s;
}

// ---------------------------------------------------------------------------

std::string RunStore::key(const TrainConfig& cfg) const {
  nlohmann::json j = cfg;
  j["results_version"] = kResultsVersion;
  j.erase("workers");  // results do not depend on the worker count
  return config_hash(j);
}

bool RunStore::contains(const TrainConfig& cfg) const {
  if (dir_.empty()) return false;
  const fs::path p = fs::path(dir_) / key(cfg);
  return fs::exists(p / "log.csv") && fs::exists(p / "policy.ckpt");
}

RunStore::Run RunStore::get(const TrainConfig& cfg, const TrainHooks& hooks) const {
  Run run;
  if (!dir_.empty()) {
    const fs::path p = fs::path(dir_) / key(cfg);
    run.path = p.string();
    if (contains(cfg)) {
      run.log = read_log((p / "log.csv").string());
      const auto ck = load_checkpoint((p / "policy.ckpt").string());
      run.policy = ck.params.cast<Real>();
      run.cached = true;
      return run;
    }
  }
  TrainResult r = train(cfg, hooks);
  run.log = std::move(r.log);
  run.policy = std::move(r.policy);
  if (!dir_.empty()) {
    const fs::path p(run.path);
    fs::create_directories(p);
    std::ofstream(p / "config.json") << nlohmann::json(cfg).dump(2) << '\n';
    save_checkpoint(run.policy, static_cast<std::uint32_t>(cfg.obs_variant()), (p / "policy.ckpt").string());
    std::ofstream(p / "wall_time.txt") << r.wall_seconds << '\n';
    // Written last so a partial directory is never mistaken for a finished run.
    write_log(run.log, (p / "log.csv.tmp").string());
    fs::rename(p / "log.csv.tmp", p / "log.csv");
  }
  return run;
}

namespace {

double median_of(const std::vector<RunSummary>& runs, double RunSummary::*field) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(r.*field);
  return median(v);
}

}  // namespace

double GroupResult::median_steps_to_threshold() const {
  std::vector<double> v;
  // A run that never reaches its threshold counts as taking forever.
  for (const auto& r : runs) {
    v.push_back(r.steps_to_threshold < 0 ? INFINITY : static_cast<double>(r.steps_to_threshold));
  }
  return median(v);
}
double GroupResult::median_first_reward() const { return median_of(runs, &RunSummary::first_reward); }
double GroupResult::median_final_reward() const { return median_of(runs, &RunSummary::final_reward); }
double GroupResult::median_final_length() const { return median_of(runs, &RunSummary::final_length); }
double GroupResult::median_final_mimic() const { return median_of(runs, &RunSummary::final_mimic); }

std::vector<GroupResult> compare_modes(const TrainConfig& base, const std::vector<LearningMode>& modes,
                                       const std::vector<std::uint64_t>& seeds, const RunStore& store,
                                       const TrainHooks& hooks) {
  std::vector<GroupResult> out;
  for (LearningMode m : modes) {
    GroupResult g;
    g.label = to_string(m);
    for (std::uint64_t s : seeds) {
      TrainConfig c = base;
      c.mode = m;
      c.seed = s;
      auto run = store.get(c, hooks);
      g.runs.push_back(summarize(run.log, g.label, s));
      g.logs.push_back(std::move(run.log));
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GroupResult> sweep_kb(const TrainConfig& base, const std::vector<double>& k_b_values,
                                  const std::vector<std::uint64_t>& seeds, const RunStore& store,
                                  const TrainHooks& hooks) {
  std::vector<GroupResult> out;
  for (double kb : k_b_values) {
    GroupResult g;
    char buf[32];
    std::snprintf(buf, sizeof buf, "kb_%g", kb);
    g.label = buf;
    for (std::uint64_t s : seeds) {
      TrainConfig c = base;
      c.mode = LearningMode::INL;
      c.k_b = {kb};
      c.seed = s;
      auto run = store.get(c, hooks);
      g.runs.push_back(summarize(run.log, g.label, s));
      g.logs.push_back(std::move(run.log));
    }
    out.push_back(std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------------------

AdaptParameter adapt_parameter_from_string(const std::string& name) {
  if (name == "period") return AdaptParameter::Period;
  if (name == "amplitude") return AdaptParameter::Amplitude;
  throw ConfigError("unknown adaptation parameter '" + name + "' (expected period or amplitude)");
}

std::string to_string(AdaptParameter p) { return p == AdaptParameter::Period ? "period" : "amplitude"; }

std::vector<double> checked_adapt_grid(std::vector<double> grid) {
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const auto nominal = std::find_if(grid.begin(), grid.end(), [](double f) { return std::abs(f - 1.0) < 1e-12; });
  if (nominal == grid.end()) throw ConfigError("the adaptation grid must contain 1.0");
  for (double f : grid) {
    if (!(f > 0.0)) throw ConfigError("adaptation factors must be positive");
  }
  return grid;
}

AdaptResult adapt_sweep(const Policy& policy, const TrainConfig& cfg, AdaptParameter parameter,
                        std::vector<double> grid, double duration_s, double min_velocity,
                        bool require_forward) {
  grid = checked_adapt_grid(std::move(grid));

  AdaptResult res;
  res.factors = grid;
  const GaitDefinition base = cfg.gait_definition();
  for (double f : grid) {
    bool ok = false;
    int falls = 0;
    double v = 0.0;
    try {
      const GaitDefinition g =
          parameter == AdaptParameter::Period ? scale_period(base, f) : scale_amplitude(base, f);
      const auto m = evaluate(policy, cfg, duration_s, &g);
      falls = m.falls;
      v = m.mean_forward_velocity;
      ok = falls == 0 && (!require_forward || v > min_velocity);
    } catch (const RangeError&) {
      // The scaled reference leaves the joint range.
      falls = -1;
    }
    res.feasible.push_back(ok);
    res.falls.push_back(falls);
    res.forward_velocity.push_back(v);
  }
  const auto nominal = std::find_if(grid.begin(), grid.end(), [](double f) { return std::abs(f - 1.0) < 1e-12; });
  const auto i1 = static_cast<std::size_t>(nominal - grid.begin());
  res.nominal_feasible = res.feasible[i1];
  if (res.nominal_feasible) {
    std::size_t lo = i1, hi = i1;
    while (lo > 0 && res.feasible[lo - 1]) --lo;
    while (hi + 1 < grid.size() && res.feasible[hi + 1]) ++hi;
    res.low = grid[lo];
    res.high = grid[hi];
  }
  return res;
}

// ---------------------------------------------------------------------------

OnlineProtocolConfig OnlineProtocolConfig::defaults() {
  OnlineProtocolConfig c;
  TrainConfig& t = c.train;
  t = default_train_config(RobotKind::Quadruped);
  t.gait = "trot";
  t.mode = LearningMode::INL;
  t.k_b = {0.07};
  t.observation = "hardware";
  t.reward_preset = "leg_angular";
  t.envs = 1;
  t.ppo.buffer_size = 330;
  t.ppo.batch_size = 110;
  return c;
}

void OnlineProtocolConfig::validate() const {
  train.validate();
  if (!(walk_seconds > 0.0) || hold_seconds < 0.0 || recovery_seconds < 0.0 || !(total_minutes > 0.0)) {
    throw ConfigError("online protocol durations must be positive");
  }
}

void to_json(nlohmann::json& j, const OnlineProtocolConfig& c) {
  j = nlohmann::json{{"train", c.train},
                     {"walk_seconds", c.walk_seconds},
                     {"hold_seconds", c.hold_seconds},
                     {"recovery_seconds", c.recovery_seconds},
                     {"total_minutes", c.total_minutes}};
}

void from_json(const nlohmann::json& j, OnlineProtocolConfig& c) {
  c = OnlineProtocolConfig::defaults();
  if (j.contains("train")) {
    // Start from the protocol defaults so a partial "train" block only overrides what it names.
    nlohmann::json t = c.train;
    t.merge_patch(j.at("train"));
    from_json(t, c.train);
  }
  c.walk_seconds = j.value("walk_seconds", c.walk_seconds);
  c.hold_seconds = j.value("hold_seconds", c.hold_seconds);
  c.recovery_seconds = j.value("recovery_seconds", c.recovery_seconds);
  c.total_minutes = j.value("total_minutes", c.total_minutes);
}

double OnlineResult::fall_rate() const {
  if (episodes.empty()) return 0.0;
  int f = 0;
  for (const auto& e : episodes) f += e.fell ? 1 : 0;
  return static_cast<double>(f) / static_cast<double>(episodes.size());
}

double OnlineResult::mean_reward_between(double t0, double t1) const {
  double s = 0.0;
  int n = 0;
  for (const auto& e : episodes) {
    if (e.start_time >= t0 && e.start_time < t1) {
      s += e.reward;
      ++n;
    }
  }
  return n ? s / n : std::nan("");
}

OnlineResult online_protocol(const OnlineProtocolConfig& cfg) {
  cfg.validate();
  const int walk_steps = static_cast<int>(std::lround(cfg.walk_seconds / 0.01));
  const int hold_steps = static_cast<int>(std::lround(cfg.hold_seconds / 0.01));
  const int rec_steps = static_cast<int>(std::lround(cfg.recovery_seconds / 0.01));
  TrainConfig tc = cfg.train;
  tc.max_episode_steps = walk_steps;
  auto spec = std::make_shared<const EnvSpec>(tc);
  const int od = spec->layout.size();
  const int ad = static_cast<int>(spec->ranges.size());
  const auto& sim = spec->sim;

  LocomotionEnv env(spec, env_seed(tc.seed, 0));
  Policy policy = make_policy(tc);
  Adam<Real> opt(policy);
  std::mt19937_64 update_rng(tc.seed ^ 0xA5A5A5A5DEADBEEFull);
  RolloutBuffer buffer(od, ad, 1);
  Policy::Mat o(od, 1);
  std::vector<double> ob(od);
  const auto target = reference_angles(env.gait(), 0.0);

  auto to_mat = [&](const std::vector<double>& v) {
    for (int k = 0; k < od; ++k) o(k, 0) = static_cast<Real>(v[k]);
  };

  OnlineResult out;
  const double total_s = cfg.total_minutes * 60.0;
  double t = 0.0;
  std::int64_t steps_total = 0;
  int index = 0;
  while (t < total_s - 1e-9) {
    OnlineEpisode ep;
    ep.index = index++;
    ep.start_time = t;
    env.begin_episode();
    buffer.clear();
    auto& tr = buffer.envs[0];
    StepInfo info;
    for (int k = 0; k < walk_steps; ++k) {
      env.observe(ob);
      to_mat(ob);
      const Policy::Vec mu = policy.mean(o).col(0);
      const Real v = policy.value(o)[0];
      Policy::Vec a;
      const Real lp = sample_action<Real>(mu, policy.log_std, env.rng(), a);
      std::vector<double> a_nn(a.data(), a.data() + ad);
      tr.obs.insert(tr.obs.end(), ob.begin(), ob.end());
      tr.actions.insert(tr.actions.end(), a_nn.begin(), a_nn.end());
      tr.log_probs.push_back(lp);
      tr.values.push_back(v);
      info = env.step(a_nn);
      tr.rewards.push_back(info.reward.total);
      ep.reward += info.reward.total;
      if (info.done) {
        if (info.fell) {
          tr.ends.push_back(StepEnd::Terminal);
          tr.end_values.push_back(0.0);
        } else {
          env.observe(ob);
          to_mat(ob);
          tr.ends.push_back(StepEnd::Truncated);
          tr.end_values.push_back(policy.value(o)[0]);
        }
        break;
      }
      tr.ends.push_back(StepEnd::None);
      tr.end_values.push_back(0.0);
    }
    ep.steps = static_cast<int>(tr.size());
    ep.fell = info.fell;
    steps_total += ep.steps;

    GaeResult gae = compute_gae(buffer, tc.ppo.gamma, tc.ppo.gae_lambda);
    normalize_advantages(gae.advantages);
    const PpoStats st = ppo_update(policy, opt, buffer, gae.advantages, gae.returns, tc.ppo, update_rng);

    // Hold the current posture during the update, then ramp back to the start posture.
    SimState& s = env.mutable_state();
    bool broken = info.blowup;
    if (!broken) {
      try {
        const auto hold = sim.joint_angles_deg(s);
        for (int k = 0; k < hold_steps; ++k) sim.step(s, hold);
        const auto from = sim.joint_angles_deg(s);
        std::vector<double> cmd(from.size());
        for (int k = 1; k <= rec_steps; ++k) {
          const double w = static_cast<double>(k) / rec_steps;
          for (std::size_t j = 0; j < cmd.size(); ++j) cmd[j] = (1.0 - w) * from[j] + w * target[j];
          sim.step(s, cmd);
        }
      } catch (const SimulationBlowup&) {
        broken = true;
      }
    }
    if (broken || check_termination(s, std::numeric_limits<std::int64_t>::max()) == Termination::Fell) {
      env.reset();
      ep.repositioned = true;
      ++out.repositions;
    }
    t += ep.steps * 0.01 + cfg.hold_seconds + cfg.recovery_seconds;

    IterationRow row;
    row.iteration = ep.index;
    row.env_steps = steps_total;
    row.episodes = 1;
    row.mean_reward = ep.reward;
    row.mean_length = ep.steps;
    row.mean_velocity = ep.reward;
    row.falls = ep.fell ? 1 : 0;
    row.mean_forward_velocity = env.episode().forward_velocity();
    row.policy_loss = st.policy_loss;
    row.value_loss = st.value_loss;
    row.entropy = st.entropy;
    row.clip_fraction = st.clip_fraction;
    row.approx_kl = st.approx_kl;
    row.update_aborted = st.aborted ? 1 : 0;
    out.log.rows.push_back(row);
    out.episodes.push_back(ep);
  }
  return out;
}

// ---------------------------------------------------------------------------

void emit_plotdata(const TrainingLog& log, const std::string& path) { write_log(log, path); }

void emit_group_plotdata(const std::vector<GroupResult>& groups, const std::string& dir,
                         const std::string& prefix) {
  fs::create_directories(dir);
  for (const auto& g : groups) {
    std::ofstream out(fs::path(dir) / (prefix + "_" + g.label + ".csv"));
    if (!out) throw FormatError("cannot write plot data in " + dir);
    out << "env_steps";
    for (const auto& r : g.runs) out << ",seed_" << r.seed;
    out << ",median\n";
    std::size_t rows = 0;
    for (const auto& l : g.logs) rows = std::max(rows, l.rows.size());
    char buf[32];
    for (std::size_t i = 0; i < rows; ++i) {
      std::int64_t steps = 0;
      std::vector<double> vals;
      for (const auto& l : g.logs) {
        if (i < l.rows.size()) {
          steps = l.rows[i].env_steps;
          vals.push_back(l.rows[i].mean_reward);
        } else {
          vals.push_back(std::nan(""));
        }
      }
      out << steps;
      for (double v : vals) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
      }
      std::snprintf(buf, sizeof buf, "%.17g", median(vals));
      out << ',' << buf << '\n';
    }
  }
  std::ofstream sum(fs::path(dir) / (prefix + "_summary.csv"));
  sum << "label,seed,steps_to_threshold,first_reward,final_reward,first_length,final_length,first_mimic,final_mimic\n";
  char buf[256];
  for (const auto& g : groups) {
    for (const auto& r : g.runs) {
      std::snprintf(buf, sizeof buf, "%s,%llu,%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", g.label.c_str(),
                    static_cast<unsigned long long>(r.seed), static_cast<long long>(r.steps_to_threshold),
                    r.first_reward, r.final_reward, r.first_length, r.final_length, r.first_mimic,
                    r.final_mimic);
      sum << buf;
    }
    std::snprintf(buf, sizeof buf, "%s,median,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", g.label.c_str(),
                  g.median_steps_to_threshold(), median_of(g.runs, &RunSummary::first_reward),
                  g.median_final_reward(), median_of(g.runs, &RunSummary::first_length),
                  g.median_final_length(), median_of(g.runs, &RunSummary::first_mimic), g.median_final_mimic());
    sum << buf;
  }
}

void emit_online_plotdata(const OnlineResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << "episode,start_time,steps,reward,fell,repositioned\n";
  char buf[128];
  for (const auto& e : result.episodes) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%d,%.17g,%d,%d\n", e.index, e.start_time, e.steps, e.reward,
                  e.fell ? 1 : 0, e.repositioned ? 1 : 0);
    out << buf;
  }
}

}  // namespace inlab
