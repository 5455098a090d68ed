// inlab: command line front end for training, evaluation and the experiment sweeps.
//
// Exit codes: 0 success, 1 other failure, 2 configuration error, 3 simulation blowup.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "inlab/checkpoint.hpp"
#include "inlab/error.hpp"
#include "inlab/experiments.hpp"
#include "inlab/trainer.hpp"

namespace fs = std::filesystem;
using namespace inlab;

namespace {

struct Common {
  std::string config;
  std::int64_t seed = -1;
  std::string out_dir = "out";
  std::int64_t steps = -1;
  int envs = -1;
  int workers = -1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON configuration file");
  app->add_option("--seed", c.seed, "Random seed (overrides the config)");
  app->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
  app->add_option("--steps", c.steps, "Total environment steps (overrides the config)");
  app->add_option("--envs", c.envs, "Parallel environment copies (overrides the config)");
  app->add_option("--workers", c.workers, "Worker threads for environment stepping");
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("configuration is not valid JSON: " + std::string(e.what()));
  }
}

TrainConfig resolve(const Common& c) {
  nlohmann::json j = c.config.empty() ? nlohmann::json::object() : read_json(c.config);
  if (c.seed >= 0) j["seed"] = c.seed;
  if (c.steps >= 0) j["total_steps"] = c.steps;
  if (c.envs > 0) j["envs"] = c.envs;
  if (c.workers > 0) j["workers"] = c.workers;
  return parse_train_config(j);
}

template <typename T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream is(item);
    T v;
    if (!(is >> v)) throw ConfigError("bad list element '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void print_row(const IterationRow& r) {
  std::printf("iter %4d  steps %9lld  episodes %4d  reward %9.2f  length %7.1f  falls %4d\n", r.iteration,
              static_cast<long long>(r.env_steps), r.episodes, r.mean_reward, r.mean_length, r.falls);
  std::fflush(stdout);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw FormatError("cannot write " + p.string());
  out << text;
}

void print_groups(const std::vector<GroupResult>& groups) {
  for (const auto& g : groups) {
    std::printf("%-10s  median steps-to-threshold %12.0f  first %9.2f  final %9.2f  final length %7.1f  final mimic %9.2f\n",
                g.label.c_str(), g.median_steps_to_threshold(), g.median_first_reward(),
                g.median_final_reward(), g.median_final_length(), g.median_final_mimic());
  }
}

int cmd_train(const Common& c) {
  const TrainConfig cfg = resolve(c);
  fs::create_directories(c.out_dir);
  TrainHooks hooks;
  hooks.on_iteration = print_row;
  const TrainResult r = train(cfg, hooks);
  const fs::path out(c.out_dir);
  write_log(r.log, (out / "log.csv").string());
  save_checkpoint(r.policy, static_cast<std::uint32_t>(cfg.obs_variant()), (out / "policy.ckpt").string());
  write_text(out / "config.json", nlohmann::json(cfg).dump(2) + "\n");
  write_text(out / "wall_time.txt", std::to_string(r.wall_seconds) + "\n");
  return 0;
}

int cmd_eval(const Common& c, const std::string& checkpoint, double duration, const std::string& dump) {
  const TrainConfig cfg = resolve(c);
  const auto ck = load_checkpoint_for(checkpoint, cfg.layout().size(), cfg.model().joint_count(),
                                      static_cast<std::uint32_t>(cfg.obs_variant()));
  std::ofstream dump_out;
  std::function<void(const SimState&)> on_state;
  if (!dump.empty()) {
    dump_out.open(dump);
    if (!dump_out) throw FormatError("cannot write " + dump);
    dump_out << "time,x,z,pitch";
    for (int j = 0; j < cfg.model().joint_count(); ++j) dump_out << ",theta" << j;
    dump_out << '\n';
    on_state = [&](const SimState& s) {
      dump_out << s.time << ',' << s.base.x << ',' << s.base.z << ',' << s.base.pitch;
      for (int j = 0; j < s.joints; ++j) dump_out << ',' << s.joint_angle(j);
      dump_out << '\n';
    };
  }
  const auto m = evaluate(ck.params.cast<Real>(), cfg, duration, nullptr, cfg.max_episode_steps, on_state);
  nlohmann::json j{{"mean_reward", m.mean_reward},
                   {"mean_mimic", m.mean_mimic},
                   {"falls", m.falls},
                   {"mean_forward_velocity", m.mean_forward_velocity},
                   {"episode_lengths", m.episode_lengths}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_compare(const Common& c, const std::string& modes, const std::string& seeds, const std::string& cache) {
  const TrainConfig cfg = resolve(c);
  std::vector<LearningMode> ms;
  for (const auto& s : parse_list<std::string>(modes)) ms.push_back(learning_mode_from_string(s));
  const auto sd = parse_list<std::uint64_t>(seeds);
  TrainHooks hooks;
  hooks.on_iteration = print_row;
  const auto groups = compare_modes(cfg, ms, sd, RunStore(cache), hooks);
  emit_group_plotdata(groups, c.out_dir, "compare");
  print_groups(groups);
  return 0;
}

int cmd_sweep(const Common& c, const std::string& kbs, const std::string& seeds, const std::string& cache) {
  const TrainConfig cfg = resolve(c);
  TrainHooks hooks;
  hooks.on_iteration = print_row;
  const auto groups =
      sweep_kb(cfg, parse_list<double>(kbs), parse_list<std::uint64_t>(seeds), RunStore(cache), hooks);
  emit_group_plotdata(groups, c.out_dir, "sweep_kb");
  print_groups(groups);
  return 0;
}

int cmd_adapt(const Common& c, const std::string& checkpoint, const std::string& parameter,
              const std::string& grid, double duration, double min_velocity, bool stepping) {
  const TrainConfig cfg = resolve(c);
  const auto factors = checked_adapt_grid(parse_list<double>(grid));
  const auto which = adapt_parameter_from_string(parameter);
  const auto ck = load_checkpoint_for(checkpoint, cfg.layout().size(), cfg.model().joint_count(),
                                      static_cast<std::uint32_t>(cfg.obs_variant()));
  const auto r = adapt_sweep(ck.params.cast<Real>(), cfg, which, factors, duration, min_velocity, !stepping);
  fs::create_directories(c.out_dir);
  std::ofstream out(fs::path(c.out_dir) / ("adapt_" + parameter + ".csv"));
  out << "factor,feasible,falls,forward_velocity\n";
  for (std::size_t i = 0; i < r.factors.size(); ++i) {
    out << r.factors[i] << ',' << (r.feasible[i] ? 1 : 0) << ',' << r.falls[i] << ',' << r.forward_velocity[i] << '\n';
    std::printf("factor %6.3f  %s  falls %d  v %.3f m/s\n", r.factors[i], r.feasible[i] ? "feasible  " : "infeasible",
                r.falls[i], r.forward_velocity[i]);
  }
  if (r.nominal_feasible) {
    std::printf("feasible range [%g, %g]\n", r.low, r.high);
  } else {
    std::printf("nominal factor is not feasible\n");
  }
  return 0;
}

int cmd_online(const Common& c, double minutes) {
  nlohmann::json j = c.config.empty() ? nlohmann::json::object() : read_json(c.config);
  OnlineProtocolConfig cfg;
  try {
    from_json(j, cfg);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  if (c.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(c.seed);
  if (minutes > 0.0) cfg.total_minutes = minutes;
  const auto r = online_protocol(cfg);
  fs::create_directories(c.out_dir);
  emit_online_plotdata(r, (fs::path(c.out_dir) / "online_episodes.csv").string());
  write_log(r.log, (fs::path(c.out_dir) / "online_log.csv").string());
  std::printf("episodes %zu  fall rate %.3f  repositions %d  reward first minute %.3f  last minute %.3f\n",
              r.episodes.size(), r.fall_rate(), r.repositions, r.mean_reward_between(0.0, 60.0),
              r.mean_reward_between(cfg.total_minutes * 60.0 - 60.0, cfg.total_minutes * 60.0));
  return 0;
}

int cmd_plotdata(const std::string& log_path, const std::string& out_path, int window) {
  const TrainingLog log = read_log(log_path);
  const auto smooth = smoothed_reward(log, window);
  std::ofstream out(out_path);
  if (!out) throw FormatError("cannot write " + out_path);
  out << "env_steps,mean_reward,smoothed_reward,mean_length\n";
  char buf[128];
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(log.rows[i].env_steps),
                  log.rows[i].mean_reward, smooth[i], log.rows[i].mean_length);
    out << buf;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instruction-learning locomotion experiments on a planar simulator"};
  app.require_subcommand(1);

  Common common;
  std::string checkpoint, dump, modes = "INL,INL_RO,IML,IML_RO", seeds = "0,1,2,3,4", kbs = "0.1,0.5,1.5";
  std::string cache, parameter = "period", grid = "0.5,0.75,1,1.5,2", log_path, out_path;
  double duration = 10.0, min_velocity = 0.05, minutes = -1.0;
  bool stepping = false;
  int window = 10;

  auto* train_cmd = app.add_subcommand("train", "Train a policy");
  add_common(train_cmd, common);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint with the mean action");
  add_common(eval_cmd, common);
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--duration", duration, "Simulated seconds")->capture_default_str();
  eval_cmd->add_option("--state-dump", dump, "Write per-step state CSV");

  auto* compare_cmd = app.add_subcommand("compare", "Compare learning modes across seeds");
  add_common(compare_cmd, common);
  compare_cmd->add_option("--modes", modes, "Comma-separated modes")->capture_default_str();
  compare_cmd->add_option("--seeds", seeds, "Comma-separated seeds")->capture_default_str();
  compare_cmd->add_option("--cache-dir", cache, "Reuse finished runs stored here");

  auto* sweep_cmd = app.add_subcommand("sweep-kb", "Sweep the feedback ratio");
  add_common(sweep_cmd, common);
  sweep_cmd->add_option("--kb", kbs, "Comma-separated k_b values")->capture_default_str();
  sweep_cmd->add_option("--seeds", seeds, "Comma-separated seeds")->capture_default_str();
  sweep_cmd->add_option("--cache-dir", cache, "Reuse finished runs stored here");

  auto* adapt_cmd = app.add_subcommand("adapt", "Scan feedforward period or amplitude");
  add_common(adapt_cmd, common);
  adapt_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  adapt_cmd->add_option("--parameter", parameter, "period or amplitude")->capture_default_str();
  adapt_cmd->add_option("--grid", grid, "Comma-separated factors (must include 1)")->capture_default_str();
  adapt_cmd->add_option("--duration", duration, "Evaluation seconds per factor")->capture_default_str();
  adapt_cmd->add_option("--min-velocity", min_velocity, "Forward velocity threshold")->capture_default_str();
  adapt_cmd->add_flag("--stepping", stepping, "Do not require forward progress");

  auto* online_cmd = app.add_subcommand("online", "Simulate the episodic online-learning schedule");
  add_common(online_cmd, common);
  online_cmd->add_option("--minutes", minutes, "Simulated minutes (overrides the config)");

  auto* plot_cmd = app.add_subcommand("plotdata", "Write a smoothed reward curve from a training log");
  plot_cmd->add_option("--log", log_path, "Training log CSV")->required();
  plot_cmd->add_option("--out", out_path, "Output CSV")->required();
  plot_cmd->add_option("--window", window, "Moving-average window")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) return cmd_train(common);
    if (*eval_cmd) return cmd_eval(common, checkpoint, duration, dump);
    if (*compare_cmd) return cmd_compare(common, modes, seeds, cache);
    if (*sweep_cmd) return cmd_sweep(common, kbs, seeds, cache);
    if (*adapt_cmd) return cmd_adapt(common, checkpoint, parameter, grid, duration, min_velocity, stepping);
    if (*online_cmd) return cmd_online(common, minutes);
    if (*plot_cmd) return cmd_plotdata(log_path, out_path, window);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const SimulationBlowup& e) {
    std::cerr << "simulation blowup: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
