#include "inlab/action_pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "inlab/error.hpp"

namespace inlab {

FeedbackConfig FeedbackConfig::uniform(ComposeMode mode, double k_b, std::size_t joints) {
  FeedbackConfig cfg;
  cfg.mode = mode;
  cfg.k_b.assign(joints, k_b);
  return cfg;
}

double FeedbackConfig::max_ratio() const {
  return k_b.empty() ? 0.0 : *std::max_element(k_b.begin(), k_b.end());
}

void FeedbackConfig::validate(std::size_t joints) const {
  if (mode == ComposeMode::IML) return;
  if (k_b.size() != joints) {
    std::ostringstream msg;
    msg << "k_b has " << k_b.size() << " entries, robot has " << joints << " joints";
    throw ConfigError(msg.str());
  }
  for (double k : k_b) {
    if (!(k >= 0.0 && k <= 2.0)) throw RangeError("k_b entries must lie in [0, 2]");
  }
}

void filter_step(PipelineState& state, std::span<const double> a_nn, std::span<double> a_fb) {
  const std::size_t n = state.a_fb_last.size();
  if (a_nn.size() != n || a_fb.size() != n) throw ConfigError("filter_step: size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    const double clipped = std::clamp(a_nn[i], -1.0, 1.0);
    a_fb[i] = kFilterMemory * state.a_fb_last[i] + kFilterInput * clipped;
    state.a_fb_last[i] = a_fb[i];
  }
}

void compose(std::span<const double> a_ff, std::span<const double> a_fb,
             const FeedbackConfig& cfg, std::span<double> a_t) {
  const std::size_t n = a_fb.size();
  if (a_t.size() != n) throw ConfigError("compose: size mismatch");
  if (cfg.mode == ComposeMode::IML) {
    std::copy(a_fb.begin(), a_fb.end(), a_t.begin());
    return;
  }
  if (a_ff.size() != n || cfg.k_b.size() != n) throw ConfigError("compose: size mismatch");
  for (std::size_t i = 0; i < n; ++i) a_t[i] = a_ff[i] + cfg.k_b[i] * a_fb[i];
}

double to_command_angle(double a_t, const JointRange& range) {
  const double sat = std::clamp(a_t, -1.0, 1.0);
  return range.theta_min + (sat + 1.0) / 2.0 * (range.theta_max - range.theta_min);
}

void reset(PipelineState& state) { std::fill(state.a_fb_last.begin(), state.a_fb_last.end(), 0.0); }

PipelineOutput run_pipeline(PipelineState& state, std::span<const double> a_nn,
                            std::span<const double> a_ff, const FeedbackConfig& cfg,
                            std::span<const JointRange> ranges) {
  const std::size_t n = state.a_fb_last.size();
  if (ranges.size() != n) throw ConfigError("run_pipeline: joint range count mismatch");
  PipelineOutput out;
  out.a_fb.resize(n);
  out.a_t.resize(n);
  out.theta_cmd.resize(n);
  filter_step(state, a_nn, out.a_fb);
  compose(a_ff, out.a_fb, cfg, out.a_t);
  for (std::size_t i = 0; i < n; ++i) out.theta_cmd[i] = to_command_angle(out.a_t[i], ranges[i]);
  return out;
}

std::string to_string(ComposeMode mode) { return mode == ComposeMode::IML ? "IML" : "INL"; }

void to_json(nlohmann::json& j, const FeedbackConfig& cfg) {
  j = nlohmann::json{{"mode", to_string(cfg.mode)}, {"k_b", cfg.k_b}};
}

void from_json(const nlohmann::json& j, FeedbackConfig& cfg) {
  cfg = FeedbackConfig{};
  const auto mode = j.value("mode", std::string("INL"));
  if (mode == "INL") {
    cfg.mode = ComposeMode::INL;
  } else if (mode == "IML") {
    cfg.mode = ComposeMode::IML;
  } else {
    throw ConfigError("unknown feedback mode '" + mode + "'");
  }
  if (j.contains("k_b")) {
    const auto& k = j.at("k_b");
    if (k.is_number()) {
      cfg.k_b = {k.get<double>()};
    } else {
      cfg.k_b = k.get<std::vector<double>>();
    }
  }
}

FeedbackConfig broadcast_to(FeedbackConfig cfg, std::size_t joints) {
  if (cfg.k_b.size() == 1 && joints != 1) cfg.k_b.assign(joints, cfg.k_b.front());
  if (cfg.k_b.empty()) cfg.k_b.assign(joints, 0.0);
  return cfg;
}

}  // namespace inlab
