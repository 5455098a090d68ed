#pragma once

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

#include "inlab/units.hpp"

namespace inlab {

// Filter memory of the feedback branch; every element stays in [-1, 1].
struct PipelineState {
  std::vector<double> a_fb_last;

  explicit PipelineState(std::size_t joints = 0) : a_fb_last(joints, 0.0) {}
};

enum class ComposeMode { IML, INL };

struct FeedbackConfig {
  ComposeMode mode = ComposeMode::INL;
  std::vector<double> k_b;  // per joint, each in [0, 2]

  // Broadcast a scalar ratio to all joints.
  static FeedbackConfig uniform(ComposeMode mode, double k_b, std::size_t joints);
  double max_ratio() const;
  void validate(std::size_t joints) const;
};

// Low-pass gain of the feedback branch: a_fb = 0.9 a_fb_last + 0.1 clip(a_nn).
inline constexpr double kFilterMemory = 0.9;
inline constexpr double kFilterInput = 0.1;

// Clips the raw policy output to [-1, 1], then low-pass filters it. Writes the
// filtered feedback to `a_fb` and updates the filter memory.
void filter_step(PipelineState& state, std::span<const double> a_nn, std::span<double> a_fb);

// INL: a_t = a_ff + k_b * a_fb (may leave [-1, 1]). IML: a_t = a_fb.
void compose(std::span<const double> a_ff, std::span<const double> a_fb,
             const FeedbackConfig& cfg, std::span<double> a_t);

// Saturates the action to [-1, 1] and maps it linearly onto the joint range.
double to_command_angle(double a_t, const JointRange& range);

void reset(PipelineState& state);

// Convenience bundle of one control step's intermediate vectors.
struct PipelineOutput {
  std::vector<double> a_fb;
  std::vector<double> a_t;
  std::vector<double> theta_cmd;  // degrees
};

PipelineOutput run_pipeline(PipelineState& state, std::span<const double> a_nn,
                            std::span<const double> a_ff, const FeedbackConfig& cfg,
                            std::span<const JointRange> ranges);

void to_json(nlohmann::json& j, const FeedbackConfig& cfg);
// Accepts {"mode": "INL"|"IML", "k_b": scalar or array}; a scalar k_b is kept
// as a single element and broadcast by `broadcast_to`.
void from_json(const nlohmann::json& j, FeedbackConfig& cfg);
FeedbackConfig broadcast_to(FeedbackConfig cfg, std::size_t joints);

std::string to_string(ComposeMode mode);

}  // namespace inlab
