#pragma once

#include <cstdint>
#include <string>

#include "inlab/policy.hpp"

namespace inlab {

// Binary layout (little endian):
//   magic "INLBCKPT", u32 version, u32 layout id,
//   u32 count + u32 dims for the actor, the same for the critic,
//   actor layers (W row-major then b, float64), log_std (float64),
//   critic layers.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ActorCritic<double> params;
  std::uint32_t layout_id = 0;
};

void save_checkpoint(const ActorCritic<double>& params, std::uint32_t layout_id,
                     const std::string& path);

template <typename S>
void save_checkpoint(const ActorCritic<S>& params, std::uint32_t layout_id, const std::string& path) {
  save_checkpoint(params.template cast<double>(), layout_id, path);
}

// Throws FormatError on a bad magic, version or truncated file.
Checkpoint load_checkpoint(const std::string& path);

// As above, and throws ConfigError unless the stored dimensions and layout match.
Checkpoint load_checkpoint_for(const std::string& path, int obs_dim, int act_dim,
                               std::uint32_t layout_id);

}  // namespace inlab
