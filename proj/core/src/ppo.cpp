#include "inlab/ppo.hpp"

#include "inlab/error.hpp"

namespace inlab {

void PpoConfig::validate() const {
  if (batch_size <= 0 || buffer_size <= 0) throw ConfigError("batch and buffer sizes must be positive");
  if (buffer_size % batch_size != 0) throw ConfigError("buffer_size must be divisible by batch_size");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) throw ConfigError("gae_lambda must lie in (0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (num_epoch <= 0) throw ConfigError("num_epoch must be positive");
  if (!(clip_epsilon > 0.0)) throw ConfigError("clip_epsilon must be positive");
  if (entropy_coeff < 0.0 || value_coeff < 0.0 || max_grad_norm < 0.0) {
    throw ConfigError("loss coefficients must be nonnegative");
  }
}

void to_json(nlohmann::json& j, const PpoConfig& c) {
  j = nlohmann::json{{"batch_size", c.batch_size},       {"buffer_size", c.buffer_size},
                     {"learning_rate", c.learning_rate}, {"entropy_coeff", c.entropy_coeff},
                     {"clip_epsilon", c.clip_epsilon},   {"gae_lambda", c.gae_lambda},
                     {"num_epoch", c.num_epoch},         {"gamma", c.gamma},
                     {"value_coeff", c.value_coeff},     {"max_grad_norm", c.max_grad_norm}};
}

void from_json(const nlohmann::json& j, PpoConfig& c) {
  PpoConfig d;
  c.batch_size = j.value("batch_size", d.batch_size);
  c.buffer_size = j.value("buffer_size", d.buffer_size);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.entropy_coeff = j.value("entropy_coeff", d.entropy_coeff);
  c.clip_epsilon = j.value("clip_epsilon", d.clip_epsilon);
  c.gae_lambda = j.value("gae_lambda", d.gae_lambda);
  c.num_epoch = j.value("num_epoch", d.num_epoch);
  c.gamma = j.value("gamma", d.gamma);
  c.value_coeff = j.value("value_coeff", d.value_coeff);
  c.max_grad_norm = j.value("max_grad_norm", d.max_grad_norm);
  c.validate();
}

}  // namespace inlab
