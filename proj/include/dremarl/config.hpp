#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace dremarl {

/// Validation failure carrying the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::invalid_argument("config field '" + field + "': " + message),
        field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Full description of one training run. Defaults follow the reference
/// hyperparameter set; every field is validated by `validate_config`.
struct RunConfig {
  std::string scenario = "cn";
  int agents = 3;
  std::string reward_setting = "dete";    // dete | dist | ac-dist
  std::string estimator = "dre";          // dre | p2p | gre | none
  std::string aggregation = "ss-ss";      // ss-ss|smo-mo|mo-mo|smo-ss|smo-only
  std::string reward_mode = "mean";       // mean | sample
  bool team_reward = true;
  std::uint64_t seed = 0;
  int episodes = 2000;

  double learning_rate = 1e-3;
  double discount = 0.95;
  double tau = 0.01;
  int batch_size = 1024;
  double entropy_scale = 0.3;
  double alpha = 0.1;
  double beta = 10.0;
  double clip_epsilon = 0.2;
  double explore_start = 0.7;
  double explore_end = 0.9;
  int hidden_layers = 2;
  int hidden_units = 64;
  int attention_heads = 8;
  int attention_units = 8;
  int td_steps = 1;
  double buffer_clear_rate = 0.4;
  int buffer_capacity = 25000;
  int update_interval = 4;    // episodes between update events
  int eval_interval = 100;    // episodes between evaluations
  int eval_episodes = 10;
  int refresh_interval = 100; // episodes between buffer refreshes
};

void validate_config(const RunConfig& config);

/// Canonical serialization; fields appear in declaration order.
nlohmann::ordered_json config_to_json(const RunConfig& config);

/// Builds a config from a JSON object (all keys optional, unknown keys
/// rejected) plus a second object of overrides that win over the file.
RunConfig parse_config(const nlohmann::json& file,
                       const nlohmann::json& overrides = nlohmann::json::object());

RunConfig parse_config_file(const std::string& path,
                            const nlohmann::json& overrides = nlohmann::json::object());

}  // namespace dremarl
