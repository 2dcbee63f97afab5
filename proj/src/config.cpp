#include "dremarl/config.hpp"

#include <fstream>
#include <set>

#include "dremarl/aggregation.hpp"
#include "dremarl/env.hpp"
#include "dremarl/estimator.hpp"
#include "dremarl/reward_uncertainty.hpp"

namespace dremarl {

namespace {

const std::set<std::string> kKnownKeys = {
    "scenario",        "agents",           "reward_setting",
    "estimator",       "aggregation",      "reward_mode",
    "team_reward",     "seed",             "episodes",
    "learning_rate",   "discount",         "tau",
    "batch_size",      "entropy_scale",    "alpha",
    "beta",            "clip_epsilon",     "explore_start",
    "explore_end",     "hidden_layers",    "hidden_units",
    "attention_heads", "attention_units",  "td_steps",
    "buffer_clear_rate", "buffer_capacity", "update_interval",
    "eval_interval",   "eval_episodes",    "refresh_interval"};

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key, "wrong type");
  }
}

void apply(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  for (const auto& item : j.items()) {
    if (!kKnownKeys.count(item.key())) {
      throw ConfigError(item.key(), "unknown key");
    }
  }
  read(j, "scenario", c.scenario);
  read(j, "agents", c.agents);
  read(j, "reward_setting", c.reward_setting);
  read(j, "estimator", c.estimator);
  read(j, "aggregation", c.aggregation);
  read(j, "reward_mode", c.reward_mode);
  read(j, "team_reward", c.team_reward);
  read(j, "seed", c.seed);
  read(j, "episodes", c.episodes);
  read(j, "learning_rate", c.learning_rate);
  read(j, "discount", c.discount);
  read(j, "tau", c.tau);
  read(j, "batch_size", c.batch_size);
  read(j, "entropy_scale", c.entropy_scale);
  read(j, "alpha", c.alpha);
  read(j, "beta", c.beta);
  read(j, "clip_epsilon", c.clip_epsilon);
  read(j, "explore_start", c.explore_start);
  read(j, "explore_end", c.explore_end);
  read(j, "hidden_layers", c.hidden_layers);
  read(j, "hidden_units", c.hidden_units);
  read(j, "attention_heads", c.attention_heads);
  read(j, "attention_units", c.attention_units);
  read(j, "td_steps", c.td_steps);
  read(j, "buffer_clear_rate", c.buffer_clear_rate);
  read(j, "buffer_capacity", c.buffer_capacity);
  read(j, "update_interval", c.update_interval);
  read(j, "eval_interval", c.eval_interval);
  read(j, "eval_episodes", c.eval_episodes);
  read(j, "refresh_interval", c.refresh_interval);
}

}  // namespace

void validate_config(const RunConfig& c) {
  ScenarioKind kind;
  try {
    kind = scenario_from_string(c.scenario);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scenario", e.what());
  }
  try {
    validate(Scenario{kind, c.agents});
  } catch (const std::invalid_argument& e) {
    throw ConfigError("agents", e.what());
  }
  try {
    reward_setting_from_string(c.reward_setting);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("reward_setting", e.what());
  }
  if (c.estimator != "dre" && c.estimator != "p2p" && c.estimator != "gre" &&
      c.estimator != "none") {
    throw ConfigError("estimator", "must be one of dre|p2p|gre|none");
  }
  try {
    aggregation_from_string(c.aggregation);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("aggregation", e.what());
  }
  try {
    sample_mode_from_string(c.reward_mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("reward_mode", e.what());
  }
  if (c.episodes < 1) throw ConfigError("episodes", "must be >= 1");
  if (c.learning_rate <= 0.0) throw ConfigError("learning_rate", "must be > 0");
  if (c.discount < 0.0 || c.discount >= 1.0) {
    throw ConfigError("discount", "must lie in [0, 1)");
  }
  if (c.tau <= 0.0 || c.tau > 1.0) throw ConfigError("tau", "must lie in (0, 1]");
  if (c.batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
  if (c.entropy_scale < 0.0) throw ConfigError("entropy_scale", "must be >= 0");
  if (c.alpha < 0.0) throw ConfigError("alpha", "must be >= 0");
  if (c.beta < 0.0) throw ConfigError("beta", "must be >= 0");
  if (c.clip_epsilon <= 0.0) throw ConfigError("clip_epsilon", "must be > 0");
  if (c.explore_start < 0.0 || c.explore_start > 1.0) {
    throw ConfigError("explore_start", "must lie in [0, 1]");
  }
  if (c.explore_end < 0.0 || c.explore_end > 1.0) {
    throw ConfigError("explore_end", "must lie in [0, 1]");
  }
  if (c.hidden_layers < 1) throw ConfigError("hidden_layers", "must be >= 1");
  if (c.hidden_units < 1) throw ConfigError("hidden_units", "must be >= 1");
  if (c.attention_heads < 1) throw ConfigError("attention_heads", "must be >= 1");
  if (c.attention_units < 1) throw ConfigError("attention_units", "must be >= 1");
  if (c.td_steps != 1) throw ConfigError("td_steps", "only one-step TD is supported");
  if (c.buffer_clear_rate < 0.0 || c.buffer_clear_rate > 1.0) {
    throw ConfigError("buffer_clear_rate", "must lie in [0, 1]");
  }
  if (c.buffer_capacity < c.batch_size) {
    throw ConfigError("buffer_capacity", "must be >= batch_size");
  }
  if (c.update_interval < 1) throw ConfigError("update_interval", "must be >= 1");
  if (c.eval_interval < 1) throw ConfigError("eval_interval", "must be >= 1");
  if (c.eval_episodes < 2) throw ConfigError("eval_episodes", "must be >= 2");
  if (c.refresh_interval < 1) throw ConfigError("refresh_interval", "must be >= 1");
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["scenario"] = c.scenario;
  j["agents"] = c.agents;
  j["reward_setting"] = c.reward_setting;
  j["estimator"] = c.estimator;
  j["aggregation"] = c.aggregation;
  j["reward_mode"] = c.reward_mode;
  j["team_reward"] = c.team_reward;
  j["seed"] = c.seed;
  j["episodes"] = c.episodes;
  j["learning_rate"] = c.learning_rate;
  j["discount"] = c.discount;
  j["tau"] = c.tau;
  j["batch_size"] = c.batch_size;
  j["entropy_scale"] = c.entropy_scale;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["clip_epsilon"] = c.clip_epsilon;
  j["explore_start"] = c.explore_start;
  j["explore_end"] = c.explore_end;
  j["hidden_layers"] = c.hidden_layers;
  j["hidden_units"] = c.hidden_units;
  j["attention_heads"] = c.attention_heads;
  j["attention_units"] = c.attention_units;
  j["td_steps"] = c.td_steps;
  j["buffer_clear_rate"] = c.buffer_clear_rate;
  j["buffer_capacity"] = c.buffer_capacity;
  j["update_interval"] = c.update_interval;
  j["eval_interval"] = c.eval_interval;
  j["eval_episodes"] = c.eval_episodes;
  j["refresh_interval"] = c.refresh_interval;
  return j;
}

RunConfig parse_config(const nlohmann::json& file,
                       const nlohmann::json& overrides) {
  RunConfig c;
  apply(file, c);
  apply(overrides, c);
  validate_config(c);
  return c;
}

RunConfig parse_config_file(const std::string& path,
                            const nlohmann::json& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  nlohmann::json j;
  // An empty file means "all defaults".
  in >> std::ws;
  if (in.peek() == std::char_traits<char>::eof()) {
    j = nlohmann::json::object();
  } else {
    in.seekg(0);
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("<file>", std::string("parse error: ") + e.what());
    }
  }
  return parse_config(j, overrides);
}

}  // namespace dremarl
