#include "dremarl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dremarl {

nlohmann::ordered_json to_json(const MetricRecord& r) {
  nlohmann::ordered_json j;
  j["episode"] = r.episode;
  j["eval_mean_reward"] = r.eval_mean_reward;
  j["critic_loss"] = r.critic_loss;
  j["actor_objective"] = r.actor_objective;
  j["estimator_loss"] = r.estimator_loss;
  return j;
}

MetricRecord metric_from_json(const nlohmann::json& j) {
  MetricRecord r;
  r.episode = j.at("episode").get<int>();
  r.eval_mean_reward = j.at("eval_mean_reward").get<double>();
  r.critic_loss = j.at("critic_loss").get<double>();
  r.actor_objective = j.at("actor_objective").get<double>();
  r.estimator_loss = j.at("estimator_loss").get<double>();
  return r;
}

NormalizedScores normalize_scores(const std::vector<double>& scores,
                                  double omega) {
  if (scores.size() < 2) {
    throw std::invalid_argument("normalize: at least two scores required");
  }
  const double lo = *std::min_element(scores.begin(), scores.end());
  const double hi = *std::max_element(scores.begin(), scores.end());
  NormalizedScores out;
  out.values.resize(scores.size());
  if (hi == lo) {
    out.degenerate = true;
    std::fill(out.values.begin(), out.values.end(), omega / 2.0);
    return out;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.values[i] = omega * (scores[i] - lo) / (hi - lo);
  }
  return out;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty input");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double stderr_of(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("stderr: need >= 2 values");
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double var = ss / static_cast<double>(xs.size() - 1);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

RunSummary read_run_dir(const std::string& dir) {
  RunSummary s;
  {
    std::ifstream cf(dir + "/config.json");
    if (!cf) {
      s.error = "missing config.json";
      return s;
    }
    try {
      cf >> s.config;
    } catch (const nlohmann::json::exception& e) {
      s.error = std::string("bad config.json: ") + e.what();
      return s;
    }
  }
  std::ifstream mf(dir + "/metrics.jsonl");
  if (!mf) {
    s.error = "missing metrics.jsonl";
    return s;
  }
  std::string line;
  while (std::getline(mf, line)) {
    if (line.empty()) continue;
    try {
      s.records.push_back(metric_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      s.error = std::string("bad metric line: ") + e.what();
      return s;
    }
  }
  if (s.records.empty()) {
    s.error = "no metric records";
    return s;
  }
  s.final_eval_mean = s.records.back().eval_mean_reward;
  s.ok = true;
  return s;
}

std::vector<GroupSummary> summarize_runs(const std::vector<RunSummary>& runs) {
  std::vector<GroupSummary> groups;
  for (const auto& run : runs) {
    nlohmann::ordered_json key = run.config;
    std::uint64_t seed = 0;
    if (key.contains("seed")) {
      seed = key.at("seed").get<std::uint64_t>();
      key.erase("seed");
    }
    GroupSummary* group = nullptr;
    for (auto& g : groups) {
      if (g.config == key) {
        group = &g;
        break;
      }
    }
    if (group == nullptr) {
      groups.emplace_back();
      group = &groups.back();
      group->config = key;
    }
    group->seeds.push_back(seed);
    if (run.ok) {
      group->finals.push_back(run.final_eval_mean);
    } else {
      group->failed += 1;
    }
  }
  for (auto& g : groups) {
    if (!g.finals.empty()) {
      g.mean = mean_of(g.finals);
      g.stderr_ = g.finals.size() >= 2 ? stderr_of(g.finals) : 0.0;
    }
  }
  return groups;
}

std::string summary_table(const std::vector<GroupSummary>& groups,
                          char delimiter) {
  std::ostringstream out;
  const char d = delimiter;
  out << "scenario" << d << "agents" << d << "reward_setting" << d
      << "estimator" << d << "aggregation" << d << "runs" << d << "failed" << d
      << "mean_final_reward" << d << "stderr" << d << "normalized\n";
  std::vector<double> finals;
  for (const auto& g : groups) {
    if (!g.finals.empty()) finals.push_back(g.mean);
  }
  NormalizedScores norm;
  const bool have_norm = finals.size() >= 2;
  if (have_norm) norm = normalize_scores(finals);
  std::size_t norm_idx = 0;
  auto field = [](const nlohmann::ordered_json& j, const char* key) {
    return j.contains(key) ? j.at(key).dump() : std::string("-");
  };
  for (const auto& g : groups) {
    out << field(g.config, "scenario") << d << field(g.config, "agents") << d
        << field(g.config, "reward_setting") << d
        << field(g.config, "estimator") << d << field(g.config, "aggregation")
        << d << g.seeds.size() << d << g.failed << d;
    if (g.finals.empty()) {
      out << "-" << d << "-" << d << "-";
    } else {
      // shortest round-trip representation, so offline recomputation from
      // the metric files reproduces the table exactly
      out << nlohmann::json(g.mean).dump() << d
          << nlohmann::json(g.stderr_).dump() << d;
      if (have_norm) {
        out << nlohmann::json(norm.values[norm_idx++]).dump();
      } else {
        out << "-";
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace dremarl
