#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace dremarl {

/// One evaluation row of the metric stream. Serialization is byte-stable
/// for identical values, so identical runs produce identical streams.
struct MetricRecord {
  int episode = 0;
  double eval_mean_reward = 0.0;
  double critic_loss = 0.0;
  double actor_objective = 0.0;
  double estimator_loss = 0.0;
};

nlohmann::ordered_json to_json(const MetricRecord& record);
MetricRecord metric_from_json(const nlohmann::json& j);

/// Affine rescale of method scores onto [0, omega]; the minimum maps to 0
/// and the maximum to omega. An all-equal input is degenerate and maps
/// every entry to omega / 2.
struct NormalizedScores {
  std::vector<double> values;
  bool degenerate = false;
};

NormalizedScores normalize_scores(const std::vector<double>& scores,
                                  double omega = 10.0);

/// Aggregate of one completed run, read back from its metric file.
struct RunSummary {
  nlohmann::ordered_json config;
  std::vector<MetricRecord> records;
  double final_eval_mean = 0.0;
  bool ok = false;
  std::string error;
};

RunSummary read_run_dir(const std::string& dir);

struct GroupSummary {
  nlohmann::ordered_json config;  // seed removed
  std::vector<std::uint64_t> seeds;
  std::vector<double> finals;
  double mean = 0.0;
  double stderr_ = 0.0;
  int failed = 0;
};

/// Groups per-run summaries by configuration (ignoring the seed) and
/// computes mean and standard error of the final evaluation scores.
std::vector<GroupSummary> summarize_runs(const std::vector<RunSummary>& runs);

/// Renders groups as a delimiter-separated table, one row per
/// configuration, with a normalized-performance column when at least two
/// groups finish.
std::string summary_table(const std::vector<GroupSummary>& groups,
                          char delimiter = '\t');

double mean_of(const std::vector<double>& xs);
double stderr_of(const std::vector<double>& xs);

}  // namespace dremarl
