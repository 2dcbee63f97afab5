#pragma once

#include <string>
#include <vector>

namespace dremarl {

/// Mixed-reward operation feeding the critic.
enum class CriticAggregation { kMeanOperation, kSimpleSelection };
/// Lumped-reward operation feeding the actors.
enum class ActorAggregation {
  kMeanOperation,
  kSimpleMeanOperation,
  kSimpleSelection
};

/// One of the five named scheme combinations. `has_critic == false` is the
/// no-aggregation variant: the critic trains on the raw environment reward.
struct AggregationScheme {
  ActorAggregation actor = ActorAggregation::kSimpleSelection;
  CriticAggregation critic = CriticAggregation::kSimpleSelection;
  bool has_critic = true;
};

/// Names: ss-ss, smo-mo, mo-mo, smo-ss, smo-only.
AggregationScheme aggregation_from_string(const std::string& name);
std::string to_string(const AggregationScheme& scheme);

/// Built-up reward vector: estimates with the executed branch replaced by
/// the observed reward.
std::vector<double> build_up(const std::vector<double>& estimates, int k,
                             double r_k);

/// Policy-weighted mixed reward for one agent. `weights` must be a valid
/// distribution over the K branches.
double mixed_reward(CriticAggregation g,
                    const std::vector<std::vector<double>>& built_up, int agent,
                    const std::vector<double>& weights);

/// Lumped reward for one agent.
double lumped_reward(ActorAggregation l,
                     const std::vector<std::vector<double>>& built_up,
                     int agent, double r_k);

}  // namespace dremarl
