#pragma once

#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "dremarl/aggregation.hpp"
#include "dremarl/config.hpp"
#include "dremarl/env.hpp"
#include "dremarl/estimator.hpp"
#include "dremarl/metrics.hpp"
#include "dremarl/nets.hpp"
#include "dremarl/replay_buffer.hpp"
#include "dremarl/reward_uncertainty.hpp"

namespace dremarl {

/// Output channels of a training run. The metric stream holds only fields
/// that are deterministic under a fixed config and seed; wall-clock timings
/// go to their own stream.
struct TrainSinks {
  std::ostream* metrics = nullptr;
  std::ostream* timings = nullptr;
  std::ostream* trajectories = nullptr;
};

struct UpdateLogs {
  double estimator_loss = 0.0;
  double critic_loss = 0.0;
  double actor_objective = 0.0;
};

struct TrainResult {
  std::vector<MetricRecord> records;
  double final_eval_mean = 0.0;
  double final_eval_stderr = 0.0;
};

/// Centralized-critic, decentralized-actor trainer: per-agent softmax
/// actors, a shared graph-attention critic, per-agent reward estimators,
/// replay with periodic refresh, and target networks for both the critic
/// bootstrap and the actors' importance ratios.
class Trainer {
 public:
  explicit Trainer(const RunConfig& config);

  TrainResult run(const TrainSinks& sinks = {});

  // --- pieces of the loop, exposed so tests can drive them directly ---

  /// Rolls one 25-step episode. Each step each agent acts from its policy
  /// with probability `policy_prob`, uniformly at random otherwise; the
  /// stored policy vector is the softmax output either way.
  std::vector<Transition> collect_episode(double policy_prob);

  /// One update event: estimators, critic, actors, target soft updates.
  /// Each component consumes its own uniform batch draw.
  UpdateLogs update_once();

  /// Greedy evaluation on the fixed seed sequence: (mean, stderr) of the
  /// episodic reward over `eval_episodes` episodes.
  std::pair<double, double> evaluate();

  /// Policy-weighted mixed rewards for a batch, ordered [agent][sample].
  std::vector<std::vector<double>> mixed_rewards(
      const std::vector<const Transition*>& batch);
  /// Lumped rewards for a batch, ordered [agent][sample].
  std::vector<std::vector<double>> lumped_rewards(
      const std::vector<const Transition*>& batch);
  /// Critic regression targets: mixed reward plus discounted target value
  /// of the next observation.
  std::vector<std::vector<double>> critic_targets(
      const std::vector<const Transition*>& batch);

  /// Behavior policy of one agent for one observation.
  std::vector<double> policy(int agent, const std::vector<double>& obs) const;

  void soft_update_targets();

  // --- state access ---
  const RunConfig& config() const { return config_; }
  int num_agents() const { return num_agents_; }
  ReplayBuffer& buffer() { return buffer_; }
  ParamStore& actor_params(int agent) { return actors_.at(agent); }
  ParamStore& actor_target_params(int agent) { return actor_targets_.at(agent); }
  ParamStore& critic_params() { return critic_; }
  ParamStore& critic_target_params() { return critic_target_; }
  DreEstimator& dre_estimator(int agent) { return dre_.at(agent); }
  P2pEstimator& p2p_estimator(int agent) { return p2p_.at(agent); }
  GreEstimator& gre_estimator() { return *gre_; }
  const MlpSpec& actor_spec() const { return actor_spec_; }
  const GatSpec& critic_spec() const { return critic_spec_; }

  double explore_probability(int episode) const;

 private:
  Tensor actor_probs(const ParamStore& store, const Tensor& obs_batch) const;
  /// Joint node features of a batch: [B * agents x obs_width], sample-major.
  Tensor joint_nodes(const std::vector<const Transition*>& batch,
                     bool next_obs) const;
  Tensor agent_obs_matrix(const std::vector<const Transition*>& batch,
                          int agent, bool next_obs) const;
  /// Critic values per agent as plain numbers, [agent][sample].
  std::vector<std::vector<double>> critic_values_plain(
      const ParamStore& store, const std::vector<const Transition*>& batch,
      bool next_obs);
  /// Branch estimates per agent for a whole batch, [agent][sample][branch].
  std::vector<std::vector<std::vector<double>>> branch_estimates(
      const std::vector<const Transition*>& batch);

  double update_estimators(const std::vector<const Transition*>& batch);
  double update_critic(const std::vector<const Transition*>& batch);
  double update_actors(const std::vector<const Transition*>& batch);

  RunConfig config_;
  Scenario scenario_;
  int num_agents_ = 0;
  int obs_width_ = 0;
  AggregationScheme scheme_;
  RewardSampleMode sample_mode_;

  MlpSpec actor_spec_;
  GatSpec critic_spec_;
  std::vector<ParamStore> actors_;
  std::vector<ParamStore> actor_targets_;
  ParamStore critic_;
  ParamStore critic_target_;
  std::vector<DreEstimator> dre_;
  std::vector<P2pEstimator> p2p_;
  std::optional<GreEstimator> gre_;

  ReplayBuffer buffer_;
  RewardPerturber perturber_;
  Rng env_rng_;
  Rng explore_rng_;
  Rng batch_rng_;
  Rng reward_sample_rng_;

  int current_episode_ = 0;
  std::ostream* trajectory_sink_ = nullptr;
};

}  // namespace dremarl
