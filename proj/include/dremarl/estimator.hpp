#pragma once

#include <string>
#include <vector>

#include "dremarl/nets.hpp"
#include "dremarl/param_store.hpp"
#include "dremarl/rng.hpp"
#include "dremarl/tensor.hpp"

namespace dremarl {

/// Per-branch Gaussian reward parameters for one observation.
struct RewardBeliefs {
  std::vector<double> mu;
  std::vector<double> sigma;
};

enum class RewardSampleMode { kMean, kSample };

RewardSampleMode sample_mode_from_string(const std::string& name);
std::string to_string(RewardSampleMode mode);

/// Lower bound applied to every predicted standard deviation.
inline constexpr double kSigmaFloor = 1e-4;

struct EstimatorSample {
  std::vector<double> observation;
  int action = 0;
  double reward = 0.0;
};

// ---------------------------------------------------------------------------
// Multi-action-branch distributional estimator. One net per agent maps an
// observation to K Gaussian branches; the executed action selects the branch
// the likelihood term trains.

class DreEstimator {
 public:
  DreEstimator(int observation_width, int actions, Rng& rng,
               std::vector<int> hidden = {64, 64});

  RewardBeliefs estimate(const std::vector<double>& observation) const;

  /// One Adam step on mean(nll + regularizer) over the batch.
  /// Returns the pre-step mean loss.
  double update(const std::vector<EstimatorSample>& batch, double alpha,
                double beta, double lr);

  /// In-graph heads for a [B x obs] batch: mu [B x K], sigma [B x K]
  /// (softplus, floored).
  std::pair<Tensor, Tensor> heads(const Tensor& observations) const;

  int actions() const { return actions_; }
  int observation_width() const { return spec_.input; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 private:
  MlpSpec spec_;
  int actions_;
  ParamStore params_;
};

/// Gaussian negative log likelihood of reward r on branch k.
double nll_loss(const RewardBeliefs& beliefs, int k, double r);
/// alpha * sum(sigma) + beta * population-variance(mu).
double regularizer(const RewardBeliefs& beliefs, double alpha, double beta);

/// mode kMean returns mu; kSample draws each branch independently.
std::vector<double> sample_or_mean(const RewardBeliefs& beliefs,
                                   RewardSampleMode mode, Rng& rng);

// ---------------------------------------------------------------------------
// Point-to-point regression baseline: a single scalar prediction trained
// with squared error. The action enters as a one-hot input block when
// `condition_on_action` is set; without it the regressor sees the
// observation alone.

class P2pEstimator {
 public:
  P2pEstimator(int observation_width, int actions, Rng& rng,
               bool condition_on_action = true,
               std::vector<int> hidden = {64, 64});

  double predict(const std::vector<double>& observation, int action) const;
  /// Predictions for every action branch (identical when the action is not
  /// part of the input).
  std::vector<double> branch_predictions(
      const std::vector<double>& observation) const;

  /// One Adam step on mean squared error; returns the pre-step loss.
  double update(const std::vector<EstimatorSample>& batch, double lr);

  int actions() const { return actions_; }
  bool condition_on_action() const { return condition_on_action_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const MlpSpec& spec() const { return spec_; }

 private:
  std::vector<double> input_for(const std::vector<double>& observation,
                                int action) const;

  MlpSpec spec_;
  int actions_;
  int observation_width_;
  bool condition_on_action_;
  ParamStore params_;
};

// ---------------------------------------------------------------------------
// Global estimator conditioned on the joint state-action pair: all agents'
// observations concatenated with per-agent action one-hots (N*K inputs)
// map to a single Gaussian over the team reward. Per-agent branch beliefs
// come from re-querying with that agent's one-hot slot swept over K.

struct GreSample {
  std::vector<std::vector<double>> observations;  // per agent
  std::vector<int> actions;                       // per agent
  double team_reward = 0.0;
};

class GreEstimator {
 public:
  GreEstimator(int observation_width, int agents, int actions, Rng& rng,
               std::vector<int> hidden = {64, 64});

  /// Gaussian (mu, sigma) for one joint state-action pair.
  std::pair<double, double> predict(
      const std::vector<std::vector<double>>& observations,
      const std::vector<int>& actions) const;

  /// Branch beliefs for `agent`: its action slot swept over K, all other
  /// slots held at the executed joint action.
  RewardBeliefs branch_beliefs(
      const std::vector<std::vector<double>>& observations,
      const std::vector<int>& actions, int agent) const;

  /// One Adam step on mean(nll + alpha * sigma); returns pre-step loss.
  double update(const std::vector<GreSample>& batch, double alpha, double lr);

  int agents() const { return agents_; }
  int actions() const { return actions_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 private:
  std::vector<double> input_for(
      const std::vector<std::vector<double>>& observations,
      const std::vector<int>& actions) const;

  MlpSpec spec_;
  int agents_;
  int actions_;
  int observation_width_;
  ParamStore params_;
};

}  // namespace dremarl
