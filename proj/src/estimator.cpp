#include "dremarl/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace dremarl {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

Tensor batch_tensor(const std::vector<EstimatorSample>& batch, int width) {
  const int rows = static_cast<int>(batch.size());
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(rows) * width);
  for (const auto& s : batch) {
    if (static_cast<int>(s.observation.size()) != width) {
      throw std::invalid_argument("estimator: observation width mismatch");
    }
    values.insert(values.end(), s.observation.begin(), s.observation.end());
  }
  return Tensor::from({rows, width}, std::move(values));
}

/// Mean Gaussian NLL of rewards on the executed branches, built in-graph:
/// 0.5*ln(2*pi*sigma^2) + (r - mu)^2 / (2*sigma^2).
Tensor nll_mean(const Tensor& mu, const Tensor& sigma,
                const std::vector<int>& ks, const Tensor& rewards) {
  const Tensor mu_k = gather_cols(mu, ks);
  const Tensor sigma_k = gather_cols(sigma, ks);
  const Tensor log_term =
      add_scalar(log_elem(sigma_k), 0.5 * std::log(kTwoPi));
  const Tensor residual = square(sub(rewards, mu_k));
  const Tensor quad = div(residual, scale(square(sigma_k), 2.0));
  return mean_all(add(log_term, quad));
}

}  // namespace

RewardSampleMode sample_mode_from_string(const std::string& name) {
  if (name == "mean") return RewardSampleMode::kMean;
  if (name == "sample") return RewardSampleMode::kSample;
  throw std::invalid_argument("reward mode: unknown name '" + name + "'");
}

std::string to_string(RewardSampleMode mode) {
  return mode == RewardSampleMode::kMean ? "mean" : "sample";
}

// ---------------------------------------------------------------------------
// DRE

DreEstimator::DreEstimator(int observation_width, int actions, Rng& rng,
                           std::vector<int> hidden)
    : actions_(actions) {
  if (actions < 1) throw std::invalid_argument("estimator: actions < 1");
  spec_ = MlpSpec{observation_width, std::move(hidden), 2 * actions, 0.01};
  init_mlp(params_, "estimator", spec_, rng);
}

std::pair<Tensor, Tensor> DreEstimator::heads(const Tensor& observations) const {
  const Tensor out = mlp_forward(params_, "estimator", spec_, observations);
  const Tensor mu = slice_cols(out, 0, actions_);
  const Tensor sigma =
      clamp_min(softplus(slice_cols(out, actions_, actions_)), kSigmaFloor);
  return {mu, sigma};
}

RewardBeliefs DreEstimator::estimate(
    const std::vector<double>& observation) const {
  NoGradScope no_grad;
  const Tensor obs =
      Tensor::from({1, spec_.input}, observation);
  auto [mu, sigma] = heads(obs);
  return RewardBeliefs{mu.values(), sigma.values()};
}

double DreEstimator::update(const std::vector<EstimatorSample>& batch,
                            double alpha, double beta, double lr) {
  if (batch.empty()) throw std::invalid_argument("estimator: empty batch");
  if (alpha < 0.0 || beta < 0.0) {
    throw std::invalid_argument("estimator: negative regularizer coefficient");
  }
  std::vector<int> ks;
  std::vector<double> rewards;
  ks.reserve(batch.size());
  rewards.reserve(batch.size());
  for (const auto& s : batch) {
    if (s.action < 0 || s.action >= actions_) {
      throw std::invalid_argument("estimator: action out of range");
    }
    ks.push_back(s.action);
    rewards.push_back(s.reward);
  }
  const Tensor obs = batch_tensor(batch, spec_.input);
  auto [mu, sigma] = heads(obs);
  const Tensor r = Tensor::from({static_cast<int>(batch.size())}, rewards);
  const Tensor nll = nll_mean(mu, sigma, ks, r);

  // Regularizer per sample: alpha * ||sigma||_1 + beta * var(mu),
  // mean-reduced over the batch.
  const double k = static_cast<double>(actions_);
  const Tensor sigma_l1 = sum_rows(sigma);
  const Tensor mu_mean = scale(sum_rows(mu), 1.0 / k);
  const Tensor mu_var =
      scale(sum_rows(square(sub_colvec(mu, mu_mean))), 1.0 / k);
  const Tensor reg =
      mean_all(add(scale(sigma_l1, alpha), scale(mu_var, beta)));

  const Tensor loss = add(nll, reg);
  const double loss_value = loss.value();
  backward(loss);
  params_.adam_step(lr);
  return loss_value;
}

double nll_loss(const RewardBeliefs& beliefs, int k, double r) {
  if (k < 0 || k >= static_cast<int>(beliefs.mu.size())) {
    throw std::invalid_argument("nll_loss: branch out of range");
  }
  const double sigma = beliefs.sigma.at(k);
  if (sigma <= 0.0) throw std::invalid_argument("nll_loss: sigma <= 0");
  const double diff = r - beliefs.mu[k];
  return 0.5 * std::log(kTwoPi * sigma * sigma) +
         diff * diff / (2.0 * sigma * sigma);
}

double regularizer(const RewardBeliefs& beliefs, double alpha, double beta) {
  if (alpha < 0.0 || beta < 0.0) {
    throw std::invalid_argument("regularizer: negative coefficient");
  }
  double l1 = 0.0;
  for (double s : beliefs.sigma) l1 += s;
  double mean = 0.0;
  for (double m : beliefs.mu) mean += m;
  mean /= static_cast<double>(beliefs.mu.size());
  double var = 0.0;
  for (double m : beliefs.mu) var += (m - mean) * (m - mean);
  var /= static_cast<double>(beliefs.mu.size());
  return alpha * l1 + beta * var;
}

std::vector<double> sample_or_mean(const RewardBeliefs& beliefs,
                                   RewardSampleMode mode, Rng& rng) {
  if (mode == RewardSampleMode::kMean) return beliefs.mu;
  std::vector<double> out(beliefs.mu.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = rng.normal(beliefs.mu[k], beliefs.sigma[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// p2p

P2pEstimator::P2pEstimator(int observation_width, int actions, Rng& rng,
                           bool condition_on_action, std::vector<int> hidden)
    : actions_(actions),
      observation_width_(observation_width),
      condition_on_action_(condition_on_action) {
  if (actions < 1) throw std::invalid_argument("estimator: actions < 1");
  const int input =
      condition_on_action ? observation_width + actions : observation_width;
  spec_ = MlpSpec{input, std::move(hidden), 1, 0.01};
  init_mlp(params_, "p2p", spec_, rng);
}

std::vector<double> P2pEstimator::input_for(
    const std::vector<double>& observation, int action) const {
  if (static_cast<int>(observation.size()) != observation_width_) {
    throw std::invalid_argument("p2p: observation width mismatch");
  }
  if (action < 0 || action >= actions_) {
    throw std::invalid_argument("p2p: action out of range");
  }
  std::vector<double> input = observation;
  if (condition_on_action_) {
    for (int k = 0; k < actions_; ++k) input.push_back(k == action ? 1.0 : 0.0);
  }
  return input;
}

double P2pEstimator::predict(const std::vector<double>& observation,
                             int action) const {
  NoGradScope no_grad;
  const std::vector<double> input = input_for(observation, action);
  const Tensor x = Tensor::from({1, spec_.input}, input);
  return mlp_forward(params_, "p2p", spec_, x).value();
}

std::vector<double> P2pEstimator::branch_predictions(
    const std::vector<double>& observation) const {
  std::vector<double> out(actions_);
  for (int k = 0; k < actions_; ++k) out[k] = predict(observation, k);
  return out;
}

double P2pEstimator::update(const std::vector<EstimatorSample>& batch,
                            double lr) {
  if (batch.empty()) throw std::invalid_argument("p2p: empty batch");
  const int rows = static_cast<int>(batch.size());
  std::vector<double> inputs;
  std::vector<double> targets;
  inputs.reserve(static_cast<std::size_t>(rows) * spec_.input);
  targets.reserve(rows);
  for (const auto& s : batch) {
    const std::vector<double> input = input_for(s.observation, s.action);
    inputs.insert(inputs.end(), input.begin(), input.end());
    targets.push_back(s.reward);
  }
  const Tensor x = Tensor::from({rows, spec_.input}, std::move(inputs));
  const Tensor pred = mlp_forward(params_, "p2p", spec_, x);
  const Tensor t = Tensor::from({rows, 1}, std::move(targets));
  const Tensor loss = mean_all(square(sub(pred, t)));
  const double loss_value = loss.value();
  backward(loss);
  params_.adam_step(lr);
  return loss_value;
}

// ---------------------------------------------------------------------------
// GRE

GreEstimator::GreEstimator(int observation_width, int agents, int actions,
                           Rng& rng, std::vector<int> hidden)
    : agents_(agents), actions_(actions), observation_width_(observation_width) {
  if (agents < 1 || actions < 1) {
    throw std::invalid_argument("gre: agents and actions must be >= 1");
  }
  const int input = agents * observation_width + agents * actions;
  spec_ = MlpSpec{input, std::move(hidden), 2, 0.01};
  init_mlp(params_, "gre", spec_, rng);
}

std::vector<double> GreEstimator::input_for(
    const std::vector<std::vector<double>>& observations,
    const std::vector<int>& actions) const {
  if (static_cast<int>(observations.size()) != agents_ ||
      static_cast<int>(actions.size()) != agents_) {
    throw std::invalid_argument("gre: joint input needs one entry per agent");
  }
  std::vector<double> input;
  input.reserve(spec_.input);
  for (const auto& o : observations) {
    if (static_cast<int>(o.size()) != observation_width_) {
      throw std::invalid_argument("gre: observation width mismatch");
    }
    input.insert(input.end(), o.begin(), o.end());
  }
  for (int a : actions) {
    if (a < 0 || a >= actions_) {
      throw std::invalid_argument("gre: action out of range");
    }
    for (int k = 0; k < actions_; ++k) input.push_back(k == a ? 1.0 : 0.0);
  }
  return input;
}

std::pair<double, double> GreEstimator::predict(
    const std::vector<std::vector<double>>& observations,
    const std::vector<int>& actions) const {
  NoGradScope no_grad;
  const Tensor x =
      Tensor::from({1, spec_.input}, input_for(observations, actions));
  const Tensor out = mlp_forward(params_, "gre", spec_, x);
  const double mu = out.at(0);
  const double sigma = std::max(
      std::max(out.at(1), 0.0) + std::log1p(std::exp(-std::abs(out.at(1)))),
      kSigmaFloor);
  return {mu, sigma};
}

RewardBeliefs GreEstimator::branch_beliefs(
    const std::vector<std::vector<double>>& observations,
    const std::vector<int>& actions, int agent) const {
  if (agent < 0 || agent >= agents_) {
    throw std::invalid_argument("gre: agent out of range");
  }
  RewardBeliefs beliefs;
  beliefs.mu.resize(actions_);
  beliefs.sigma.resize(actions_);
  std::vector<int> joint = actions;
  for (int k = 0; k < actions_; ++k) {
    joint[agent] = k;
    auto [mu, sigma] = predict(observations, joint);
    beliefs.mu[k] = mu;
    beliefs.sigma[k] = sigma;
  }
  return beliefs;
}

double GreEstimator::update(const std::vector<GreSample>& batch, double alpha,
                            double lr) {
  if (batch.empty()) throw std::invalid_argument("gre: empty batch");
  if (alpha < 0.0) throw std::invalid_argument("gre: negative alpha");
  const int rows = static_cast<int>(batch.size());
  std::vector<double> inputs;
  std::vector<double> targets;
  inputs.reserve(static_cast<std::size_t>(rows) * spec_.input);
  targets.reserve(rows);
  for (const auto& s : batch) {
    const std::vector<double> input = input_for(s.observations, s.actions);
    inputs.insert(inputs.end(), input.begin(), input.end());
    targets.push_back(s.team_reward);
  }
  const Tensor x = Tensor::from({rows, spec_.input}, std::move(inputs));
  const Tensor out = mlp_forward(params_, "gre", spec_, x);
  const Tensor mu = slice_cols(out, 0, 1);
  const Tensor sigma = clamp_min(softplus(slice_cols(out, 1, 1)), kSigmaFloor);
  const Tensor r = Tensor::from({rows}, std::move(targets));
  const Tensor nll =
      nll_mean(mu, sigma, std::vector<int>(rows, 0), r);
  const Tensor loss = add(nll, scale(mean_all(sigma), alpha));
  const double loss_value = loss.value();
  backward(loss);
  params_.adam_step(lr);
  return loss_value;
}

}  // namespace dremarl
