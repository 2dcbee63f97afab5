#include "dremarl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dremarl {

namespace {

// Fixed stream ids for seed derivation.
constexpr std::uint64_t kActorInitStream = 1;
constexpr std::uint64_t kCriticInitStream = 2;
constexpr std::uint64_t kEstimatorInitStream = 3;
constexpr std::uint64_t kEnvStream = 10;
constexpr std::uint64_t kExploreStream = 11;
constexpr std::uint64_t kBatchStream = 12;
constexpr std::uint64_t kRewardSampleStream = 13;
constexpr std::uint64_t kPerturbStream = 14;
constexpr std::uint64_t kEvalEnvStream = 0x4556;
constexpr std::uint64_t kEvalPerturbStream = 0x4557;

constexpr double kRatioFloor = 1e-8;

int sample_categorical(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(probs.size()) - 1;
}

int argmax(const std::vector<double>& xs) {
  return static_cast<int>(
      std::max_element(xs.begin(), xs.end()) - xs.begin());
}

}  // namespace

Trainer::Trainer(const RunConfig& config)
    : config_(config),
      scenario_{scenario_from_string(config.scenario), config.agents},
      scheme_(aggregation_from_string(config.aggregation)),
      sample_mode_(sample_mode_from_string(config.reward_mode)),
      buffer_(static_cast<std::size_t>(config.buffer_capacity)),
      perturber_(reward_setting_from_string(config.reward_setting),
                 derive_seed(config.seed, kPerturbStream)),
      env_rng_(derive_seed(config.seed, kEnvStream)),
      explore_rng_(derive_seed(config.seed, kExploreStream)),
      batch_rng_(derive_seed(config.seed, kBatchStream)),
      reward_sample_rng_(derive_seed(config.seed, kRewardSampleStream)) {
  validate_config(config_);
  num_agents_ = total_agents(scenario_);
  obs_width_ = observation_width(scenario_);
  const std::vector<int> hidden(config_.hidden_layers, config_.hidden_units);

  actor_spec_ = MlpSpec{obs_width_, hidden, kNumActions, 0.01};
  Rng actor_rng(derive_seed(config_.seed, kActorInitStream));
  for (int i = 0; i < num_agents_; ++i) {
    ParamStore store;
    init_mlp(store, "actor", actor_spec_, actor_rng);
    actors_.push_back(std::move(store));
    actor_targets_.push_back(actors_.back().clone_detached());
  }

  critic_spec_ = GatSpec{obs_width_, config_.attention_heads,
                         config_.attention_units, hidden, 0.01};
  Rng critic_rng(derive_seed(config_.seed, kCriticInitStream));
  init_gat(critic_, "critic", critic_spec_, critic_rng);
  critic_target_ = critic_.clone_detached();

  Rng est_rng(derive_seed(config_.seed, kEstimatorInitStream));
  if (config_.estimator == "dre") {
    for (int i = 0; i < num_agents_; ++i) {
      dre_.emplace_back(obs_width_, kNumActions, est_rng, hidden);
    }
  } else if (config_.estimator == "p2p") {
    for (int i = 0; i < num_agents_; ++i) {
      p2p_.emplace_back(obs_width_, kNumActions, est_rng, true, hidden);
    }
  } else if (config_.estimator == "gre") {
    gre_.emplace(obs_width_, num_agents_, kNumActions, est_rng, hidden);
  }
}

double Trainer::explore_probability(int episode) const {
  const double half = 0.5 * static_cast<double>(config_.episodes);
  const double frac =
      half <= 0.0 ? 1.0
                  : std::min(1.0, static_cast<double>(episode) / half);
  return config_.explore_start +
         (config_.explore_end - config_.explore_start) * frac;
}

Tensor Trainer::actor_probs(const ParamStore& store,
                            const Tensor& obs_batch) const {
  return softmax_rows(mlp_forward(store, "actor", actor_spec_, obs_batch));
}

std::vector<double> Trainer::policy(int agent,
                                    const std::vector<double>& obs) const {
  NoGradScope no_grad;
  const Tensor x = Tensor::from({1, obs_width_}, obs);
  return actor_probs(actors_.at(agent), x).values();
}

std::vector<Transition> Trainer::collect_episode(double policy_prob) {
  ResetResult rr = reset(scenario_, env_rng_.next_u64());
  WorldState state = std::move(rr.state);
  std::vector<std::vector<double>> obs = std::move(rr.observations);

  std::vector<Transition> episode;
  episode.reserve(kEpisodeLength);
  for (int t = 0; t < kEpisodeLength; ++t) {
    Transition tr;
    tr.observations = obs;
    tr.policies.resize(num_agents_);
    tr.actions.resize(num_agents_);
    for (int i = 0; i < num_agents_; ++i) {
      tr.policies[i] = policy(i, obs[i]);
      if (explore_rng_.uniform() < policy_prob) {
        tr.actions[i] = sample_categorical(tr.policies[i], explore_rng_);
      } else {
        tr.actions[i] = explore_rng_.below(kNumActions);
      }
    }
    const StepResult sr = step(state, tr.actions);
    tr.rewards.resize(num_agents_);
    for (int i = 0; i < num_agents_; ++i) {
      const double base =
          config_.team_reward ? sr.team_reward : sr.rewards[i];
      tr.rewards[i] = perturber_.perturb(base, tr.actions[i]);
    }
    tr.next_observations = sr.next_observations;

    if (trajectory_sink_ != nullptr) {
      nlohmann::ordered_json rec;
      rec["episode"] = current_episode_;
      rec["step"] = t;
      nlohmann::json pos = nlohmann::json::array();
      nlohmann::json vel = nlohmann::json::array();
      for (int i = 0; i < num_agents_; ++i) {
        pos.push_back({state.positions[i].x, state.positions[i].y});
        vel.push_back({state.velocities[i].x, state.velocities[i].y});
      }
      rec["positions"] = pos;
      rec["velocities"] = vel;
      rec["actions"] = tr.actions;
      rec["env_rewards"] = sr.rewards;
      rec["team_reward"] = sr.team_reward;
      rec["stored_rewards"] = tr.rewards;
      *trajectory_sink_ << rec.dump() << "\n";
    }

    obs = tr.next_observations;
    episode.push_back(std::move(tr));
  }
  return episode;
}

Tensor Trainer::agent_obs_matrix(const std::vector<const Transition*>& batch,
                                 int agent, bool next_obs) const {
  const int rows = static_cast<int>(batch.size());
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(rows) * obs_width_);
  for (const Transition* t : batch) {
    const auto& o = next_obs ? t->next_observations[agent]
                             : t->observations[agent];
    values.insert(values.end(), o.begin(), o.end());
  }
  return Tensor::from({rows, obs_width_}, std::move(values));
}

Tensor Trainer::joint_nodes(const std::vector<const Transition*>& batch,
                            bool next_obs) const {
  const int rows = static_cast<int>(batch.size()) * num_agents_;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(rows) * obs_width_);
  for (const Transition* t : batch) {
    for (int i = 0; i < num_agents_; ++i) {
      const auto& o =
          next_obs ? t->next_observations[i] : t->observations[i];
      values.insert(values.end(), o.begin(), o.end());
    }
  }
  return Tensor::from({rows, obs_width_}, std::move(values));
}

std::vector<std::vector<double>> Trainer::critic_values_plain(
    const ParamStore& store, const std::vector<const Transition*>& batch,
    bool next_obs) {
  NoGradScope no_grad;
  const Tensor v = gat_forward(store, "critic", critic_spec_,
                               joint_nodes(batch, next_obs), num_agents_);
  std::vector<std::vector<double>> out(
      num_agents_, std::vector<double>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (int i = 0; i < num_agents_; ++i) {
      out[i][b] = v.at(static_cast<std::size_t>(b) * num_agents_ + i);
    }
  }
  return out;
}

std::vector<std::vector<std::vector<double>>> Trainer::branch_estimates(
    const std::vector<const Transition*>& batch) {
  const std::size_t B = batch.size();
  std::vector<std::vector<std::vector<double>>> est(
      num_agents_,
      std::vector<std::vector<double>>(B, std::vector<double>(kNumActions)));
  if (config_.estimator == "dre") {
    NoGradScope no_grad;
    for (int i = 0; i < num_agents_; ++i) {
      auto [mu, sigma] = dre_[i].heads(agent_obs_matrix(batch, i, false));
      for (std::size_t b = 0; b < B; ++b) {
        if (sample_mode_ == RewardSampleMode::kMean) {
          for (int k = 0; k < kNumActions; ++k) {
            est[i][b][k] = mu.at(static_cast<int>(b), k);
          }
        } else {
          for (int k = 0; k < kNumActions; ++k) {
            est[i][b][k] = reward_sample_rng_.normal(
                mu.at(static_cast<int>(b), k), sigma.at(static_cast<int>(b), k));
          }
        }
      }
    }
  } else if (config_.estimator == "p2p") {
    NoGradScope no_grad;
    for (int i = 0; i < num_agents_; ++i) {
      const MlpSpec& spec = p2p_[i].spec();
      for (int k = 0; k < kNumActions; ++k) {
        std::vector<double> values;
        values.reserve(B * spec.input);
        for (const Transition* t : batch) {
          const auto& o = t->observations[i];
          values.insert(values.end(), o.begin(), o.end());
          for (int a = 0; a < kNumActions; ++a) {
            values.push_back(a == k ? 1.0 : 0.0);
          }
        }
        const Tensor pred = mlp_forward(
            p2p_[i].params(), "p2p", spec,
            Tensor::from({static_cast<int>(B), spec.input}, std::move(values)));
        for (std::size_t b = 0; b < B; ++b) est[i][b][k] = pred.at(b);
      }
    }
  } else if (config_.estimator == "gre") {
    for (std::size_t b = 0; b < B; ++b) {
      for (int i = 0; i < num_agents_; ++i) {
        RewardBeliefs beliefs = gre_->branch_beliefs(
            batch[b]->observations, batch[b]->actions, i);
        est[i][b] = sample_or_mean(beliefs, sample_mode_, reward_sample_rng_);
      }
    }
  } else {
    throw std::logic_error("branch_estimates: no estimator configured");
  }
  return est;
}

std::vector<std::vector<double>> Trainer::mixed_rewards(
    const std::vector<const Transition*>& batch) {
  const std::size_t B = batch.size();
  std::vector<std::vector<double>> mixed(num_agents_, std::vector<double>(B));
  if (config_.estimator == "none" || !scheme_.has_critic) {
    for (int i = 0; i < num_agents_; ++i) {
      for (std::size_t b = 0; b < B; ++b) mixed[i][b] = batch[b]->rewards[i];
    }
    return mixed;
  }
  const auto est = branch_estimates(batch);
  // Aggregation weights are the target policies at the stored observations.
  std::vector<Tensor> target_probs(num_agents_);
  {
    NoGradScope no_grad;
    for (int i = 0; i < num_agents_; ++i) {
      target_probs[i] =
          actor_probs(actor_targets_[i], agent_obs_matrix(batch, i, false));
    }
  }
  std::vector<std::vector<double>> built(num_agents_);
  for (std::size_t b = 0; b < B; ++b) {
    for (int i = 0; i < num_agents_; ++i) {
      built[i] = build_up(est[i][b], batch[b]->actions[i],
                          batch[b]->rewards[i]);
    }
    for (int i = 0; i < num_agents_; ++i) {
      std::vector<double> weights(kNumActions);
      for (int k = 0; k < kNumActions; ++k) {
        weights[k] = target_probs[i].at(static_cast<int>(b), k);
      }
      mixed[i][b] = mixed_reward(scheme_.critic, built, i, weights);
    }
  }
  return mixed;
}

std::vector<std::vector<double>> Trainer::lumped_rewards(
    const std::vector<const Transition*>& batch) {
  const std::size_t B = batch.size();
  std::vector<std::vector<double>> lumped(num_agents_, std::vector<double>(B));
  const bool pass_through =
      config_.estimator == "none" ||
      scheme_.actor == ActorAggregation::kSimpleSelection;
  if (pass_through) {
    for (int i = 0; i < num_agents_; ++i) {
      for (std::size_t b = 0; b < B; ++b) lumped[i][b] = batch[b]->rewards[i];
    }
    return lumped;
  }
  const auto est = branch_estimates(batch);
  std::vector<std::vector<double>> built(num_agents_);
  for (std::size_t b = 0; b < B; ++b) {
    for (int i = 0; i < num_agents_; ++i) {
      built[i] = build_up(est[i][b], batch[b]->actions[i],
                          batch[b]->rewards[i]);
    }
    for (int i = 0; i < num_agents_; ++i) {
      lumped[i][b] =
          lumped_reward(scheme_.actor, built, i, batch[b]->rewards[i]);
    }
  }
  return lumped;
}

std::vector<std::vector<double>> Trainer::critic_targets(
    const std::vector<const Transition*>& batch) {
  auto targets = mixed_rewards(batch);
  const auto next_values = critic_values_plain(critic_target_, batch, true);
  for (int i = 0; i < num_agents_; ++i) {
    for (std::size_t b = 0; b < batch.size(); ++b) {
      targets[i][b] += config_.discount * next_values[i][b];
    }
  }
  return targets;
}

double Trainer::update_estimators(
    const std::vector<const Transition*>& batch) {
  if (config_.estimator == "none") return 0.0;
  if (config_.estimator == "gre") {
    std::vector<GreSample> samples;
    samples.reserve(batch.size());
    for (const Transition* t : batch) {
      GreSample s;
      s.observations = t->observations;
      s.actions = t->actions;
      double mean = 0.0;
      for (double r : t->rewards) mean += r;
      s.team_reward = mean / static_cast<double>(num_agents_);
      samples.push_back(std::move(s));
    }
    return gre_->update(samples, config_.alpha, config_.learning_rate);
  }
  double total = 0.0;
  for (int i = 0; i < num_agents_; ++i) {
    std::vector<EstimatorSample> samples;
    samples.reserve(batch.size());
    for (const Transition* t : batch) {
      samples.push_back(
          EstimatorSample{t->observations[i], t->actions[i], t->rewards[i]});
    }
    if (config_.estimator == "dre") {
      total += dre_[i].update(samples, config_.alpha, config_.beta,
                              config_.learning_rate);
    } else {
      total += p2p_[i].update(samples, config_.learning_rate);
    }
  }
  return total / static_cast<double>(num_agents_);
}

double Trainer::update_critic(const std::vector<const Transition*>& batch) {
  const auto targets = critic_targets(batch);
  const int B = static_cast<int>(batch.size());
  std::vector<double> target_flat(static_cast<std::size_t>(B) * num_agents_);
  for (int b = 0; b < B; ++b) {
    for (int i = 0; i < num_agents_; ++i) {
      target_flat[static_cast<std::size_t>(b) * num_agents_ + i] =
          targets[i][b];
    }
  }
  const Tensor target =
      Tensor::from({B * num_agents_, 1}, std::move(target_flat));
  const Tensor values = gat_forward(critic_, "critic", critic_spec_,
                                    joint_nodes(batch, false), num_agents_);
  const Tensor loss = mean_all(square(sub(target, values)));
  const double loss_value = loss.value();
  backward(loss);
  critic_.adam_step(config_.learning_rate);
  return loss_value;
}

double Trainer::update_actors(const std::vector<const Transition*>& batch) {
  const int B = static_cast<int>(batch.size());
  const auto lumped = lumped_rewards(batch);
  const auto values = critic_values_plain(critic_, batch, false);
  const auto next_values = critic_values_plain(critic_target_, batch, true);

  double objective_total = 0.0;
  for (int i = 0; i < num_agents_; ++i) {
    std::vector<double> adv(B);
    for (int b = 0; b < B; ++b) {
      adv[b] = lumped[i][b] + config_.discount * next_values[i][b] -
               values[i][b];
    }
    std::vector<int> actions(B);
    for (int b = 0; b < B; ++b) actions[b] = batch[b]->actions[i];

    const Tensor obs = agent_obs_matrix(batch, i, false);
    const Tensor probs = actor_probs(actors_[i], obs);
    Tensor target_probs;
    {
      NoGradScope no_grad;
      target_probs = actor_probs(actor_targets_[i], obs);
    }
    const Tensor ratio =
        div(gather_cols(probs, actions),
            clamp_min(gather_cols(target_probs, actions), kRatioFloor));
    const Tensor advantage = Tensor::from({B}, adv);
    const Tensor surrogate = minimum(
        mul(ratio, advantage),
        mul(clamp(ratio, 1.0 - config_.clip_epsilon,
                  1.0 + config_.clip_epsilon),
            advantage));
    const Tensor objective =
        add(mean_all(surrogate),
            scale(mean_all(entropy_rows(probs)), config_.entropy_scale));
    objective_total += objective.value();
    backward(neg(objective));
    actors_[i].adam_step(config_.learning_rate);
  }
  return objective_total / static_cast<double>(num_agents_);
}

void Trainer::soft_update_targets() {
  for (int i = 0; i < num_agents_; ++i) {
    ParamStore::soft_update(actors_[i], actor_targets_[i], config_.tau);
  }
  ParamStore::soft_update(critic_, critic_target_, config_.tau);
}

UpdateLogs Trainer::update_once() {
  UpdateLogs logs;
  const auto n = static_cast<std::size_t>(config_.batch_size);
  logs.estimator_loss = update_estimators(buffer_.sample(n, batch_rng_));
  logs.critic_loss = update_critic(buffer_.sample(n, batch_rng_));
  logs.actor_objective = update_actors(buffer_.sample(n, batch_rng_));
  soft_update_targets();
  return logs;
}

std::pair<double, double> Trainer::evaluate() {
  std::vector<double> episode_rewards;
  episode_rewards.reserve(config_.eval_episodes);
  for (int e = 0; e < config_.eval_episodes; ++e) {
    ResetResult rr =
        reset(scenario_, derive_seed(config_.seed, kEvalEnvStream + e));
    RewardPerturber perturber(
        reward_setting_from_string(config_.reward_setting),
        derive_seed(config_.seed, kEvalPerturbStream + e));
    WorldState state = std::move(rr.state);
    std::vector<std::vector<double>> obs = std::move(rr.observations);
    double total = 0.0;
    for (int t = 0; t < kEpisodeLength; ++t) {
      std::vector<int> actions(num_agents_);
      for (int i = 0; i < num_agents_; ++i) {
        actions[i] = argmax(policy(i, obs[i]));
      }
      const StepResult sr = step(state, actions);
      for (int i = 0; i < num_agents_; ++i) {
        total += perturber.perturb(sr.rewards[i], actions[i]);
      }
      obs = sr.next_observations;
    }
    episode_rewards.push_back(total);
  }
  return {mean_of(episode_rewards), stderr_of(episode_rewards)};
}

TrainResult Trainer::run(const TrainSinks& sinks) {
  const auto start = std::chrono::steady_clock::now();
  trajectory_sink_ = sinks.trajectories;

  // Buffer warm-up with uniform-random behavior before the first update.
  current_episode_ = 0;
  for (int e = 0; e < config_.update_interval; ++e) {
    for (auto& t : collect_episode(0.0)) buffer_.push(std::move(t));
  }

  TrainResult result;
  UpdateLogs last;
  std::pair<double, double> last_eval{0.0, 0.0};
  for (int ep = 1; ep <= config_.episodes; ++ep) {
    current_episode_ = ep;
    for (auto& t : collect_episode(explore_probability(ep))) {
      buffer_.push(std::move(t));
    }
    if (ep % config_.update_interval == 0) last = update_once();
    if (ep % config_.eval_interval == 0 || ep == config_.episodes) {
      last_eval = evaluate();
      MetricRecord rec;
      rec.episode = ep;
      rec.eval_mean_reward = last_eval.first;
      rec.critic_loss = last.critic_loss;
      rec.actor_objective = last.actor_objective;
      rec.estimator_loss = last.estimator_loss;
      result.records.push_back(rec);
      if (sinks.metrics != nullptr) {
        *sinks.metrics << to_json(rec).dump() << "\n";
      }
      if (sinks.timings != nullptr) {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        nlohmann::ordered_json t;
        t["episode"] = ep;
        t["wall_time_s"] = seconds;
        *sinks.timings << t.dump() << "\n";
      }
    }
    if (ep % config_.refresh_interval == 0) {
      buffer_.refresh(config_.buffer_clear_rate);
    }
  }
  trajectory_sink_ = nullptr;
  result.final_eval_mean = last_eval.first;
  result.final_eval_stderr = last_eval.second;
  return result;
}

}  // namespace dremarl
