#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dremarl/replay_buffer.hpp"
#include "dremarl/trainer.hpp"

using namespace dremarl;

namespace {

RunConfig smoke_config() {
  RunConfig c;
  c.scenario = "cn";
  c.agents = 3;
  c.episodes = 12;
  c.batch_size = 32;
  c.hidden_units = 16;
  c.attention_heads = 2;
  c.attention_units = 4;
  c.buffer_capacity = 1000;
  c.update_interval = 4;
  c.eval_interval = 8;
  c.eval_episodes = 2;
  c.refresh_interval = 8;
  return c;
}

Transition constant_transition(int agents, int width, double reward,
                               Rng& rng) {
  Transition t;
  t.observations.resize(agents);
  t.next_observations.resize(agents);
  t.policies.resize(agents);
  t.actions.resize(agents);
  t.rewards.assign(agents, reward);
  for (int i = 0; i < agents; ++i) {
    t.observations[i].resize(width);
    t.next_observations[i].resize(width);
    for (int w = 0; w < width; ++w) {
      t.observations[i][w] = rng.uniform(-1.0, 1.0);
      t.next_observations[i][w] = rng.uniform(-1.0, 1.0);
    }
    t.policies[i].assign(kNumActions, 1.0 / kNumActions);
    t.actions[i] = rng.below(kNumActions);
  }
  return t;
}

}  // namespace

TEST_CASE("soft update endpoint cases") {
  ParamStore current, target;
  current.create("w", {1}, {1.0});
  target.create("w", {1}, {0.0}, false);
  SUBCASE("tau=1 copies") {
    ParamStore::soft_update(current, target, 1.0);
    CHECK(target.get("w").values()[0] == doctest::Approx(1.0));
  }
  SUBCASE("tau=0 is a no-op") {
    ParamStore::soft_update(current, target, 0.0);
    CHECK(target.get("w").values()[0] == doctest::Approx(0.0));
  }
  SUBCASE("tau=0.01 blends") {
    ParamStore::soft_update(current, target, 0.01);
    CHECK(target.get("w").values()[0] == doctest::Approx(0.01));
  }
}

TEST_CASE("frozen current parameters pull the target in geometrically") {
  ParamStore current, target;
  current.create("w", {1}, {1.0});
  target.create("w", {1}, {0.0}, false);
  const double tau = 0.25;
  for (int n = 1; n <= 8; ++n) {
    ParamStore::soft_update(current, target, tau);
    CHECK(std::abs(1.0 - target.get("w").values()[0]) ==
          doctest::Approx(std::pow(1.0 - tau, n)).epsilon(1e-12));
  }
}

TEST_CASE("replay buffer: bounded, refresh keeps the newest entries") {
  ReplayBuffer buf(10);
  Rng rng(1);
  for (int i = 0; i < 14; ++i) {
    Transition t = constant_transition(1, 2, static_cast<double>(i), rng);
    buf.push(std::move(t));
  }
  CHECK(buf.size() == 10);  // entries 4..13
  buf.refresh(0.4);
  CHECK(buf.size() == 6);   // entries 8..13 survive
  for (std::size_t i = 0; i < buf.size(); ++i) {
    CHECK(buf.at(i).rewards[0] == doctest::Approx(8.0 + i));
  }
}

TEST_CASE("collect_episode always yields 25 transitions with valid policies") {
  Trainer trainer(smoke_config());
  const auto episode = trainer.collect_episode(0.5);
  CHECK(episode.size() == kEpisodeLength);
  for (const auto& t : episode) {
    for (const auto& pi : t.policies) {
      double sum = 0.0;
      for (double p : pi) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("full policy probability with a sharp policy follows the argmax") {
  RunConfig c = smoke_config();
  Trainer trainer(c);
  // make actor 0 near-deterministic on action 2 via its output bias
  Tensor bias = trainer.actor_params(0).get("actor/b2");
  bias.raw_values()[2] = 50.0;
  const auto episode = trainer.collect_episode(1.0);
  for (const auto& t : episode) CHECK(t.actions[0] == 2);
}

TEST_CASE("explore probability ramps linearly then holds") {
  RunConfig c = smoke_config();
  c.episodes = 100;
  Trainer trainer(c);
  CHECK(trainer.explore_probability(0) == doctest::Approx(0.7));
  CHECK(trainer.explore_probability(25) == doctest::Approx(0.8));
  CHECK(trainer.explore_probability(50) == doctest::Approx(0.9));
  CHECK(trainer.explore_probability(100) == doctest::Approx(0.9));
}

TEST_CASE("fresh targets equal the current policy, so the ratio is one") {
  Trainer trainer(smoke_config());
  Rng rng(3);
  const int width =
      observation_width(Scenario{ScenarioKind::kCooperativeNavigation, 3});
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> obs(width);
    for (auto& x : obs) x = rng.uniform(-1.0, 1.0);
    const auto current = trainer.policy(0, obs);
    NoGradScope no_grad;
    const Tensor target = softmax_rows(
        mlp_forward(trainer.actor_target_params(0), "actor",
                    trainer.actor_spec(), Tensor::from({1, width}, obs)));
    for (int k = 0; k < kNumActions; ++k) {
      CHECK(current[k] == target.at(k));  // bit-identical parameters
    }
  }
}

TEST_CASE("zero advantage reduces the objective to the entropy term") {
  // min(u*0, clip(u)*0) = 0 for any ratio
  const Tensor u = Tensor::from({3}, {0.5, 1.0, 2.0});
  const Tensor adv = Tensor::zeros({3});
  const Tensor surr = minimum(mul(u, adv), mul(clamp(u, 0.8, 1.2), adv));
  for (int i = 0; i < 3; ++i) CHECK(surr.at(i) == doctest::Approx(0.0));
}

TEST_CASE("clip arithmetic of the surrogate") {
  // u = 1.5, advantage = 1, epsilon = 0.2 -> min(1.5, 1.2) * 1 = 1.2
  const Tensor u = Tensor::from({1}, {1.5});
  const Tensor adv = Tensor::from({1}, {1.0});
  const Tensor surr = minimum(mul(u, adv), mul(clamp(u, 0.8, 1.2), adv));
  CHECK(surr.at(0) == doctest::Approx(1.2));

  // pessimism under positive advantage: clipped never exceeds unclipped
  for (double uv : {0.1, 0.9, 1.0, 1.3, 2.5}) {
    const Tensor ut = Tensor::from({1}, {uv});
    const Tensor s =
        minimum(mul(ut, adv), mul(clamp(ut, 0.8, 1.2), adv));
    CHECK(s.at(0) <= uv * 1.0 + 1e-12);
  }
}

TEST_CASE("critic regresses to a constant under gamma = 0") {
  RunConfig c = smoke_config();
  c.discount = 0.0;
  c.estimator = "none";
  c.batch_size = 16;
  Trainer trainer(c);
  Rng rng(5);
  const int width =
      observation_width(Scenario{ScenarioKind::kCooperativeNavigation, 3});
  std::vector<Transition> storage;
  for (int i = 0; i < 16; ++i) {
    storage.push_back(constant_transition(3, width, -2.5, rng));
  }
  std::vector<const Transition*> batch;
  for (auto& t : storage) batch.push_back(&t);

  const auto targets = trainer.critic_targets(batch);
  for (const auto& per_agent : targets) {
    for (double t : per_agent) CHECK(t == doctest::Approx(-2.5));
  }
  for (auto& t : storage) trainer.buffer().push(t);
  double loss = 1e9;
  for (int step = 0; step < 1500; ++step) {
    loss = trainer.update_once().critic_loss;
  }
  CHECK(loss < 0.05 * 0.05);
}

TEST_CASE("estimator=none trains on raw rewards end to end") {
  RunConfig c = smoke_config();
  c.estimator = "none";
  Trainer trainer(c);
  std::ostringstream metrics;
  TrainSinks sinks;
  sinks.metrics = &metrics;
  const TrainResult result = trainer.run(sinks);
  CHECK_FALSE(result.records.empty());
  for (const auto& r : result.records) {
    CHECK(std::isfinite(r.eval_mean_reward));
    CHECK(r.estimator_loss == doctest::Approx(0.0));
  }
}

TEST_CASE("smoke run emits finite evaluation records for every estimator") {
  for (const std::string est : {"dre", "p2p", "gre"}) {
    RunConfig c = smoke_config();
    c.estimator = est;
    c.episodes = 8;
    Trainer trainer(c);
    const TrainResult result = trainer.run();
    REQUIRE_FALSE(result.records.empty());
    for (const auto& r : result.records) {
      CHECK(std::isfinite(r.eval_mean_reward));
      CHECK(std::isfinite(r.critic_loss));
      CHECK(std::isfinite(r.actor_objective));
      CHECK(std::isfinite(r.estimator_loss));
    }
  }
}

TEST_CASE("identical config and seed produce identical metric streams") {
  RunConfig c = smoke_config();
  c.estimator = "dre";
  c.reward_setting = "ac-dist";
  std::ostringstream a, b;
  {
    Trainer trainer(c);
    TrainSinks sinks;
    sinks.metrics = &a;
    trainer.run(sinks);
  }
  {
    Trainer trainer(c);
    TrainSinks sinks;
    sinks.metrics = &b;
    trainer.run(sinks);
  }
  CHECK(a.str() == b.str());
  CHECK_FALSE(a.str().empty());
}

TEST_CASE("mixed rewards with a converged estimator reproduce a constant") {
  RunConfig c = smoke_config();
  c.estimator = "dre";
  c.discount = 0.0;
  Trainer trainer(c);
  const double constant = -3.25;
  const int width =
      observation_width(Scenario{ScenarioKind::kCooperativeNavigation, 3});
  // zero weights + mu bias = constant is the exact optimum for a
  // constant-reward world
  for (int i = 0; i < trainer.num_agents(); ++i) {
    ParamStore& params = trainer.dre_estimator(i).params();
    for (const auto& name : params.names()) {
      Tensor p = params.get(name);
      std::fill(p.raw_values().begin(), p.raw_values().end(), 0.0);
    }
    Tensor out_bias = params.get("estimator/b2");
    for (int k = 0; k < kNumActions; ++k) out_bias.raw_values()[k] = constant;
  }
  Rng rng(7);
  std::vector<Transition> storage;
  for (int i = 0; i < 6; ++i) {
    storage.push_back(constant_transition(3, width, constant, rng));
  }
  std::vector<const Transition*> batch;
  for (auto& t : storage) batch.push_back(&t);
  for (const auto& per_agent : trainer.mixed_rewards(batch)) {
    for (double r : per_agent) {
      CHECK(r == doctest::Approx(constant).epsilon(1e-9));
    }
  }
}

TEST_CASE("trajectory sink writes one record per step") {
  RunConfig c = smoke_config();
  c.episodes = 2;
  c.eval_interval = 2;
  Trainer trainer(c);
  std::ostringstream traj;
  TrainSinks sinks;
  sinks.trajectories = &traj;
  trainer.run(sinks);
  int lines = 0;
  std::istringstream in(traj.str());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++lines;
  }
  // warm-up episodes plus training episodes, 25 steps each
  CHECK(lines == (c.update_interval + c.episodes) * kEpisodeLength);
}
