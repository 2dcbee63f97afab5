#include "dremarl/env.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dremarl {

namespace {

double dist(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

bool touching(const Vec2& a, const Vec2& b, double radius_sum) {
  return dist(a, b) < radius_sum;
}

int num_collectors(const Scenario& s) { return s.q; }

}  // namespace

ScenarioKind scenario_from_string(const std::string& name) {
  if (name == "cn") return ScenarioKind::kCooperativeNavigation;
  if (name == "ref") return ScenarioKind::kReference;
  if (name == "trea") return ScenarioKind::kTreasure;
  throw std::invalid_argument("scenario: unknown name '" + name + "'");
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kCooperativeNavigation: return "cn";
    case ScenarioKind::kReference: return "ref";
    case ScenarioKind::kTreasure: return "trea";
  }
  throw std::invalid_argument("scenario: bad kind");
}

void validate(const Scenario& scenario) {
  const int q = scenario.q;
  switch (scenario.kind) {
    case ScenarioKind::kCooperativeNavigation:
    case ScenarioKind::kTreasure:
      if (q != 3 && q != 7 && q != 10) {
        throw std::invalid_argument("scenario " + to_string(scenario.kind) +
                                    ": agent count " + std::to_string(q) +
                                    " unsupported");
      }
      return;
    case ScenarioKind::kReference:
      if (q != 2 && q != 7 && q != 10) {
        throw std::invalid_argument("scenario ref: agent count " +
                                    std::to_string(q) + " unsupported");
      }
      return;
  }
  throw std::invalid_argument("scenario: bad kind");
}

int total_agents(const Scenario& scenario) {
  return scenario.kind == ScenarioKind::kTreasure ? 2 * scenario.q
                                                  : scenario.q;
}

int observation_width(const Scenario& scenario) {
  const int n = total_agents(scenario);
  switch (scenario.kind) {
    case ScenarioKind::kCooperativeNavigation:
      // vel, pos, landmarks rel, others rel
      return 4 + 2 * scenario.q + 2 * (n - 1);
    case ScenarioKind::kReference:
      // vel, pos, 3 landmarks rel, others rel, own-target one-hot
      return 4 + 6 + 2 * (n - 1) + 3;
    case ScenarioKind::kTreasure:
      // vel, pos, role flag, carrying flag, treasures rel, others rel
      return 6 + 2 * scenario.q + 2 * (n - 1);
  }
  throw std::invalid_argument("scenario: bad kind");
}

int partner_of(int agent, int num_agents) {
  return (agent + 1) % num_agents;
}

ResetResult reset(const Scenario& scenario, std::uint64_t seed) {
  validate(scenario);
  WorldState st;
  st.scenario = scenario;
  st.rng = Rng(seed);
  const int n = total_agents(scenario);
  st.positions.resize(n);
  st.velocities.assign(n, Vec2{});
  for (auto& p : st.positions) {
    p.x = st.rng.uniform(-1.0, 1.0);
    p.y = st.rng.uniform(-1.0, 1.0);
  }
  int landmarks = 0;
  switch (scenario.kind) {
    case ScenarioKind::kCooperativeNavigation: landmarks = scenario.q; break;
    case ScenarioKind::kReference: landmarks = 3; break;
    case ScenarioKind::kTreasure: landmarks = scenario.q; break;
  }
  st.landmarks.resize(landmarks);
  for (auto& l : st.landmarks) {
    l.x = st.rng.uniform(-1.0, 1.0);
    l.y = st.rng.uniform(-1.0, 1.0);
  }
  if (scenario.kind == ScenarioKind::kReference) {
    st.targets.resize(n);
    for (auto& t : st.targets) t = st.rng.below(landmarks);
  }
  if (scenario.kind == ScenarioKind::kTreasure) {
    st.treasure_collected.assign(scenario.q, false);
    st.carrying.assign(scenario.q, false);
    st.delivered_now.assign(scenario.q, false);
  }
  return ResetResult{st, observations(st)};
}

std::vector<std::vector<double>> observations(const WorldState& state) {
  const Scenario& sc = state.scenario;
  const int n = total_agents(sc);
  std::vector<std::vector<double>> obs(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double>& o = obs[i];
    o.reserve(observation_width(sc));
    o.push_back(state.velocities[i].x);
    o.push_back(state.velocities[i].y);
    o.push_back(state.positions[i].x);
    o.push_back(state.positions[i].y);
    if (sc.kind == ScenarioKind::kTreasure) {
      o.push_back(i < sc.q ? 0.0 : 1.0);
      o.push_back(i < sc.q && state.carrying[i] ? 1.0 : 0.0);
    }
    for (std::size_t l = 0; l < state.landmarks.size(); ++l) {
      if (sc.kind == ScenarioKind::kTreasure && state.treasure_collected[l]) {
        // collected treasures vanish from view
        o.push_back(0.0);
        o.push_back(0.0);
      } else {
        o.push_back(state.landmarks[l].x - state.positions[i].x);
        o.push_back(state.landmarks[l].y - state.positions[i].y);
      }
    }
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      o.push_back(state.positions[j].x - state.positions[i].x);
      o.push_back(state.positions[j].y - state.positions[i].y);
    }
    if (sc.kind == ScenarioKind::kReference) {
      for (int l = 0; l < 3; ++l) {
        o.push_back(state.targets[i] == l ? 1.0 : 0.0);
      }
    }
  }
  return obs;
}

std::vector<double> scenario_reward(const WorldState& state) {
  const Scenario& sc = state.scenario;
  const int n = total_agents(sc);
  std::vector<double> r(n, 0.0);
  const PhysicsParams& ph = state.physics;
  switch (sc.kind) {
    case ScenarioKind::kCooperativeNavigation: {
      double coverage = 0.0;
      for (const auto& l : state.landmarks) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : state.positions) best = std::min(best, dist(p, l));
        coverage += best;
      }
      for (int i = 0; i < n; ++i) {
        double collisions = 0.0;
        for (int j = 0; j < n; ++j) {
          if (j != i && touching(state.positions[i], state.positions[j],
                                 2.0 * ph.agent_radius)) {
            collisions += 1.0;
          }
        }
        r[i] = -coverage - collisions;
      }
      break;
    }
    case ScenarioKind::kReference: {
      for (int i = 0; i < n; ++i) {
        const int p = partner_of(i, n);
        r[i] = -dist(state.positions[p], state.landmarks[state.targets[p]]);
      }
      break;
    }
    case ScenarioKind::kTreasure: {
      const int q = num_collectors(sc);
      for (int c = 0; c < q; ++c) {
        double best = 0.0;
        bool any = false;
        for (int t = 0; t < q; ++t) {
          if (state.treasure_collected[t]) continue;
          const double d = dist(state.positions[c], state.landmarks[t]);
          best = any ? std::min(best, d) : d;
          any = true;
        }
        r[c] = any ? -best : 0.0;
        if (state.delivered_now[c]) r[c] += 5.0;
      }
      for (int b = q; b < 2 * q; ++b) {
        const int c = b - q;
        r[b] = -dist(state.positions[b], state.positions[c]);
        if (state.delivered_now[c]) r[b] += 5.0;
      }
      break;
    }
  }
  return r;
}

StepResult step(WorldState& state, const std::vector<int>& joint_action) {
  const Scenario& sc = state.scenario;
  const int n = total_agents(sc);
  if (state.step >= kEpisodeLength) {
    throw std::invalid_argument("env: episode already finished");
  }
  if (static_cast<int>(joint_action.size()) != n) {
    throw std::invalid_argument("env: one action per agent required");
  }
  const PhysicsParams& ph = state.physics;
  for (int i = 0; i < n; ++i) {
    const int a = joint_action[i];
    if (a < 0 || a >= kNumActions) {
      throw std::invalid_argument("env: action out of range");
    }
    Vec2 acc{};
    switch (a) {
      case 0: break;
      case 1: acc.x = ph.accel; break;
      case 2: acc.x = -ph.accel; break;
      case 3: acc.y = ph.accel; break;
      case 4: acc.y = -ph.accel; break;
    }
    Vec2& v = state.velocities[i];
    v.x = v.x * (1.0 - ph.damping) + acc.x * ph.dt;
    v.y = v.y * (1.0 - ph.damping) + acc.y * ph.dt;
    state.positions[i].x += v.x * ph.dt;
    state.positions[i].y += v.y * ph.dt;
  }
  state.step += 1;

  if (sc.kind == ScenarioKind::kTreasure) {
    const int q = num_collectors(sc);
    state.delivered_now.assign(q, false);
    for (int c = 0; c < q; ++c) {
      if (!state.carrying[c]) {
        for (int t = 0; t < q; ++t) {
          if (!state.treasure_collected[t] &&
              touching(state.positions[c], state.landmarks[t],
                       ph.agent_radius + ph.landmark_radius)) {
            state.treasure_collected[t] = true;
            state.carrying[c] = true;
            break;
          }
        }
      }
      if (state.carrying[c] &&
          touching(state.positions[c], state.positions[q + c],
                   2.0 * ph.agent_radius)) {
        state.carrying[c] = false;
        state.delivered_now[c] = true;
      }
    }
  }

  StepResult result;
  result.rewards = scenario_reward(state);
  result.team_reward = 0.0;
  for (double x : result.rewards) result.team_reward += x;
  result.next_observations = observations(state);
  result.done = state.step >= kEpisodeLength;
  return result;
}

}  // namespace dremarl
