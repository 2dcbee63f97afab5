#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dremarl/rng.hpp"

namespace dremarl {

/// Discrete action set shared by all scenarios:
/// 0 no-op, 1 +x, 2 -x, 3 +y, 4 -y.
inline constexpr int kNumActions = 5;
inline constexpr int kEpisodeLength = 25;

enum class ScenarioKind { kCooperativeNavigation, kReference, kTreasure };

ScenarioKind scenario_from_string(const std::string& name);
std::string to_string(ScenarioKind kind);

/// Scenario selector. `q` follows the scenario naming: CN-q and REF-q run q
/// agents; TREA-q runs q collectors plus q banks.
struct Scenario {
  ScenarioKind kind = ScenarioKind::kCooperativeNavigation;
  int q = 3;
};

/// Agents acting in the world (TREA doubles q).
int total_agents(const Scenario& scenario);
int observation_width(const Scenario& scenario);
/// Throws std::invalid_argument for combinations outside
/// cn:{3,7,10}, ref:{2,7,10}, trea:{3,7,10}.
void validate(const Scenario& scenario);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct PhysicsParams {
  double dt = 0.1;
  double damping = 0.25;
  double accel = 1.0;
  double agent_radius = 0.1;
  double landmark_radius = 0.05;
};

struct WorldState {
  Scenario scenario;
  PhysicsParams physics;
  int step = 0;  // 0..kEpisodeLength
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;
  std::vector<Vec2> landmarks;  // CN: q landmarks, REF: 3, TREA: q treasures

  // REF: landmark each agent must reach. Held by the agent's partner in the
  // task story; surfaced directly in the agent's observation here.
  std::vector<int> targets;

  // TREA bookkeeping. Collectors are agents [0, q), banks [q, 2q); bank q+i
  // is matched to collector i.
  std::vector<bool> treasure_collected;
  std::vector<bool> carrying;         // per collector
  std::vector<bool> delivered_now;    // per collector, this step's deliveries

  Rng rng{0};
};

struct StepResult {
  std::vector<std::vector<double>> next_observations;
  std::vector<double> rewards;  // deterministic per-agent rewards
  double team_reward = 0.0;     // sum of the individual rewards
  bool done = false;
};

struct ResetResult {
  WorldState state;
  std::vector<std::vector<double>> observations;
};

/// Places agents and landmarks uniformly in [-1,1]^2 with zero velocities.
/// Identical (scenario, seed) pairs produce identical worlds.
ResetResult reset(const Scenario& scenario, std::uint64_t seed);

/// Advances physics one step, applies scenario bookkeeping, computes
/// rewards. Throws if the episode is already done or an action is invalid.
StepResult step(WorldState& state, const std::vector<int>& joint_action);

/// Deterministic per-agent rewards of the current state (including any
/// delivery bonuses flagged in `delivered_now`).
std::vector<double> scenario_reward(const WorldState& state);

std::vector<std::vector<double>> observations(const WorldState& state);

int partner_of(int agent, int num_agents);  // REF ring pairing

}  // namespace dremarl
