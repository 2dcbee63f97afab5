#include "dremarl/reward_uncertainty.hpp"

#include <stdexcept>

#include "dremarl/env.hpp"

namespace dremarl {

RewardSetting reward_setting_from_string(const std::string& name) {
  if (name == "dete") return RewardSetting::kDeterministic;
  if (name == "dist") return RewardSetting::kDisturbance;
  if (name == "ac-dist" || name == "ac_dist") {
    return RewardSetting::kActionDisturbance;
  }
  throw std::invalid_argument("reward setting: unknown name '" + name + "'");
}

std::string to_string(RewardSetting setting) {
  switch (setting) {
    case RewardSetting::kDeterministic: return "dete";
    case RewardSetting::kDisturbance: return "dist";
    case RewardSetting::kActionDisturbance: return "ac-dist";
  }
  throw std::invalid_argument("reward setting: bad value");
}

RewardPerturber::RewardPerturber(RewardSetting setting, std::uint64_t seed,
                                 double delta, double disturbance_scale)
    : setting_(setting), delta_(delta), scale_(disturbance_scale), rng_(seed) {
  if (delta_ <= 0.0) throw std::invalid_argument("perturb: delta must be > 0");
  if (scale_ < 0.0) throw std::invalid_argument("perturb: scale must be >= 0");
}

double RewardPerturber::perturb(double r_dete, int action_index) {
  if (action_index < 0 || action_index >= kNumActions) {
    throw std::invalid_argument("perturb: action index out of range");
  }
  switch (setting_) {
    case RewardSetting::kDeterministic:
      return r_dete;
    case RewardSetting::kDisturbance:
      return rng_.normal(r_dete, 1.0) * scale_ + r_dete;
    case RewardSetting::kActionDisturbance:
      return rng_.normal(static_cast<double>(action_index), delta_) + r_dete;
  }
  throw std::invalid_argument("perturb: bad setting");
}

}  // namespace dremarl
