#pragma once

#include <cstdint>
#include <string>

#include "dremarl/rng.hpp"

namespace dremarl {

enum class RewardSetting { kDeterministic, kDisturbance, kActionDisturbance };

RewardSetting reward_setting_from_string(const std::string& name);
std::string to_string(RewardSetting setting);

/// Injects reward uncertainty on top of deterministic scenario rewards:
///   dete     r
///   dist     sample of N(r, 1) * 0.05 + r
///   ac-dist  sample of N(k, delta) + r, with k the executed action index
class RewardPerturber {
 public:
  RewardPerturber(RewardSetting setting, std::uint64_t seed,
                  double delta = 0.001, double disturbance_scale = 0.05);

  double perturb(double r_dete, int action_index);

  RewardSetting setting() const { return setting_; }

 private:
  RewardSetting setting_;
  double delta_;
  double scale_;
  Rng rng_;
};

}  // namespace dremarl
