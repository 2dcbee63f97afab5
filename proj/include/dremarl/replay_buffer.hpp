#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "dremarl/rng.hpp"

namespace dremarl {

/// One environment step of the joint system, as stored during collection.
struct Transition {
  std::vector<std::vector<double>> observations;   // per agent
  std::vector<std::vector<double>> policies;       // behavior softmax per agent
  std::vector<int> actions;                        // per agent
  std::vector<double> rewards;                     // per agent, as received
  std::vector<std::vector<double>> next_observations;
};

/// Bounded FIFO of transitions. `refresh` drops the oldest fraction, keeping
/// the newest entries intact.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return data_.at(i); }

  void refresh(double clear_fraction);

  /// Uniform draw with replacement.
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> data_;
};

}  // namespace dremarl
