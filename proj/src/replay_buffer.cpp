#include "dremarl/replay_buffer.hpp"

#include <stdexcept>

namespace dremarl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("buffer: zero capacity");
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() == capacity_) data_.pop_front();
  data_.push_back(std::move(t));
}

void ReplayBuffer::refresh(double clear_fraction) {
  if (clear_fraction < 0.0 || clear_fraction > 1.0) {
    throw std::invalid_argument("buffer: clear fraction outside [0, 1]");
  }
  const auto drop = static_cast<std::size_t>(
      static_cast<double>(data_.size()) * clear_fraction);
  data_.erase(data_.begin(), data_.begin() + static_cast<long>(drop));
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n,
                                                    Rng& rng) const {
  if (data_.empty()) throw std::invalid_argument("buffer: sampling while empty");
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(&data_[rng.below(static_cast<int>(data_.size()))]);
  }
  return out;
}

}  // namespace dremarl
