#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dremarl/rng.hpp"
#include "dremarl/tensor.hpp"

namespace dremarl {

/// Named parameter tensors together with their Adam optimizer state.
/// Iteration follows creation order, so updates and serialization are
/// deterministic.
class ParamStore {
 public:
  struct Entry {
    Tensor tensor;
    std::vector<double> m;  // first moment
    std::vector<double> v;  // second moment
    long step = 0;
  };

  /// Registers a parameter leaf. Throws if the name already exists.
  Tensor create(const std::string& name, std::vector<int> shape,
                std::vector<double> values, bool requires_grad = true);

  /// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  Tensor create_uniform(const std::string& name, std::vector<int> shape,
                        int fan_in, Rng& rng);
  Tensor create_zeros(const std::string& name, std::vector<int> shape,
                      bool requires_grad = true);

  bool has(const std::string& name) const;
  Tensor get(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  long step_count(const std::string& name) const;

  /// One Adam update over every parameter from the gradients left by the
  /// last backward pass. Parameters the pass never reached see zero
  /// gradients. Consumed gradients are cleared.
  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8);

  /// Value copy with gradients disabled, moments reset.
  ParamStore clone_detached() const;
  /// target <- tau * current + (1 - tau) * target, elementwise.
  static void soft_update(const ParamStore& current, ParamStore& target,
                          double tau);

  nlohmann::ordered_json to_json() const;
  void load_values(const nlohmann::json& j);

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Entry> entries_;
};

}  // namespace dremarl
