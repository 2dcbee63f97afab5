#include "dremarl/param_store.hpp"

#include <cmath>
#include <stdexcept>

namespace dremarl {

Tensor ParamStore::create(const std::string& name, std::vector<int> shape,
                          std::vector<double> values, bool requires_grad) {
  if (entries_.count(name)) {
    throw std::invalid_argument("param store: duplicate name " + name);
  }
  Entry e;
  e.tensor = Tensor::from(std::move(shape), std::move(values), requires_grad);
  e.m.assign(e.tensor.size(), 0.0);
  e.v.assign(e.tensor.size(), 0.0);
  order_.push_back(name);
  entries_.emplace(name, std::move(e));
  return entries_.at(name).tensor;
}

Tensor ParamStore::create_uniform(const std::string& name,
                                  std::vector<int> shape, int fan_in,
                                  Rng& rng) {
  if (fan_in <= 0) throw std::invalid_argument("param store: fan_in <= 0");
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> values(n);
  for (auto& x : values) x = rng.uniform(-bound, bound);
  return create(name, std::move(shape), std::move(values), true);
}

Tensor ParamStore::create_zeros(const std::string& name,
                                std::vector<int> shape, bool requires_grad) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return create(name, std::move(shape), std::vector<double>(n, 0.0),
                requires_grad);
}

bool ParamStore::has(const std::string& name) const {
  return entries_.count(name) != 0;
}

Tensor ParamStore::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw std::invalid_argument("param store: unknown name " + name);
  }
  return it->second.tensor;
}

long ParamStore::step_count(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw std::invalid_argument("param store: unknown name " + name);
  }
  return it->second.step;
}

void ParamStore::adam_step(double lr, double beta1, double beta2, double eps) {
  for (const auto& name : order_) {
    Entry& e = entries_.at(name);
    if (!e.tensor.requires_grad()) continue;
    auto node = e.tensor.node();
    std::vector<double>& grad = node->grad;
    if (!grad.empty() && grad.size() != e.tensor.size()) {
      throw std::invalid_argument("adam: gradient shape mismatch for " + name);
    }
    e.step += 1;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(e.step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(e.step));
    std::vector<double>& p = node->values;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = grad.empty() ? 0.0 : grad[i];
      if (!std::isfinite(g)) {
        throw std::runtime_error("adam: non-finite gradient for " + name);
      }
      e.m[i] = beta1 * e.m[i] + (1.0 - beta1) * g;
      e.v[i] = beta2 * e.v[i] + (1.0 - beta2) * g * g;
      const double update =
          lr * (e.m[i] / c1) / (std::sqrt(e.v[i] / c2) + eps);
      if (!std::isfinite(update)) {
        throw std::runtime_error("adam: non-finite update for " + name);
      }
      p[i] -= update;
    }
    grad.clear();
  }
}

ParamStore ParamStore::clone_detached() const {
  ParamStore out;
  for (const auto& name : order_) {
    const Entry& e = entries_.at(name);
    out.create(name, e.tensor.shape(), e.tensor.values(), false);
  }
  return out;
}

void ParamStore::soft_update(const ParamStore& current, ParamStore& target,
                             double tau) {
  if (current.order_.size() != target.order_.size()) {
    throw std::invalid_argument("soft_update: parameter sets differ");
  }
  for (const auto& name : current.order_) {
    const Entry& src = current.entries_.at(name);
    auto it = target.entries_.find(name);
    if (it == target.entries_.end() ||
        it->second.tensor.shape() != src.tensor.shape()) {
      throw std::invalid_argument("soft_update: shape mismatch for " + name);
    }
    std::vector<double>& tv = it->second.tensor.raw_values();
    const std::vector<double>& sv = src.tensor.values();
    for (std::size_t i = 0; i < tv.size(); ++i) {
      tv[i] = tau * sv[i] + (1.0 - tau) * tv[i];
    }
  }
}

nlohmann::ordered_json ParamStore::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& name : order_) {
    const Entry& e = entries_.at(name);
    j[name] = {{"shape", e.tensor.shape()}, {"values", e.tensor.values()}};
  }
  return j;
}

void ParamStore::load_values(const nlohmann::json& j) {
  for (const auto& name : order_) {
    if (!j.contains(name)) {
      throw std::invalid_argument("param store: missing entry " + name);
    }
    Entry& e = entries_.at(name);
    auto values = j.at(name).at("values").get<std::vector<double>>();
    if (values.size() != e.tensor.size()) {
      throw std::invalid_argument("param store: size mismatch for " + name);
    }
    e.tensor.raw_values() = std::move(values);
  }
}

}  // namespace dremarl
