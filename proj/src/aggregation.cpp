#include "dremarl/aggregation.hpp"

#include <cmath>
#include <stdexcept>

namespace dremarl {

namespace {

void require_uniform_width(const std::vector<std::vector<double>>& built_up,
                           int agent) {
  if (built_up.empty()) {
    throw std::invalid_argument("aggregation: no built-up vectors");
  }
  if (agent < 0 || agent >= static_cast<int>(built_up.size())) {
    throw std::invalid_argument("aggregation: agent out of range");
  }
  const std::size_t k = built_up[0].size();
  for (const auto& m : built_up) {
    if (m.size() != k) {
      throw std::invalid_argument("aggregation: branch count mismatch");
    }
  }
}

void require_simplex(const std::vector<double>& weights, std::size_t k) {
  if (weights.size() != k) {
    throw std::invalid_argument("aggregation: weight length mismatch");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("aggregation: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw std::invalid_argument("aggregation: weights do not sum to 1");
  }
}

}  // namespace

AggregationScheme aggregation_from_string(const std::string& name) {
  if (name == "ss-ss") {
    return {ActorAggregation::kSimpleSelection,
            CriticAggregation::kSimpleSelection, true};
  }
  if (name == "smo-mo") {
    return {ActorAggregation::kSimpleMeanOperation,
            CriticAggregation::kMeanOperation, true};
  }
  if (name == "mo-mo") {
    return {ActorAggregation::kMeanOperation, CriticAggregation::kMeanOperation,
            true};
  }
  if (name == "smo-ss") {
    return {ActorAggregation::kSimpleMeanOperation,
            CriticAggregation::kSimpleSelection, true};
  }
  if (name == "smo-only") {
    return {ActorAggregation::kSimpleMeanOperation,
            CriticAggregation::kSimpleSelection, false};
  }
  throw std::invalid_argument("aggregation: unknown scheme '" + name + "'");
}

std::string to_string(const AggregationScheme& scheme) {
  if (!scheme.has_critic) return "smo-only";
  std::string l;
  switch (scheme.actor) {
    case ActorAggregation::kMeanOperation: l = "mo"; break;
    case ActorAggregation::kSimpleMeanOperation: l = "smo"; break;
    case ActorAggregation::kSimpleSelection: l = "ss"; break;
  }
  const std::string g =
      scheme.critic == CriticAggregation::kMeanOperation ? "mo" : "ss";
  return l + "-" + g;
}

std::vector<double> build_up(const std::vector<double>& estimates, int k,
                             double r_k) {
  if (k < 0 || k >= static_cast<int>(estimates.size())) {
    throw std::invalid_argument("build_up: branch out of range");
  }
  std::vector<double> m = estimates;
  m[k] = r_k;
  return m;
}

double mixed_reward(CriticAggregation g,
                    const std::vector<std::vector<double>>& built_up, int agent,
                    const std::vector<double>& weights) {
  require_uniform_width(built_up, agent);
  const std::size_t k = built_up[0].size();
  require_simplex(weights, k);
  double out = 0.0;
  switch (g) {
    case CriticAggregation::kMeanOperation: {
      const double inv = 1.0 / static_cast<double>(built_up.size());
      for (std::size_t b = 0; b < k; ++b) {
        double mean = 0.0;
        for (const auto& m : built_up) mean += m[b];
        out += mean * inv * weights[b];
      }
      break;
    }
    case CriticAggregation::kSimpleSelection: {
      for (std::size_t b = 0; b < k; ++b) {
        out += built_up[agent][b] * weights[b];
      }
      break;
    }
  }
  return out;
}

double lumped_reward(ActorAggregation l,
                     const std::vector<std::vector<double>>& built_up,
                     int agent, double r_k) {
  require_uniform_width(built_up, agent);
  switch (l) {
    case ActorAggregation::kMeanOperation: {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& m : built_up) {
        for (double x : m) sum += x;
        count += m.size();
      }
      return sum / static_cast<double>(count);
    }
    case ActorAggregation::kSimpleMeanOperation: {
      double sum = 0.0;
      for (double x : built_up[agent]) sum += x;
      return sum / static_cast<double>(built_up[agent].size());
    }
    case ActorAggregation::kSimpleSelection:
      return r_k;
  }
  throw std::invalid_argument("lumped_reward: bad operation");
}

}  // namespace dremarl
