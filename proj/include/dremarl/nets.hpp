#pragma once

#include <string>
#include <vector>

#include "dremarl/param_store.hpp"
#include "dremarl/rng.hpp"
#include "dremarl/tensor.hpp"

namespace dremarl {

/// Fully connected net: hidden layers use a leaky rectifier, the output
/// layer is linear.
struct MlpSpec {
  int input = 0;
  std::vector<int> hidden = {64, 64};
  int output = 0;
  double slope = 0.01;
};

/// Multi-head graph attention over a fully connected agent graph, followed
/// by an MLP that maps the concatenated head outputs to one value per agent.
struct GatSpec {
  int feature_width = 0;
  int heads = 8;
  int head_units = 8;
  std::vector<int> value_hidden = {64, 64};
  double slope = 0.01;
};

void validate(const MlpSpec& spec);
void validate(const GatSpec& spec);

/// Registers the layer parameters under `prefix` (weights uniform in
/// +-1/sqrt(fan_in), biases zero).
void init_mlp(ParamStore& params, const std::string& prefix,
              const MlpSpec& spec, Rng& rng);
void init_gat(ParamStore& params, const std::string& prefix,
              const GatSpec& spec, Rng& rng);

/// input [B x spec.input] -> [B x spec.output].
Tensor mlp_forward(const ParamStore& params, const std::string& prefix,
                   const MlpSpec& spec, const Tensor& input);

struct GatResult {
  Tensor values;                       // [B*agents x 1]
  std::vector<Tensor> head_attention;  // per head, [B*agents x agents]
};

/// node_features packs B groups of `agents` rows: [B*agents x F].
/// Every agent attends over all agents of its own group, itself included.
GatResult gat_forward_full(const ParamStore& params, const std::string& prefix,
                           const GatSpec& spec, const Tensor& node_features,
                           int agents);
Tensor gat_forward(const ParamStore& params, const std::string& prefix,
                   const GatSpec& spec, const Tensor& node_features,
                   int agents);

/// Entropy of each row of a probability matrix -> [B]. Rows must lie on the
/// simplex; zero entries contribute zero.
Tensor entropy_rows(const Tensor& probs);

}  // namespace dremarl
