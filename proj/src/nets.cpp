#include "dremarl/nets.hpp"

#include <stdexcept>

namespace dremarl {

void validate(const MlpSpec& spec) {
  if (spec.input <= 0 || spec.output <= 0) {
    throw std::invalid_argument("mlp: input/output width must be positive");
  }
  for (int h : spec.hidden) {
    if (h <= 0) throw std::invalid_argument("mlp: hidden width must be positive");
  }
  if (spec.slope <= 0.0 || spec.slope >= 1.0) {
    throw std::invalid_argument("mlp: slope must lie in (0, 1)");
  }
}

void validate(const GatSpec& spec) {
  if (spec.feature_width <= 0) {
    throw std::invalid_argument("gat: feature width must be positive");
  }
  if (spec.heads < 1 || spec.head_units < 1) {
    throw std::invalid_argument("gat: heads and head units must be >= 1");
  }
}

void init_mlp(ParamStore& params, const std::string& prefix,
              const MlpSpec& spec, Rng& rng) {
  validate(spec);
  int in = spec.input;
  for (std::size_t l = 0; l < spec.hidden.size(); ++l) {
    const int out = spec.hidden[l];
    params.create_uniform(prefix + "/w" + std::to_string(l), {in, out}, in, rng);
    params.create_zeros(prefix + "/b" + std::to_string(l), {out});
    in = out;
  }
  const std::size_t l = spec.hidden.size();
  params.create_uniform(prefix + "/w" + std::to_string(l), {in, spec.output},
                        in, rng);
  params.create_zeros(prefix + "/b" + std::to_string(l), {spec.output});
}

Tensor mlp_forward(const ParamStore& params, const std::string& prefix,
                   const MlpSpec& spec, const Tensor& input) {
  validate(spec);
  if (input.cols() != spec.input) {
    throw std::invalid_argument("mlp: input width mismatch");
  }
  Tensor h = input;
  for (std::size_t l = 0; l < spec.hidden.size(); ++l) {
    const Tensor w = params.get(prefix + "/w" + std::to_string(l));
    const Tensor b = params.get(prefix + "/b" + std::to_string(l));
    h = leaky_relu(add_rowvec(matmul(h, w), b), spec.slope);
  }
  const std::size_t l = spec.hidden.size();
  const Tensor w = params.get(prefix + "/w" + std::to_string(l));
  const Tensor b = params.get(prefix + "/b" + std::to_string(l));
  return add_rowvec(matmul(h, w), b);
}

void init_gat(ParamStore& params, const std::string& prefix,
              const GatSpec& spec, Rng& rng) {
  validate(spec);
  for (int h = 0; h < spec.heads; ++h) {
    const std::string hp = prefix + "/head" + std::to_string(h);
    params.create_uniform(hp + "/proj", {spec.feature_width, spec.head_units},
                          spec.feature_width, rng);
    params.create_uniform(hp + "/att_src", {spec.head_units, 1},
                          spec.head_units, rng);
    params.create_uniform(hp + "/att_dst", {spec.head_units, 1},
                          spec.head_units, rng);
  }
  MlpSpec value{spec.heads * spec.head_units, spec.value_hidden, 1, spec.slope};
  init_mlp(params, prefix + "/value", value, rng);
}

GatResult gat_forward_full(const ParamStore& params, const std::string& prefix,
                           const GatSpec& spec, const Tensor& node_features,
                           int agents) {
  validate(spec);
  if (agents < 1) throw std::invalid_argument("gat: at least one agent");
  if (node_features.cols() != spec.feature_width ||
      node_features.rows() % agents != 0) {
    throw std::invalid_argument("gat: node feature shape mismatch");
  }
  GatResult result;
  std::vector<Tensor> head_outputs;
  head_outputs.reserve(spec.heads);
  for (int h = 0; h < spec.heads; ++h) {
    const std::string hp = prefix + "/head" + std::to_string(h);
    const Tensor z = matmul(node_features, params.get(hp + "/proj"));
    // Additive attention: logit(i,j) = a_src.z_i + a_dst.z_j.
    const Tensor s = sum_rows(matmul(z, params.get(hp + "/att_src")));
    const Tensor d = sum_rows(matmul(z, params.get(hp + "/att_dst")));
    const Tensor logits =
        leaky_relu(block_pairwise_sum(s, d, agents), spec.slope);
    const Tensor attn = softmax_rows(logits);
    result.head_attention.push_back(attn);
    head_outputs.push_back(block_rows_matmul(attn, z, agents));
  }
  const Tensor merged =
      spec.heads == 1 ? head_outputs[0] : concat_cols(head_outputs);
  MlpSpec value{spec.heads * spec.head_units, spec.value_hidden, 1, spec.slope};
  result.values = mlp_forward(params, prefix + "/value", value, merged);
  return result;
}

Tensor gat_forward(const ParamStore& params, const std::string& prefix,
                   const GatSpec& spec, const Tensor& node_features,
                   int agents) {
  return gat_forward_full(params, prefix, spec, node_features, agents).values;
}

Tensor entropy_rows(const Tensor& probs) {
  return neg(sum_rows(mul(probs, log_elem(clamp_min(probs, 1e-12)))));
}

}  // namespace dremarl
