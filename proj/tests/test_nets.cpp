#include <doctest.h>

#include <cmath>
#include <vector>

#include "dremarl/nets.hpp"
#include "dremarl/rng.hpp"

using namespace dremarl;

namespace {

// Straight-line re-evaluation of an MLP with plain loops, independent of the
// graph machinery.
std::vector<double> plain_mlp(const ParamStore& params,
                              const std::string& prefix, const MlpSpec& spec,
                              const std::vector<double>& input) {
  std::vector<double> h = input;
  std::vector<int> widths = spec.hidden;
  widths.push_back(spec.output);
  int in = spec.input;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const int out = widths[l];
    const auto& w = params.get(prefix + "/w" + std::to_string(l)).values();
    const auto& b = params.get(prefix + "/b" + std::to_string(l)).values();
    std::vector<double> next(out, 0.0);
    for (int j = 0; j < out; ++j) {
      double acc = b[j];
      for (int i = 0; i < in; ++i) acc += h[i] * w[i * out + j];
      next[j] = acc;
    }
    if (l + 1 < widths.size()) {
      for (double& x : next) x = x >= 0.0 ? x : spec.slope * x;
    }
    h = std::move(next);
    in = out;
  }
  return h;
}

double fd_check_all_params(ParamStore& params,
                           const std::function<Tensor()>& forward,
                           double h = 1e-5) {
  backward(forward());
  double worst = 0.0;
  for (const auto& name : params.names()) {
    Tensor p = params.get(name);
    const std::vector<double> analytic = p.grad();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double keep = p.raw_values()[i];
      p.raw_values()[i] = keep + h;
      double up;
      {
        NoGradScope no_grad;
        up = forward().value();
      }
      p.raw_values()[i] = keep - h;
      double down;
      {
        NoGradScope no_grad;
        down = forward().value();
      }
      p.raw_values()[i] = keep;
      const double fd = (up - down) / (2.0 * h);
      const double diff = std::abs(analytic[i] - fd);
      if (diff < 1e-9) continue;
      const double denom = std::max({std::abs(analytic[i]), std::abs(fd), 1e-8});
      worst = std::max(worst, diff / denom);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("mlp: zero parameters map any input to zero") {
  ParamStore params;
  MlpSpec spec{3, {4, 4}, 2, 0.01};
  params.create_zeros("net/w0", {3, 4});
  params.create_zeros("net/b0", {4});
  params.create_zeros("net/w1", {4, 4});
  params.create_zeros("net/b1", {4});
  params.create_zeros("net/w2", {4, 2});
  params.create_zeros("net/b2", {2});
  const Tensor out =
      mlp_forward(params, "net", spec, Tensor::from({1, 3}, {1.0, -2.0, 3.0}));
  CHECK(out.values() == std::vector<double>{0.0, 0.0});
}

TEST_CASE("mlp: identity-initialized linear layer is the identity") {
  ParamStore params;
  MlpSpec spec{2, {}, 2, 0.01};
  params.create("net/w0", {2, 2}, {1.0, 0.0, 0.0, 1.0});
  params.create_zeros("net/b0", {2});
  const Tensor out =
      mlp_forward(params, "net", spec, Tensor::from({1, 2}, {1.0, 2.0}));
  CHECK(out.values()[0] == doctest::Approx(1.0));
  CHECK(out.values()[1] == doctest::Approx(2.0));
}

TEST_CASE("mlp: seeded net matches a straight-line re-evaluation") {
  Rng rng(0);
  ParamStore params;
  MlpSpec spec{5, {8, 8}, 3, 0.01};
  init_mlp(params, "net", spec, rng);
  std::vector<double> input(5);
  for (auto& x : input) x = rng.uniform(-1.0, 1.0);
  const Tensor out =
      mlp_forward(params, "net", spec, Tensor::from({1, 5}, input));
  const std::vector<double> expected = plain_mlp(params, "net", spec, input);
  REQUIRE(out.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(out.at(i) == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("mlp: input width mismatch raises") {
  Rng rng(1);
  ParamStore params;
  MlpSpec spec{4, {4}, 1, 0.01};
  init_mlp(params, "net", spec, rng);
  CHECK_THROWS_AS(
      mlp_forward(params, "net", spec, Tensor::from({1, 3}, {1, 2, 3})),
      std::invalid_argument);
}

TEST_CASE("gat: one agent attends only to itself") {
  Rng rng(2);
  ParamStore params;
  GatSpec spec{4, 3, 5, {8}, 0.01};
  init_gat(params, "critic", spec, rng);
  const GatResult out = gat_forward_full(
      params, "critic", spec, Tensor::from({1, 4}, {0.3, -0.2, 0.9, 0.1}), 1);
  for (const auto& attn : out.head_attention) {
    REQUIRE(attn.size() == 1);
    CHECK(attn.at(0) == doctest::Approx(1.0));
  }
}

TEST_CASE("gat: identical node features give identical outputs") {
  Rng rng(3);
  ParamStore params;
  GatSpec spec{3, 2, 4, {8, 8}, 0.01};
  init_gat(params, "critic", spec, rng);
  const std::vector<double> row{0.5, -1.0, 0.25};
  std::vector<double> nodes;
  nodes.insert(nodes.end(), row.begin(), row.end());
  nodes.insert(nodes.end(), row.begin(), row.end());
  const Tensor out =
      gat_forward(params, "critic", spec, Tensor::from({2, 3}, nodes), 2);
  CHECK(out.at(0) == doctest::Approx(out.at(1)).epsilon(1e-14));
}

TEST_CASE("gat: attention rows sum to one") {
  Rng rng(4);
  ParamStore params;
  GatSpec spec{6, 8, 8, {16}, 0.01};
  init_gat(params, "critic", spec, rng);
  std::vector<double> nodes(3 * 6);
  for (auto& x : nodes) x = rng.uniform(-1.0, 1.0);
  const GatResult out = gat_forward_full(params, "critic", spec,
                                         Tensor::from({3, 6}, nodes), 3);
  for (const auto& attn : out.head_attention) {
    for (int r = 0; r < 3; ++r) {
      double sum = 0.0;
      for (int c = 0; c < 3; ++c) sum += attn.at(r, c);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("gat: permuting agents permutes outputs identically") {
  Rng rng(5);
  ParamStore params;
  GatSpec spec{4, 4, 4, {8, 8}, 0.01};
  init_gat(params, "critic", spec, rng);
  std::vector<double> nodes(4 * 4);
  for (auto& x : nodes) x = rng.uniform(-1.0, 1.0);
  const Tensor direct =
      gat_forward(params, "critic", spec, Tensor::from({4, 4}, nodes), 4);
  const std::vector<int> perm{2, 0, 3, 1};
  std::vector<double> permuted(4 * 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) permuted[r * 4 + c] = nodes[perm[r] * 4 + c];
  }
  const Tensor shuffled =
      gat_forward(params, "critic", spec, Tensor::from({4, 4}, permuted), 4);
  for (int r = 0; r < 4; ++r) {
    CHECK(shuffled.at(r) == doctest::Approx(direct.at(perm[r])).epsilon(1e-12));
  }
}

TEST_CASE("gat: batched groups match per-sample evaluation") {
  Rng rng(6);
  ParamStore params;
  GatSpec spec{3, 2, 3, {8}, 0.01};
  init_gat(params, "critic", spec, rng);
  std::vector<double> a(2 * 3), b(2 * 3);
  for (auto& x : a) x = rng.uniform(-1.0, 1.0);
  for (auto& x : b) x = rng.uniform(-1.0, 1.0);
  std::vector<double> both = a;
  both.insert(both.end(), b.begin(), b.end());
  const Tensor batched =
      gat_forward(params, "critic", spec, Tensor::from({4, 3}, both), 2);
  const Tensor first =
      gat_forward(params, "critic", spec, Tensor::from({2, 3}, a), 2);
  const Tensor second =
      gat_forward(params, "critic", spec, Tensor::from({2, 3}, b), 2);
  CHECK(batched.at(0) == doctest::Approx(first.at(0)).epsilon(1e-14));
  CHECK(batched.at(1) == doctest::Approx(first.at(1)).epsilon(1e-14));
  CHECK(batched.at(2) == doctest::Approx(second.at(0)).epsilon(1e-14));
  CHECK(batched.at(3) == doctest::Approx(second.at(1)).epsilon(1e-14));
}

TEST_CASE("gradients of random mlp and gat nets match finite differences") {
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(100 + trial);
    const int in = 2 + rng.below(5);
    const int hidden = 3 + rng.below(6);
    const int out = 1 + rng.below(4);
    const int batch = 1 + rng.below(4);

    ParamStore mlp_params;
    MlpSpec mlp_spec{in, {hidden, hidden}, out, 0.01};
    init_mlp(mlp_params, "net", mlp_spec, rng);
    std::vector<double> input(static_cast<std::size_t>(batch) * in);
    for (auto& x : input) x = rng.uniform(-1.0, 1.0);
    const Tensor x = Tensor::from({batch, in}, input);
    CHECK(fd_check_all_params(mlp_params, [&]() {
            return mean_all(
                square(mlp_forward(mlp_params, "net", mlp_spec, x)));
          }) < 1e-4);

    const int agents = 1 + rng.below(4);
    ParamStore gat_params;
    GatSpec gat_spec{in, 1 + rng.below(3), 2 + rng.below(3), {hidden}, 0.01};
    init_gat(gat_params, "critic", gat_spec, rng);
    std::vector<double> nodes(static_cast<std::size_t>(agents) * 2 * in);
    for (auto& v : nodes) v = rng.uniform(-1.0, 1.0);
    const Tensor nf = Tensor::from({agents * 2, in}, nodes);
    CHECK(fd_check_all_params(gat_params, [&]() {
            return mean_all(square(
                gat_forward(gat_params, "critic", gat_spec, nf, agents)));
          }) < 1e-4);
  }
}

TEST_CASE("entropy of the uniform distribution is ln K") {
  const Tensor uniform = Tensor::constant({1, 5}, 0.2);
  CHECK(entropy_rows(uniform).at(0) ==
        doctest::Approx(std::log(5.0)).epsilon(1e-12));
  const Tensor onehot = Tensor::from({1, 3}, {1.0, 0.0, 0.0});
  CHECK(entropy_rows(onehot).at(0) == doctest::Approx(0.0));
}
