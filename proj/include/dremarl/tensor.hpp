#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace dremarl {

/// Node in the reverse-mode computation graph. Values are dense, row-major,
/// 64-bit floats. `backprop` pulls the node's gradient into its parents'
/// gradient buffers; it is only recorded while gradients are enabled and at
/// least one parent requires them.
struct TensorNode {
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backprop;
};

/// Shared handle to a graph node. Copies alias the same node, so graphs are
/// built by value without copying buffers.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

  /// Leaf tensor from explicit shape and contents.
  static Tensor from(std::vector<int> shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor constant(std::vector<int> shape, double value);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const;
  std::size_t size() const;
  /// Rows/cols of a 2-D tensor; a 1-D tensor is a column (rows == size).
  int rows() const;
  int cols() const;

  const std::vector<double>& values() const;
  /// Mutable access for in-place parameter updates. Leaf tensors only.
  std::vector<double>& raw_values();
  double value() const;  // single-element tensors
  double at(std::size_t i) const;
  double at(int r, int c) const;

  bool requires_grad() const;
  const std::vector<double>& grad() const;
  std::shared_ptr<TensorNode> node() const { return node_; }

 private:
  std::shared_ptr<TensorNode> node_;
};

/// Disables graph recording on the current thread for its lifetime;
/// forwards built inside the scope produce constant tensors.
struct NoGradScope {
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;
};

bool grad_enabled();

// Elementwise ops require identical shapes unless stated otherwise.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
/// [R x C] plus a length-C vector broadcast over rows (bias add).
Tensor add_rowvec(const Tensor& m, const Tensor& v);
/// [R x C] minus a length-R vector broadcast over columns.
Tensor sub_colvec(const Tensor& m, const Tensor& v);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor neg(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);

Tensor leaky_relu(const Tensor& a, double slope);
Tensor softplus(const Tensor& a);
Tensor log_elem(const Tensor& a);
Tensor square(const Tensor& a);
/// Row-wise softmax of a 2-D tensor; every output row sums to 1.
Tensor softmax_rows(const Tensor& a);

Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);
/// Row sums of a 2-D tensor -> length-R tensor.
Tensor sum_rows(const Tensor& a);
/// out[i] = m[i, idx[i]] for a 2-D tensor -> length-R tensor.
Tensor gather_cols(const Tensor& m, const std::vector<int>& idx);

Tensor minimum(const Tensor& a, const Tensor& b);
Tensor clamp_min(const Tensor& a, double lo);
Tensor clamp(const Tensor& a, double lo, double hi);

Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& m, int start, int count);

/// Block-diagonal pairwise sum. Inputs are length G*n vectors holding G
/// groups of n entries; out[g*n+i, j] = src[g*n+i] + dst[g*n+j].
Tensor block_pairwise_sum(const Tensor& src, const Tensor& dst, int group);
/// Per-group matrix product: out[g*n+i, :] = sum_j attn[g*n+i, j] * feat[g*n+j, :]
/// with attn [G*n x n] and feat [G*n x H].
Tensor block_rows_matmul(const Tensor& attn, const Tensor& feat, int group);

/// Copy of the values with the graph cut; never requires gradients.
Tensor detach(const Tensor& a);

/// Slope-parameterized rectifier on a single value.
inline double leaky_relu(double x, double slope) {
  return x >= 0.0 ? x : slope * x;
}

/// Backpropagate from a single-element loss. Fills `grad` on every reachable
/// node; accumulated leaf gradients are checked for finiteness.
void backward(const Tensor& loss);

}  // namespace dremarl
