#include "dremarl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace dremarl {

namespace {

thread_local bool g_grad_enabled = true;

std::size_t shape_size(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor: non-positive dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

void check_finite(const std::vector<double>& v, const char* op) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::runtime_error(std::string("tensor: non-finite value in ") + op);
    }
  }
}

std::shared_ptr<TensorNode> make_leaf(std::vector<int> shape,
                                      std::vector<double> values,
                                      bool requires_grad) {
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->values = std::move(values);
  n->requires_grad = requires_grad;
  return n;
}

/// Wires an op node. Parents and the closure are dropped when no parent
/// requires gradients or recording is off, so constant subgraphs stay flat.
Tensor make_op(std::vector<int> shape, std::vector<double> values,
               std::vector<Tensor> parents,
               std::function<void(TensorNode&)> backprop, const char* op) {
  check_finite(values, op);
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->values = std::move(values);
  bool needs = false;
  if (g_grad_enabled) {
    for (const auto& p : parents) needs = needs || p.requires_grad();
  }
  if (needs) {
    n->requires_grad = true;
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.node());
    n->backprop = std::move(backprop);
  }
  return Tensor(std::move(n));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

void require_2d(const Tensor& t, const char* op) {
  if (t.shape().size() != 2) {
    throw std::invalid_argument(std::string(op) + ": 2-D tensor required");
  }
}

}  // namespace

NoGradScope::NoGradScope() { g_grad_enabled = false; }
NoGradScope::~NoGradScope() { g_grad_enabled = true; }
bool grad_enabled() { return g_grad_enabled; }

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values,
                    bool requires_grad) {
  if (shape_size(shape) != values.size()) {
    throw std::invalid_argument("tensor: shape does not match value count");
  }
  check_finite(values, "from");
  return Tensor(make_leaf(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  std::size_t n = shape_size(shape);
  return Tensor(make_leaf(std::move(shape), std::vector<double>(n, 0.0),
                          requires_grad));
}

Tensor Tensor::constant(std::vector<int> shape, double value) {
  std::size_t n = shape_size(shape);
  check_finite({value}, "constant");
  return Tensor(make_leaf(std::move(shape), std::vector<double>(n, value), false));
}

Tensor Tensor::scalar(double value) { return constant({1}, value); }

const std::vector<int>& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::size() const { return node_->values.size(); }

int Tensor::rows() const {
  if (node_->shape.size() == 2) return node_->shape[0];
  if (node_->shape.size() == 1) return node_->shape[0];
  throw std::invalid_argument("tensor: rows() needs 1-D or 2-D");
}

int Tensor::cols() const {
  if (node_->shape.size() == 2) return node_->shape[1];
  if (node_->shape.size() == 1) return 1;
  throw std::invalid_argument("tensor: cols() needs 1-D or 2-D");
}

const std::vector<double>& Tensor::values() const { return node_->values; }

std::vector<double>& Tensor::raw_values() {
  if (node_->backprop) {
    throw std::logic_error("tensor: raw_values() on a non-leaf node");
  }
  return node_->values;
}

double Tensor::value() const {
  if (size() != 1) throw std::invalid_argument("tensor: value() on non-scalar");
  return node_->values[0];
}

double Tensor::at(std::size_t i) const { return node_->values.at(i); }

double Tensor::at(int r, int c) const {
  require_2d(*this, "at");
  return node_->values.at(static_cast<std::size_t>(r) * node_->shape[1] + c);
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
const std::vector<double>& Tensor::grad() const { return node_->grad; }

// ---------------------------------------------------------------------------
// elementwise

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  const auto &av = a.values(), &bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return make_op(a.shape(), std::move(out), {a, b},
                 [](TensorNode& self) {
                   for (int p = 0; p < 2; ++p) {
                     auto& pg = self.parents[p]->grad;
                     for (std::size_t i = 0; i < self.grad.size(); ++i)
                       pg[i] += self.grad[i];
                   }
                 },
                 "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  const auto &av = a.values(), &bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return make_op(a.shape(), std::move(out), {a, b},
                 [](TensorNode& self) {
                   auto& ga = self.parents[0]->grad;
                   auto& gb = self.parents[1]->grad;
                   for (std::size_t i = 0; i < self.grad.size(); ++i) {
                     ga[i] += self.grad[i];
                     gb[i] -= self.grad[i];
                   }
                 },
                 "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  const auto &av = a.values(), &bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return make_op(a.shape(), std::move(out), {a, b},
                 [](TensorNode& self) {
                   const auto& av = self.parents[0]->values;
                   const auto& bv = self.parents[1]->values;
                   auto& ga = self.parents[0]->grad;
                   auto& gb = self.parents[1]->grad;
                   for (std::size_t i = 0; i < self.grad.size(); ++i) {
                     ga[i] += self.grad[i] * bv[i];
                     gb[i] += self.grad[i] * av[i];
                   }
                 },
                 "mul");
}

Tensor div(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "div");
  std::vector<double> out(a.size());
  const auto &av = a.values(), &bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] / bv[i];
  return make_op(a.shape(), std::move(out), {a, b},
                 [](TensorNode& self) {
                   const auto& av = self.parents[0]->values;
                   const auto& bv = self.parents[1]->values;
                   auto& ga = self.parents[0]->grad;
                   auto& gb = self.parents[1]->grad;
                   for (std::size_t i = 0; i < self.grad.size(); ++i) {
                     ga[i] += self.grad[i] / bv[i];
                     gb[i] -= self.grad[i] * av[i] / (bv[i] * bv[i]);
                   }
                 },
                 "div");
}

Tensor add_rowvec(const Tensor& m, const Tensor& v) {
  require_2d(m, "add_rowvec");
  const int rows = m.rows(), cols = m.cols();
  if (static_cast<int>(v.size()) != cols) {
    throw std::invalid_argument("add_rowvec: vector width mismatch");
  }
  std::vector<double> out(m.size());
  const auto &mv = m.values(), &vv = v.values();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out[static_cast<std::size_t>(r) * cols + c] =
          mv[static_cast<std::size_t>(r) * cols + c] + vv[c];
  return make_op(m.shape(), std::move(out), {m, v},
                 [rows, cols](TensorNode& self) {
                   auto& gm = self.parents[0]->grad;
                   auto& gv = self.parents[1]->grad;
                   for (int r = 0; r < rows; ++r)
                     for (int c = 0; c < cols; ++c) {
                       const double g =
                           self.grad[static_cast<std::size_t>(r) * cols + c];
                       gm[static_cast<std::size_t>(r) * cols + c] += g;
                       gv[c] += g;
                     }
                 },
                 "add_rowvec");
}

Tensor sub_colvec(const Tensor& m, const Tensor& v) {
  require_2d(m, "sub_colvec");
  const int rows = m.rows(), cols = m.cols();
  if (static_cast<int>(v.size()) != rows) {
    throw std::invalid_argument("sub_colvec: vector height mismatch");
  }
  std::vector<double> out(m.size());
  const auto &mv = m.values(), &vv = v.values();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out[static_cast<std::size_t>(r) * cols + c] =
          mv[static_cast<std::size_t>(r) * cols + c] - vv[r];
  return make_op(m.shape(), std::move(out), {m, v},
                 [rows, cols](TensorNode& self) {
                   auto& gm = self.parents[0]->grad;
                   auto& gv = self.parents[1]->grad;
                   for (int r = 0; r < rows; ++r)
                     for (int c = 0; c < cols; ++c) {
                       const double g =
                           self.grad[static_cast<std::size_t>(r) * cols + c];
                       gm[static_cast<std::size_t>(r) * cols + c] += g;
                       gv[r] -= g;
                     }
                 },
                 "sub_colvec");
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * s;
  return make_op(a.shape(), std::move(out), {a},
                 [s](TensorNode& self) {
                   auto& g = self.parents[0]->grad;
                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                     g[i] += self.grad[i] * s;
                 },
                 "scale");
}

Tensor add_scalar(const Tensor& a, double s) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + s;
  return make_op(a.shape(), std::move(out), {a},
                 [](TensorNode& self) {
                   auto& g = self.parents[0]->grad;
                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                     g[i] += self.grad[i];
                 },
                 "add_scalar");
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

// ---------------------------------------------------------------------------
// matmul

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  const int R = a.rows(), K = a.cols(), C = b.cols();
  if (b.rows() != K) throw std::invalid_argument("matmul: inner dim mismatch");
  std::vector<double> out(static_cast<std::size_t>(R) * C, 0.0);
  const auto &av = a.values(), &bv = b.values();
  for (int i = 0; i < R; ++i) {
    for (int k = 0; k < K; ++k) {
      const double aik = av[static_cast<std::size_t>(i) * K + k];
      const double* brow = &bv[static_cast<std::size_t>(k) * C];
      double* orow = &out[static_cast<std::size_t>(i) * C];
      for (int j = 0; j < C; ++j) orow[j] += aik * brow[j];
    }
  }
  return make_op({R, C}, std::move(out), {a, b},
                 [R, K, C](TensorNode& self) {
                   const auto& av = self.parents[0]->values;
                   const auto& bv = self.parents[1]->values;
                   if (self.parents[0]->requires_grad) {
                     auto& ga = self.parents[0]->grad;
                     // dA = dC * B^T
                     for (int i = 0; i < R; ++i)
                       for (int k = 0; k < K; ++k) {
                         const double* grow =
                             &self.grad[static_cast<std::size_t>(i) * C];
                         const double* brow =
                             &bv[static_cast<std::size_t>(k) * C];
                         double acc = 0.0;
                         for (int j = 0; j < C; ++j) acc += grow[j] * brow[j];
                         ga[static_cast<std::size_t>(i) * K + k] += acc;
                       }
                   }
                   if (self.parents[1]->requires_grad) {
                     auto& gb = self.parents[1]->grad;
                     // dB = A^T * dC
                     for (int i = 0; i < R; ++i)
                       for (int k = 0; k < K; ++k) {
                         const double aik =
                             av[static_cast<std::size_t>(i) * K + k];
                         const double* grow =
                             &self.grad[static_cast<std::size_t>(i) * C];
                         double* gbrow = &gb[static_cast<std::size_t>(k) * C];
                         for (int j = 0; j < C; ++j) gbrow[j] += aik * grow[j];
                       }
                   }
                 },
                 "matmul");
}

// ---------------------------------------------------------------------------
// nonlinearities

Tensor leaky_relu(const Tensor& a, double slope) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = av[i] >= 0.0 ? av[i] : slope * av[i];
  return make_op(a.shape(), std::move(out), {a},
                 [slope](TensorNode& self) {
                   const auto& av = self.parents[0]->values;
                   auto& g = self.parents[0]->grad;
                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                     g[i] += self.grad[i] * (av[i] >= 0.0 ? 1.0 : slope);
                 },
                 "leaky_relu");
}

Tensor softplus(const Tensor& a) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = av[i];
    out[i] = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  }
  return make_op(a.shape(), std::move(out), {a},
                 [](TensorNode& self) {
                   const auto& av = self.parents[0]->values;
                   auto& g = self.parents[0]->grad;
                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                     g[i] += self.grad[i] / (1.0 + std::exp(-av[i]));
                 },
                 "softplus");
}

Tensor log_elem(const Tensor& a) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(av[i]);
  return make_op(a.shape(), std::move(out), {a},
                 [](TensorNode& self) {
                   const auto& av = self.parents[0]->values;
                   auto& g = self.parents[0]->grad;
                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                     g[i] += self.grad[i] / av[i];
                 },
                 "log");
}

Tensor square(const Tensor& a) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * av[i];
  return make_op(a.shape(), std::move(out), {a},
                 [](TensorNode& self) {
                   const auto& av = self.parents[0]->values;
                   auto& g = self.parents[0]->grad;
                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                     g[i] += self.grad[i] * 2.0 * av[i];
                 },
                 "square");
}

Tensor softmax_rows(const Tensor& a) {
  require_2d(a, "softmax_rows");
  const int rows = a.rows(), cols = a.cols();
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (int r = 0; r < rows; ++r) {
    const double* x = &av[static_cast<std::size_t>(r) * cols];
    double* y = &out[static_cast<std::size_t>(r) * cols];
    double mx = x[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
    double z = 0.0;
    for (int c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - mx);
      z += y[c];
    }
    for (int c = 0; c < cols; ++c) y[c] /= z;
  }
  return make_op(a.shape(), std::move(out), {a},
                 [rows, cols](TensorNode& self) {
                   auto& g = self.parents[0]->grad;
                   for (int r = 0; r < rows; ++r) {
                     const double* y =
                         &self.values[static_cast<std::size_t>(r) * cols];
                     const double* dy =
                         &self.grad[static_cast<std::size_t>(r) * cols];
                     double dot = 0.0;
                     for (int c = 0; c < cols; ++c) dot += dy[c] * y[c];
                     double* gx = &g[static_cast<std::size_t>(r) * cols];
                     for (int c = 0; c < cols; ++c)
                       gx[c] += y[c] * (dy[c] - dot);
                   }
                 },
                 "softmax_rows");
}

// ---------------------------------------------------------------------------
// reductions and selection

Tensor sum_all(const Tensor& a) {
  double s = 0.0;
  for (double x : a.values()) s += x;
  return make_op({1}, {s}, {a},
                 [](TensorNode& self) {
                   auto& g = self.parents[0]->grad;
                   for (std::size_t i = 0; i < g.size(); ++i)
                     g[i] += self.grad[0];
                 },
                 "sum_all");
}

Tensor mean_all(const Tensor& a) {
  const double inv = 1.0 / static_cast<double>(a.size());
  double s = 0.0;
  for (double x : a.values()) s += x;
  return make_op({1}, {s * inv}, {a},
                 [inv](TensorNode& self) {
                   auto& g = self.parents[0]->grad;
                   for (std::size_t i = 0; i < g.size(); ++i)
                     g[i] += self.grad[0] * inv;
                 },
                 "mean_all");
}

Tensor sum_rows(const Tensor& a) {
  require_2d(a, "sum_rows");
  const int rows = a.rows(), cols = a.cols();
  std::vector<double> out(rows, 0.0);
  const auto& av = a.values();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out[r] += av[static_cast<std::size_t>(r) * cols + c];
  return make_op({rows}, std::move(out), {a},
                 [rows, cols](TensorNode& self) {
                   auto& g = self.parents[0]->grad;
                   for (int r = 0; r < rows; ++r)
                     for (int c = 0; c < cols; ++c)
                       g[static_cast<std::size_t>(r) * cols + c] +=
                           self.grad[r];
                 },
                 "sum_rows");
}

Tensor gather_cols(const Tensor& m, const std::vector<int>& idx) {
  require_2d(m, "gather_cols");
  const int rows = m.rows(), cols = m.cols();
  if (static_cast<int>(idx.size()) != rows) {
    throw std::invalid_argument("gather_cols: one index per row required");
  }
  std::vector<double> out(rows);
  const auto& mv = m.values();
  for (int r = 0; r < rows; ++r) {
    if (idx[r] < 0 || idx[r] >= cols) {
      throw std::invalid_argument("gather_cols: index out of range");
    }
    out[r] = mv[static_cast<std::size_t>(r) * cols + idx[r]];
  }
  return make_op({rows}, std::move(out), {m},
                 [rows, cols, idx](TensorNode& self) {
                   auto& g = self.parents[0]->grad;
                   for (int r = 0; r < rows; ++r)
                     g[static_cast<std::size_t>(r) * cols + idx[r]] +=
                         self.grad[r];
                 },
                 "gather_cols");
}

Tensor minimum(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "minimum");
  std::vector<double> out(a.size());
  const auto &av = a.values(), &bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(av[i], bv[i]);
  return make_op(a.shape(), std::move(out), {a, b},
                 [](TensorNode& self) {
                   const auto& av = self.parents[0]->values;
                   const auto& bv = self.parents[1]->values;
                   auto& ga = self.parents[0]->grad;
                   auto& gb = self.parents[1]->grad;
                   for (std::size_t i = 0; i < self.grad.size(); ++i) {
                     if (av[i] <= bv[i])
                       ga[i] += self.grad[i];
                     else
                       gb[i] += self.grad[i];
                   }
                 },
                 "minimum");
}

Tensor clamp_min(const Tensor& a, double lo) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(av[i], lo);
  return make_op(a.shape(), std::move(out), {a},
                 [lo](TensorNode& self) {
                   const auto& av = self.parents[0]->values;
                   auto& g = self.parents[0]->grad;
                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                     if (av[i] >= lo) g[i] += self.grad[i];
                 },
                 "clamp_min");
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clamp: lo > hi");
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::min(std::max(av[i], lo), hi);
  return make_op(a.shape(), std::move(out), {a},
                 [lo, hi](TensorNode& self) {
                   const auto& av = self.parents[0]->values;
                   auto& g = self.parents[0]->grad;
                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                     if (av[i] >= lo && av[i] <= hi) g[i] += self.grad[i];
                 },
                 "clamp");
}

// ---------------------------------------------------------------------------
// layout

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty input");
  const int rows = parts[0].rows();
  int total = 0;
  for (const auto& p : parts) {
    require_2d(p, "concat_cols");
    if (p.rows() != rows)
      throw std::invalid_argument("concat_cols: row count mismatch");
    total += p.cols();
  }
  std::vector<double> out(static_cast<std::size_t>(rows) * total);
  std::vector<int> widths;
  int off = 0;
  for (const auto& p : parts) {
    const int w = p.cols();
    widths.push_back(w);
    const auto& pv = p.values();
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < w; ++c)
        out[static_cast<std::size_t>(r) * total + off + c] =
            pv[static_cast<std::size_t>(r) * w + c];
    off += w;
  }
  return make_op({rows, total}, std::move(out), parts,
                 [rows, total, widths](TensorNode& self) {
                   int off = 0;
                   for (std::size_t p = 0; p < widths.size(); ++p) {
                     const int w = widths[p];
                     if (self.parents[p]->requires_grad) {
                       auto& g = self.parents[p]->grad;
                       for (int r = 0; r < rows; ++r)
                         for (int c = 0; c < w; ++c)
                           g[static_cast<std::size_t>(r) * w + c] +=
                               self.grad[static_cast<std::size_t>(r) * total +
                                         off + c];
                     }
                     off += w;
                   }
                 },
                 "concat_cols");
}

Tensor slice_cols(const Tensor& m, int start, int count) {
  require_2d(m, "slice_cols");
  const int rows = m.rows(), cols = m.cols();
  if (start < 0 || count <= 0 || start + count > cols) {
    throw std::invalid_argument("slice_cols: range out of bounds");
  }
  std::vector<double> out(static_cast<std::size_t>(rows) * count);
  const auto& mv = m.values();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < count; ++c)
      out[static_cast<std::size_t>(r) * count + c] =
          mv[static_cast<std::size_t>(r) * cols + start + c];
  return make_op({rows, count}, std::move(out), {m},
                 [rows, cols, start, count](TensorNode& self) {
                   auto& g = self.parents[0]->grad;
                   for (int r = 0; r < rows; ++r)
                     for (int c = 0; c < count; ++c)
                       g[static_cast<std::size_t>(r) * cols + start + c] +=
                           self.grad[static_cast<std::size_t>(r) * count + c];
                 },
                 "slice_cols");
}

Tensor block_pairwise_sum(const Tensor& src, const Tensor& dst, int group) {
  if (src.shape() != dst.shape() || src.shape().size() != 1) {
    throw std::invalid_argument("block_pairwise_sum: two equal 1-D tensors required");
  }
  const int total = static_cast<int>(src.size());
  if (group <= 0 || total % group != 0) {
    throw std::invalid_argument("block_pairwise_sum: size not divisible by group");
  }
  const int groups = total / group;
  std::vector<double> out(static_cast<std::size_t>(total) * group);
  const auto &sv = src.values(), &dv = dst.values();
  for (int g = 0; g < groups; ++g)
    for (int i = 0; i < group; ++i)
      for (int j = 0; j < group; ++j)
        out[static_cast<std::size_t>(g * group + i) * group + j] =
            sv[g * group + i] + dv[g * group + j];
  return make_op({total, group}, std::move(out), {src, dst},
                 [groups, group](TensorNode& self) {
                   auto& gs = self.parents[0]->grad;
                   auto& gd = self.parents[1]->grad;
                   for (int g = 0; g < groups; ++g)
                     for (int i = 0; i < group; ++i)
                       for (int j = 0; j < group; ++j) {
                         const double gr =
                             self.grad[static_cast<std::size_t>(g * group + i) *
                                           group + j];
                         gs[g * group + i] += gr;
                         gd[g * group + j] += gr;
                       }
                 },
                 "block_pairwise_sum");
}

Tensor block_rows_matmul(const Tensor& attn, const Tensor& feat, int group) {
  require_2d(attn, "block_rows_matmul");
  require_2d(feat, "block_rows_matmul");
  const int total = attn.rows();
  const int H = feat.cols();
  if (attn.cols() != group || feat.rows() != total || group <= 0 ||
      total % group != 0) {
    throw std::invalid_argument("block_rows_matmul: inconsistent shapes");
  }
  const int groups = total / group;
  std::vector<double> out(static_cast<std::size_t>(total) * H, 0.0);
  const auto &av = attn.values(), &fv = feat.values();
  for (int g = 0; g < groups; ++g)
    for (int i = 0; i < group; ++i)
      for (int j = 0; j < group; ++j) {
        const double a =
            av[static_cast<std::size_t>(g * group + i) * group + j];
        const double* frow = &fv[static_cast<std::size_t>(g * group + j) * H];
        double* orow = &out[static_cast<std::size_t>(g * group + i) * H];
        for (int h = 0; h < H; ++h) orow[h] += a * frow[h];
      }
  return make_op({total, H}, std::move(out), {attn, feat},
                 [groups, group, H](TensorNode& self) {
                   const auto& av = self.parents[0]->values;
                   const auto& fv = self.parents[1]->values;
                   auto& ga = self.parents[0]->grad;
                   auto& gf = self.parents[1]->grad;
                   for (int g = 0; g < groups; ++g)
                     for (int i = 0; i < group; ++i)
                       for (int j = 0; j < group; ++j) {
                         const std::size_t arow =
                             static_cast<std::size_t>(g * group + i);
                         const double* grow = &self.grad[arow * H];
                         const double* frow =
                             &fv[static_cast<std::size_t>(g * group + j) * H];
                         double acc = 0.0;
                         for (int h = 0; h < H; ++h) acc += grow[h] * frow[h];
                         ga[arow * group + j] += acc;
                         const double a = av[arow * group + j];
                         double* gfrow =
                             &gf[static_cast<std::size_t>(g * group + j) * H];
                         for (int h = 0; h < H; ++h) gfrow[h] += a * grow[h];
                       }
                 },
                 "block_rows_matmul");
}

Tensor detach(const Tensor& a) {
  return Tensor(make_leaf(a.shape(), a.values(), false));
}

// ---------------------------------------------------------------------------
// backward

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw std::invalid_argument("backward: scalar loss required");
  }
  if (!std::isfinite(loss.value())) {
    throw std::runtime_error("backward: non-finite loss");
  }
  if (!loss.requires_grad()) {
    throw std::invalid_argument("backward: loss does not require gradients");
  }

  // Post-order DFS for a topological order.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> visited;
  std::vector<std::pair<TensorNode*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorNode* p = node->parents[next++].get();
      if (visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (TensorNode* n : order) n->grad.assign(n->values.size(), 0.0);
  loss.node()->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backprop) (*it)->backprop(**it);
  }
  for (TensorNode* n : order) {
    if (n->parents.empty() && n->requires_grad) {
      check_finite(n->grad, "backward");
    }
  }
}

}  // namespace dremarl
