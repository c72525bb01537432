// include/mcmixit/ad/tensor.h

// Copyright 2026  MC-MixIT Toolkit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MCMIXIT_AD_TENSOR_H_
#define MCMIXIT_AD_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcmixit::ad {

class AutodiffError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One vertex of the computation DAG.  Values are computed eagerly when an op
// is applied; gradients are filled in by Backward() and accumulate until the
// owner zeroes them.  Nodes that do not require grad keep no operand links,
// so inference graphs release intermediates as soon as handles go out of
// scope.
class Node {
 public:
  std::vector<int64_t> shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until first needed; then value.size()
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> operands;
  std::function<void()> backfn;  // accumulates this->grad into operand grads

  int64_t size() const { return static_cast<int64_t>(value.size()); }
  void EnsureGrad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

// Lightweight handle; copies share the node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  // Fresh zero-valued leaf.  Parameters use requires_grad = true.
  static Tensor Leaf(std::vector<int64_t> shape, bool requires_grad);
  // Non-differentiable wrapper around existing data.
  static Tensor Constant(std::vector<double> data, std::vector<int64_t> shape);
  static Tensor Scalar(double v) { return Constant({v}, {1}); }

  bool defined() const { return node_ != nullptr; }
  Node* node() const { return node_.get(); }
  std::shared_ptr<Node> shared_node() const { return node_; }

  const std::vector<int64_t>& shape() const { return node_->shape; }
  int64_t rows() const { return node_->shape[0]; }
  int64_t cols() const { return node_->shape.size() > 1 ? node_->shape[1] : 1; }
  int64_t size() const { return node_->size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::vector<double>& value() { return node_->value; }
  const std::vector<double>& value() const { return node_->value; }
  std::vector<double>& grad() {
    node_->EnsureGrad();
    return node_->grad;
  }
  const std::vector<double>& grad() const {
    node_->EnsureGrad();
    return node_->grad;
  }

  double item() const;

 private:
  std::shared_ptr<Node> node_;
};

// While a guard is alive every op produces constant nodes: no operand links,
// no backward closures.  Used by evaluation and the separate command.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool GradEnabled();

// ---- elementwise ----
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor ScalarMul(const Tensor& a, double c);
Tensor AddScalar(const Tensor& a, double c);
Tensor Relu(const Tensor& a);
Tensor Sigmoid(const Tensor& a);
Tensor Square(const Tensor& a);
Tensor Log10(const Tensor& a);  // requires strictly positive values

// ---- linear algebra ----
// a: [m, k] row-major, b: [k, n] -> [m, n].
Tensor MatMul(const Tensor& a, const Tensor& b);
// x: [r, c], bias: [r] -> y[r][c] = x[r][c] + bias[r].
Tensor AddColBroadcast(const Tensor& x, const Tensor& bias);

// ---- shape ----
// Stack rows: a [ra, c] over b [rb, c] -> [ra + rb, c].
Tensor ConcatRows(const Tensor& a, const Tensor& b);
Tensor SumAll(const Tensor& a);   // -> [1]
Tensor MeanAll(const Tensor& a);  // -> [1]
// Zero-pad a 1-D tensor at the end to `len` (len >= size).
Tensor PadTo(const Tensor& a, int64_t len);

// ---- normalization ----
// Per-column (frame) normalization over the row (feature) axis with a
// learned per-feature affine.  x: [k, l], scale/bias: [k].
Tensor FeatureNorm(const Tensor& x, const Tensor& scale, const Tensor& bias,
                   double eps = 1e-8);

// ---- convolutional ----
// Depthwise conv along columns with odd kernel, symmetric zero padding of
// dilation * (kernel - 1) / 2 so length is preserved and a centered unit tap
// is the identity.  x: [k, l], taps: [k, kernel].
Tensor DilatedDepthwiseConv(const Tensor& x, const Tensor& taps, int64_t dilation);

// ---- framing ----
// x: [t] -> [window, l] with column j = x[j * hop .. j * hop + window).
// l = 1 + floor((t - window) / hop); requires t >= window.
Tensor Frame(const Tensor& x, int64_t window, int64_t hop);
// Inverse layout: [window, l] -> [(l - 1) * hop + window] by summation.
Tensor OverlapAdd(const Tensor& frames, int64_t hop);

// Runs reverse-mode accumulation from a scalar tensor.  Interior grads are
// recomputed from scratch on every call; leaf grads accumulate (+=) until
// the caller zeroes them, so repeated calls sum their seeds.
void Backward(const Tensor& loss, double seed = 1.0);

void ZeroGrad(const Tensor& t);

bool AllFinite(const Tensor& t);

}  // namespace mcmixit::ad

#endif  // MCMIXIT_AD_TENSOR_H_
