// src/ad/tensor.cc

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

#include "mcmixit/ad/tensor.h"

#include <Eigen/Dense>

#include <cmath>
#include <unordered_set>
#include <utility>

namespace mcmixit::ad {

namespace {

thread_local bool g_grad_enabled = true;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

std::shared_ptr<Node> MakeNode(std::vector<int64_t> shape, std::vector<double> value,
                               std::vector<std::shared_ptr<Node>> operands) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  bool rg = false;
  if (g_grad_enabled) {
    for (const auto& p : operands) rg = rg || p->requires_grad;
  }
  n->requires_grad = rg;
  if (rg) n->operands = std::move(operands);
  return n;
}

void CheckDefined(const Tensor& t, const char* op) {
  if (!t.defined()) throw AutodiffError(std::string(op) + ": undefined tensor");
}

void CheckSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) throw AutodiffError(std::string(op) + ": shape mismatch");
}

}  // namespace

Tensor Tensor::Leaf(std::vector<int64_t> shape, bool requires_grad) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d <= 0) throw AutodiffError("leaf: non-positive dimension");
    n *= d;
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value.assign(static_cast<size_t>(n), 0.0);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::Constant(std::vector<double> data, std::vector<int64_t> shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  if (n != static_cast<int64_t>(data.size())) {
    throw AutodiffError("constant: data does not match shape");
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = false;
  return Tensor(std::move(node));
}

double Tensor::item() const {
  if (!node_ || node_->size() != 1) throw AutodiffError("item: tensor is not a scalar");
  return node_->value[0];
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool GradEnabled() { return g_grad_enabled; }

Tensor Add(const Tensor& a, const Tensor& b) {
  CheckDefined(a, "add");
  CheckDefined(b, "add");
  CheckSameShape(a, b, "add");
  std::vector<double> out(a.value());
  const auto& bv = b.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  auto n = MakeNode(a.shape(), std::move(out), {a.shared_node(), b.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    Node* pb = b.node();
    n->backfn = [self, pa, pb]() {
      self->EnsureGrad();
      if (pa->requires_grad) {
        pa->EnsureGrad();
        for (size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
      }
      if (pb->requires_grad) {
        pb->EnsureGrad();
        for (size_t i = 0; i < self->grad.size(); ++i) pb->grad[i] += self->grad[i];
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  CheckDefined(a, "sub");
  CheckDefined(b, "sub");
  CheckSameShape(a, b, "sub");
  std::vector<double> out(a.value());
  const auto& bv = b.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  auto n = MakeNode(a.shape(), std::move(out), {a.shared_node(), b.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    Node* pb = b.node();
    n->backfn = [self, pa, pb]() {
      self->EnsureGrad();
      if (pa->requires_grad) {
        pa->EnsureGrad();
        for (size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
      }
      if (pb->requires_grad) {
        pb->EnsureGrad();
        for (size_t i = 0; i < self->grad.size(); ++i) pb->grad[i] -= self->grad[i];
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  CheckDefined(a, "mul");
  CheckDefined(b, "mul");
  CheckSameShape(a, b, "mul");
  std::vector<double> out(a.value());
  const auto& bv = b.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  auto n = MakeNode(a.shape(), std::move(out), {a.shared_node(), b.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    Node* pb = b.node();
    n->backfn = [self, pa, pb]() {
      self->EnsureGrad();
      if (pa->requires_grad) {
        pa->EnsureGrad();
        for (size_t i = 0; i < self->grad.size(); ++i) {
          pa->grad[i] += self->grad[i] * pb->value[i];
        }
      }
      if (pb->requires_grad) {
        pb->EnsureGrad();
        for (size_t i = 0; i < self->grad.size(); ++i) {
          pb->grad[i] += self->grad[i] * pa->value[i];
        }
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor ScalarMul(const Tensor& a, double c) {
  CheckDefined(a, "scalar_mul");
  std::vector<double> out(a.value());
  for (auto& x : out) x *= c;
  auto n = MakeNode(a.shape(), std::move(out), {a.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    n->backfn = [self, pa, c]() {
      self->EnsureGrad();
      pa->EnsureGrad();
      for (size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += c * self->grad[i];
    };
  }
  return Tensor(std::move(n));
}

Tensor AddScalar(const Tensor& a, double c) {
  CheckDefined(a, "add_scalar");
  std::vector<double> out(a.value());
  for (auto& x : out) x += c;
  auto n = MakeNode(a.shape(), std::move(out), {a.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    n->backfn = [self, pa]() {
      self->EnsureGrad();
      pa->EnsureGrad();
      for (size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
    };
  }
  return Tensor(std::move(n));
}

Tensor Relu(const Tensor& a) {
  CheckDefined(a, "relu");
  std::vector<double> out(a.value());
  for (auto& x : out) x = x > 0.0 ? x : 0.0;
  auto n = MakeNode(a.shape(), std::move(out), {a.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    n->backfn = [self, pa]() {
      self->EnsureGrad();
      pa->EnsureGrad();
      for (size_t i = 0; i < self->grad.size(); ++i) {
        if (pa->value[i] > 0.0) pa->grad[i] += self->grad[i];
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor Sigmoid(const Tensor& a) {
  CheckDefined(a, "sigmoid");
  std::vector<double> out(a.value());
  for (auto& x : out) x = 1.0 / (1.0 + std::exp(-x));
  auto n = MakeNode(a.shape(), std::move(out), {a.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    n->backfn = [self, pa]() {
      self->EnsureGrad();
      pa->EnsureGrad();
      for (size_t i = 0; i < self->grad.size(); ++i) {
        const double y = self->value[i];
        pa->grad[i] += self->grad[i] * y * (1.0 - y);
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor Square(const Tensor& a) {
  CheckDefined(a, "square");
  std::vector<double> out(a.value());
  for (auto& x : out) x *= x;
  auto n = MakeNode(a.shape(), std::move(out), {a.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    n->backfn = [self, pa]() {
      self->EnsureGrad();
      pa->EnsureGrad();
      for (size_t i = 0; i < self->grad.size(); ++i) {
        pa->grad[i] += 2.0 * pa->value[i] * self->grad[i];
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor Log10(const Tensor& a) {
  CheckDefined(a, "log10");
  std::vector<double> out(a.value());
  for (auto& x : out) {
    if (!(x > 0.0)) throw AutodiffError("log10: non-positive input");
    x = std::log10(x);
  }
  auto n = MakeNode(a.shape(), std::move(out), {a.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    const double inv_ln10 = 1.0 / std::log(10.0);
    n->backfn = [self, pa, inv_ln10]() {
      self->EnsureGrad();
      pa->EnsureGrad();
      for (size_t i = 0; i < self->grad.size(); ++i) {
        pa->grad[i] += self->grad[i] * inv_ln10 / pa->value[i];
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  CheckDefined(a, "matmul");
  CheckDefined(b, "matmul");
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[1] != b.shape()[0]) {
    throw AutodiffError("matmul: incompatible shapes");
  }
  const int64_t m = a.shape()[0];
  const int64_t k = a.shape()[1];
  const int64_t p = b.shape()[1];
  std::vector<double> out(static_cast<size_t>(m * p));
  {
    ConstMap ma(a.value().data(), m, k);
    ConstMap mb(b.value().data(), k, p);
    MutMap mo(out.data(), m, p);
    mo.noalias() = ma * mb;
  }
  auto n = MakeNode({m, p}, std::move(out), {a.shared_node(), b.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    Node* pb = b.node();
    n->backfn = [self, pa, pb, m, k, p]() {
      self->EnsureGrad();
      ConstMap g(self->grad.data(), m, p);
      if (pa->requires_grad) {
        pa->EnsureGrad();
        ConstMap mb(pb->value.data(), k, p);
        MutMap ga(pa->grad.data(), m, k);
        ga.noalias() += g * mb.transpose();
      }
      if (pb->requires_grad) {
        pb->EnsureGrad();
        ConstMap ma(pa->value.data(), m, k);
        MutMap gb(pb->grad.data(), k, p);
        gb.noalias() += ma.transpose() * g;
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor AddColBroadcast(const Tensor& x, const Tensor& bias) {
  CheckDefined(x, "add_col_broadcast");
  CheckDefined(bias, "add_col_broadcast");
  if (x.shape().size() != 2 || bias.size() != x.shape()[0]) {
    throw AutodiffError("add_col_broadcast: bias does not match rows");
  }
  const int64_t r = x.shape()[0];
  const int64_t c = x.shape()[1];
  std::vector<double> out(x.value());
  const auto& bv = bias.value();
  for (int64_t i = 0; i < r; ++i) {
    for (int64_t j = 0; j < c; ++j) out[static_cast<size_t>(i * c + j)] += bv[static_cast<size_t>(i)];
  }
  auto n = MakeNode(x.shape(), std::move(out), {x.shared_node(), bias.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* px = x.node();
    Node* pb = bias.node();
    n->backfn = [self, px, pb, r, c]() {
      self->EnsureGrad();
      if (px->requires_grad) {
        px->EnsureGrad();
        for (size_t i = 0; i < self->grad.size(); ++i) px->grad[i] += self->grad[i];
      }
      if (pb->requires_grad) {
        pb->EnsureGrad();
        for (int64_t i = 0; i < r; ++i) {
          double acc = 0.0;
          for (int64_t j = 0; j < c; ++j) acc += self->grad[static_cast<size_t>(i * c + j)];
          pb->grad[static_cast<size_t>(i)] += acc;
        }
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor ConcatRows(const Tensor& a, const Tensor& b) {
  CheckDefined(a, "concat_rows");
  CheckDefined(b, "concat_rows");
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[1] != b.shape()[1]) {
    throw AutodiffError("concat_rows: column mismatch");
  }
  const int64_t ra = a.shape()[0];
  const int64_t rb = b.shape()[0];
  const int64_t c = a.shape()[1];
  std::vector<double> out;
  out.reserve(static_cast<size_t>((ra + rb) * c));
  out.insert(out.end(), a.value().begin(), a.value().end());
  out.insert(out.end(), b.value().begin(), b.value().end());
  auto n = MakeNode({ra + rb, c}, std::move(out), {a.shared_node(), b.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    Node* pb = b.node();
    const size_t na = static_cast<size_t>(ra * c);
    n->backfn = [self, pa, pb, na]() {
      self->EnsureGrad();
      if (pa->requires_grad) {
        pa->EnsureGrad();
        for (size_t i = 0; i < na; ++i) pa->grad[i] += self->grad[i];
      }
      if (pb->requires_grad) {
        pb->EnsureGrad();
        for (size_t i = na; i < self->grad.size(); ++i) pb->grad[i - na] += self->grad[i];
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor SumAll(const Tensor& a) {
  CheckDefined(a, "sum");
  double acc = 0.0;
  for (double x : a.value()) acc += x;
  auto n = MakeNode({1}, {acc}, {a.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    n->backfn = [self, pa]() {
      self->EnsureGrad();
      pa->EnsureGrad();
      const double g = self->grad[0];
      for (auto& x : pa->grad) x += g;
    };
  }
  return Tensor(std::move(n));
}

Tensor MeanAll(const Tensor& a) {
  CheckDefined(a, "mean");
  const double inv = 1.0 / static_cast<double>(a.size());
  double acc = 0.0;
  for (double x : a.value()) acc += x;
  auto n = MakeNode({1}, {acc * inv}, {a.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    n->backfn = [self, pa, inv]() {
      self->EnsureGrad();
      pa->EnsureGrad();
      const double g = self->grad[0] * inv;
      for (auto& x : pa->grad) x += g;
    };
  }
  return Tensor(std::move(n));
}

Tensor PadTo(const Tensor& a, int64_t len) {
  CheckDefined(a, "pad_to");
  if (a.shape().size() != 1 || len < a.size()) throw AutodiffError("pad_to: bad length");
  std::vector<double> out(static_cast<size_t>(len), 0.0);
  std::copy(a.value().begin(), a.value().end(), out.begin());
  auto n = MakeNode({len}, std::move(out), {a.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pa = a.node();
    n->backfn = [self, pa]() {
      self->EnsureGrad();
      pa->EnsureGrad();
      for (size_t i = 0; i < pa->grad.size(); ++i) pa->grad[i] += self->grad[i];
    };
  }
  return Tensor(std::move(n));
}

Tensor FeatureNorm(const Tensor& x, const Tensor& scale, const Tensor& bias, double eps) {
  CheckDefined(x, "feature_norm");
  CheckDefined(scale, "feature_norm");
  CheckDefined(bias, "feature_norm");
  if (x.shape().size() != 2 || scale.size() != x.shape()[0] || bias.size() != x.shape()[0]) {
    throw AutodiffError("feature_norm: affine does not match feature rows");
  }
  const int64_t k = x.shape()[0];
  const int64_t l = x.shape()[1];
  const auto& xv = x.value();
  const auto& gv = scale.value();
  const auto& bv = bias.value();
  // Kept for backward; sized K*L and L.
  auto xhat = std::make_shared<std::vector<double>>(static_cast<size_t>(k * l));
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<size_t>(l));
  std::vector<double> out(static_cast<size_t>(k * l));
  for (int64_t j = 0; j < l; ++j) {
    double mu = 0.0;
    for (int64_t i = 0; i < k; ++i) mu += xv[static_cast<size_t>(i * l + j)];
    mu /= static_cast<double>(k);
    double var = 0.0;
    for (int64_t i = 0; i < k; ++i) {
      const double d = xv[static_cast<size_t>(i * l + j)] - mu;
      var += d * d;
    }
    var /= static_cast<double>(k);
    const double s = 1.0 / std::sqrt(var + eps);
    (*inv_std)[static_cast<size_t>(j)] = s;
    for (int64_t i = 0; i < k; ++i) {
      const size_t idx = static_cast<size_t>(i * l + j);
      const double h = (xv[idx] - mu) * s;
      (*xhat)[idx] = h;
      out[idx] = gv[static_cast<size_t>(i)] * h + bv[static_cast<size_t>(i)];
    }
  }
  auto n = MakeNode(x.shape(), std::move(out),
                    {x.shared_node(), scale.shared_node(), bias.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* px = x.node();
    Node* pg = scale.node();
    Node* pb = bias.node();
    n->backfn = [self, px, pg, pb, xhat, inv_std, k, l]() {
      self->EnsureGrad();
      const auto& g = self->grad;
      if (pg->requires_grad) {
        pg->EnsureGrad();
        for (int64_t i = 0; i < k; ++i) {
          double acc = 0.0;
          for (int64_t j = 0; j < l; ++j) {
            const size_t idx = static_cast<size_t>(i * l + j);
            acc += g[idx] * (*xhat)[idx];
          }
          pg->grad[static_cast<size_t>(i)] += acc;
        }
      }
      if (pb->requires_grad) {
        pb->EnsureGrad();
        for (int64_t i = 0; i < k; ++i) {
          double acc = 0.0;
          for (int64_t j = 0; j < l; ++j) acc += g[static_cast<size_t>(i * l + j)];
          pb->grad[static_cast<size_t>(i)] += acc;
        }
      }
      if (px->requires_grad) {
        px->EnsureGrad();
        const auto& gv = pg->value;
        for (int64_t j = 0; j < l; ++j) {
          double m1 = 0.0;
          double m2 = 0.0;
          for (int64_t i = 0; i < k; ++i) {
            const size_t idx = static_cast<size_t>(i * l + j);
            const double dh = g[idx] * gv[static_cast<size_t>(i)];
            m1 += dh;
            m2 += dh * (*xhat)[idx];
          }
          m1 /= static_cast<double>(k);
          m2 /= static_cast<double>(k);
          const double s = (*inv_std)[static_cast<size_t>(j)];
          for (int64_t i = 0; i < k; ++i) {
            const size_t idx = static_cast<size_t>(i * l + j);
            const double dh = g[idx] * gv[static_cast<size_t>(i)];
            px->grad[idx] += s * (dh - m1 - (*xhat)[idx] * m2);
          }
        }
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor DilatedDepthwiseConv(const Tensor& x, const Tensor& taps, int64_t dilation) {
  CheckDefined(x, "dilated_conv");
  CheckDefined(taps, "dilated_conv");
  if (x.shape().size() != 2 || taps.shape().size() != 2 || taps.shape()[0] != x.shape()[0]) {
    throw AutodiffError("dilated_conv: taps must have one row per channel");
  }
  const int64_t kernel = taps.shape()[1];
  if (kernel % 2 == 0 || dilation < 1) throw AutodiffError("dilated_conv: bad kernel/dilation");
  const int64_t k = x.shape()[0];
  const int64_t l = x.shape()[1];
  const int64_t pad = dilation * (kernel - 1) / 2;
  const auto& xv = x.value();
  const auto& tv = taps.value();
  std::vector<double> out(static_cast<size_t>(k * l), 0.0);
  for (int64_t i = 0; i < k; ++i) {
    for (int64_t j = 0; j < kernel; ++j) {
      const double w = tv[static_cast<size_t>(i * kernel + j)];
      if (w == 0.0) continue;
      const int64_t off = j * dilation - pad;
      const int64_t lo = std::max<int64_t>(0, -off);
      const int64_t hi = std::min<int64_t>(l, l - off);
      for (int64_t t = lo; t < hi; ++t) {
        out[static_cast<size_t>(i * l + t)] += w * xv[static_cast<size_t>(i * l + t + off)];
      }
    }
  }
  auto n = MakeNode(x.shape(), std::move(out), {x.shared_node(), taps.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* px = x.node();
    Node* pt = taps.node();
    n->backfn = [self, px, pt, k, l, kernel, dilation, pad]() {
      self->EnsureGrad();
      const auto& g = self->grad;
      if (px->requires_grad) {
        px->EnsureGrad();
        const auto& tv = pt->value;
        for (int64_t i = 0; i < k; ++i) {
          for (int64_t j = 0; j < kernel; ++j) {
            const double w = tv[static_cast<size_t>(i * kernel + j)];
            if (w == 0.0) continue;
            const int64_t off = j * dilation - pad;
            const int64_t lo = std::max<int64_t>(0, -off);
            const int64_t hi = std::min<int64_t>(l, l - off);
            for (int64_t t = lo; t < hi; ++t) {
              px->grad[static_cast<size_t>(i * l + t + off)] +=
                  w * g[static_cast<size_t>(i * l + t)];
            }
          }
        }
      }
      if (pt->requires_grad) {
        pt->EnsureGrad();
        const auto& xv = px->value;
        for (int64_t i = 0; i < k; ++i) {
          for (int64_t j = 0; j < kernel; ++j) {
            const int64_t off = j * dilation - pad;
            const int64_t lo = std::max<int64_t>(0, -off);
            const int64_t hi = std::min<int64_t>(l, l - off);
            double acc = 0.0;
            for (int64_t t = lo; t < hi; ++t) {
              acc += g[static_cast<size_t>(i * l + t)] * xv[static_cast<size_t>(i * l + t + off)];
            }
            pt->grad[static_cast<size_t>(i * kernel + j)] += acc;
          }
        }
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor Frame(const Tensor& x, int64_t window, int64_t hop) {
  CheckDefined(x, "frame");
  if (x.shape().size() != 1 || window < 1 || hop < 1 || x.size() < window) {
    throw AutodiffError("frame: signal shorter than window");
  }
  const int64_t t = x.size();
  const int64_t l = 1 + (t - window) / hop;
  const auto& xv = x.value();
  std::vector<double> out(static_cast<size_t>(window * l));
  for (int64_t w = 0; w < window; ++w) {
    for (int64_t j = 0; j < l; ++j) {
      out[static_cast<size_t>(w * l + j)] = xv[static_cast<size_t>(j * hop + w)];
    }
  }
  auto n = MakeNode({window, l}, std::move(out), {x.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* px = x.node();
    n->backfn = [self, px, window, hop, l]() {
      self->EnsureGrad();
      px->EnsureGrad();
      for (int64_t w = 0; w < window; ++w) {
        for (int64_t j = 0; j < l; ++j) {
          px->grad[static_cast<size_t>(j * hop + w)] += self->grad[static_cast<size_t>(w * l + j)];
        }
      }
    };
  }
  return Tensor(std::move(n));
}

Tensor OverlapAdd(const Tensor& frames, int64_t hop) {
  CheckDefined(frames, "overlap_add");
  if (frames.shape().size() != 2 || hop < 1) throw AutodiffError("overlap_add: bad input");
  const int64_t window = frames.shape()[0];
  const int64_t l = frames.shape()[1];
  const int64_t t = (l - 1) * hop + window;
  const auto& fv = frames.value();
  std::vector<double> out(static_cast<size_t>(t), 0.0);
  for (int64_t w = 0; w < window; ++w) {
    for (int64_t j = 0; j < l; ++j) {
      out[static_cast<size_t>(j * hop + w)] += fv[static_cast<size_t>(w * l + j)];
    }
  }
  auto n = MakeNode({t}, std::move(out), {frames.shared_node()});
  if (n->requires_grad) {
    Node* self = n.get();
    Node* pf = frames.node();
    n->backfn = [self, pf, window, hop, l]() {
      self->EnsureGrad();
      pf->EnsureGrad();
      for (int64_t w = 0; w < window; ++w) {
        for (int64_t j = 0; j < l; ++j) {
          pf->grad[static_cast<size_t>(w * l + j)] += self->grad[static_cast<size_t>(j * hop + w)];
        }
      }
    };
  }
  return Tensor(std::move(n));
}

void Backward(const Tensor& loss, double seed) {
  Node* root = loss.node();
  if (root == nullptr) throw AutodiffError("backward: undefined tensor");
  if (root->size() != 1) throw AutodiffError("backward: loss must be a scalar");
  if (!root->requires_grad) throw AutodiffError("backward: loss has no parameters");
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& top = stack.back();
    if (top.second < top.first->operands.size()) {
      Node* next = top.first->operands[top.second++].get();
      if (next->requires_grad && seen.insert(next).second) stack.emplace_back(next, 0);
    } else {
      order.push_back(top.first);
      stack.pop_back();
    }
  }
  // Interior grads are scratch space for this pass; only leaves (no backfn)
  // accumulate across calls.
  for (Node* node : order) {
    if (node->backfn) node->grad.assign(node->value.size(), 0.0);
  }
  root->EnsureGrad();
  root->grad[0] += seed;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backfn) (*it)->backfn();
  }
}

void ZeroGrad(const Tensor& t) {
  if (!t.defined()) return;
  t.node()->grad.assign(t.node()->value.size(), 0.0);
}

bool AllFinite(const Tensor& t) {
  for (double x : t.value()) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace mcmixit::ad
