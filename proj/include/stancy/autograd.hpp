/*
 * Copyright 2026 The Stancy Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

// Minimal reverse-mode automatic differentiation over row-major 2-D double
// tensors. Parameters are leaf nodes whose gradients accumulate across
// backward() calls until zero_grad(). Graph recording is per-thread and can be
// switched off with NoGradGuard for reentrant inference.
namespace stancy::ag {

struct Node {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  std::span<double> ensure_grad();
  double* row(std::size_t r) { return value.data() + r * cols; }
  const double* row(std::size_t r) const { return value.data() + r * cols; }
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor constant(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor zeros(std::size_t rows, std::size_t cols);
  static Tensor parameter(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor scalar(double v) { return constant(1, 1, {v}); }

  bool defined() const { return node_ != nullptr; }
  std::size_t rows() const { return node_->rows; }
  std::size_t cols() const { return node_->cols; }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<double> value() { return node_->value; }
  std::span<const double> value() const { return node_->value; }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->ensure_grad(); }
  double at(std::size_t r, std::size_t c) const { return node_->value[r * node_->cols + c]; }
  double item() const;

  // Seeds d(self)/d(self) = 1 and propagates into every reachable node.
  void backward();
  void zero_grad();

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// x: n×k, weight: m×k, bias: 1×m or undefined. Returns x·weightᵀ + bias.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias = {});
// a: n×k, b: m×k → a·bᵀ
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// a: n×k, b: k×m → a·b
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double c);
// Adds a fixed (non-differentiable) matrix of the same shape.
Tensor add_constant(const Tensor& a, std::span<const double> c);
Tensor softmax_rows(const Tensor& a);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);
Tensor gelu(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
// Gathers rows of `table` (V×H) → ids.size()×H.
Tensor embedding(const Tensor& table, std::span<const int> ids);
Tensor row(const Tensor& x, std::size_t r);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor sum(const Tensor& x);
Tensor mean(const std::vector<Tensor>& scalars);
// 1×n, 1×n → 1×1 cosine similarity clamped to [-1, 1]; the norm product is
// floored at `floor`. Throws NumericalError on an exactly zero-norm input.
Tensor cosine(const Tensor& a, const Tensor& b, double floor = 1e-8);
// logits: 1×K → −log softmax(logits)[gold]
Tensor cross_entropy_logits(const Tensor& logits, std::size_t gold);
// Same values, no gradient path.
Tensor detach(const Tensor& x);

}  // namespace stancy::ag
