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

#include "stancy/optim.hpp"

#include <algorithm>
#include <cmath>

#include "stancy/kernels.hpp"

namespace stancy::optim {

Adam::Adam(std::vector<ag::Tensor> params, AdamOptions options) : params_(std::move(params)), options_(options) {
  for (const auto& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k];
    auto value = p.value();
    auto grad = p.mutable_grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      double g = grad[i];
      if (options_.weight_decay != 0.0) g += options_.weight_decay * value[i];
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * g;
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      value[i] -= lr * mhat / (std::sqrt(vhat) + options_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

double global_grad_norm(const std::vector<ag::Tensor>& params) {
  double total = 0.0;
  for (const auto& p : params) {
    const auto g = p.grad();
    total += kernels::dot(g, g);
  }
  return std::sqrt(total);
}

double clip_grad_norm(const std::vector<ag::Tensor>& params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / (norm + 1e-6);
    for (auto p : params) kernels::scale(s, p.mutable_grad());
  }
  return norm;
}

}  // namespace stancy::optim
