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
#include <vector>

#include "stancy/autograd.hpp"

namespace stancy::optim {

struct AdamOptions {
  double learning_rate = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

class Adam {
 public:
  Adam(std::vector<ag::Tensor> params, AdamOptions options);

  // Applies one update from the accumulated gradients at learning rate `lr`.
  void step(double lr);
  void step() { step(options_.learning_rate); }
  void zero_grad();
  std::size_t steps() const { return t_; }
  const AdamOptions& options() const { return options_; }

 private:
  std::vector<ag::Tensor> params_;
  AdamOptions options_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

double global_grad_norm(const std::vector<ag::Tensor>& params);
// Rescales gradients so their global L2 norm is at most `max_norm`; returns the
// pre-clip norm. max_norm <= 0 disables clipping.
double clip_grad_norm(const std::vector<ag::Tensor>& params, double max_norm);

}  // namespace stancy::optim
