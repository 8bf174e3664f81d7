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

#include <cmath>
#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "stancy/autograd.hpp"
#include "stancy/errors.hpp"
#include "stancy/random.hpp"

namespace stancy::ag {
namespace {

Tensor random_param(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(r * c);
  for (auto& x : v) x = rng.normal(0.0, 1.0);
  return Tensor::parameter(r, c, std::move(v));
}

// Central differences of `f` with respect to every entry of `p`.
void expect_gradients(Tensor p, const std::function<Tensor()>& f, double tol = 1e-6) {
  p.zero_grad();
  f().backward();
  const std::vector<double> analytic(p.grad().begin(), p.grad().end());
  const double h = 1e-6;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double orig = p.value()[i];
    p.value()[i] = orig + h;
    const double up = f().item();
    p.value()[i] = orig - h;
    const double down = f().item();
    p.value()[i] = orig;
    const double numeric = (up - down) / (2 * h);
    EXPECT_NEAR(analytic[i], numeric, tol * std::max(1.0, std::fabs(numeric))) << "entry " << i;
  }
}

TEST(Autograd, LinearMatchesHandProduct) {
  auto x = Tensor::constant(1, 2, {1, 2});
  auto w = Tensor::constant(2, 2, {3, 4, 5, 6});
  auto b = Tensor::constant(1, 2, {0.5, -0.5});
  auto y = linear(x, w, b);
  EXPECT_DOUBLE_EQ(y.at(0, 0), 11.5);
  EXPECT_DOUBLE_EQ(y.at(0, 1), 16.5);
}

TEST(Autograd, SoftmaxRowsSumToOne) {
  auto s = softmax_rows(Tensor::constant(2, 3, {1, 2, 3, -1000, 0, 1000}));
  for (std::size_t r = 0; r < 2; ++r) EXPECT_NEAR(s.at(r, 0) + s.at(r, 1) + s.at(r, 2), 1.0, 1e-12);
  EXPECT_NEAR(s.at(1, 2), 1.0, 1e-12);
}

TEST(Autograd, GradLinearAndMatmul) {
  auto x = random_param(3, 4, 1), w = random_param(5, 4, 2), b = random_param(1, 5, 3);
  auto f = [&] { return sum(mul(linear(x, w, b), linear(x, w, b))); };
  expect_gradients(x, f);
  expect_gradients(w, f);
  expect_gradients(b, f);
  auto a = random_param(3, 4, 4), c = random_param(4, 2, 5);
  auto g = [&] { return sum(tanh(matmul(a, c))); };
  expect_gradients(a, g);
  expect_gradients(c, g);
}

TEST(Autograd, GradNonlinearities) {
  auto x = random_param(2, 5, 9);
  expect_gradients(x, [&] { return sum(mul(gelu(x), x)); });
  expect_gradients(x, [&] { return sum(sigmoid(scale(x, 1.5))); });
  expect_gradients(x, [&] { return sum(mul(softmax_rows(x), x)); });
}

TEST(Autograd, GradLayerNorm) {
  auto x = random_param(3, 6, 21), g = random_param(1, 6, 22), b = random_param(1, 6, 23);
  auto w = Tensor::constant(3, 6, std::vector<double>(18, 0.3));
  auto f = [&] { return sum(mul(layer_norm(x, g, b, 1e-12), add_constant(x, w.value()))); };
  expect_gradients(x, f, 1e-5);
  expect_gradients(g, f);
  expect_gradients(b, f);
}

TEST(Autograd, GradEmbeddingSliceConcat) {
  auto table = random_param(6, 4, 31);
  const std::vector<int> ids{3, 1, 3, 0};
  auto f = [&] {
    auto e = embedding(table, ids);
    auto parts = concat_cols({slice_cols(e, 2, 2), slice_cols(e, 0, 2)});
    return sum(mul(row(parts, 2), row(e, 0)));
  };
  expect_gradients(table, f);
}

TEST(Autograd, GradCosineAndCrossEntropy) {
  auto a = random_param(1, 5, 41), b = random_param(1, 5, 42);
  expect_gradients(a, [&] { return cosine(a, b); });
  expect_gradients(b, [&] { return cosine(a, b); });
  auto logits = random_param(1, 2, 43);
  expect_gradients(logits, [&] { return cross_entropy_logits(logits, 1); });
}

TEST(Autograd, CosineOfZeroVectorThrows) {
  auto a = Tensor::constant(1, 3, {0, 0, 0});
  auto b = Tensor::constant(1, 3, {1, 2, 3});
  EXPECT_THROW(cosine(a, b), NumericalError);
}

TEST(Autograd, CrossEntropyClosedForm) {
  auto l = cross_entropy_logits(Tensor::constant(1, 2, {0.0, 0.0}), 0);
  EXPECT_NEAR(l.item(), std::log(2.0), 1e-12);
  auto l2 = cross_entropy_logits(Tensor::constant(1, 2, {std::log(0.9), std::log(0.1)}), 1);
  EXPECT_NEAR(l2.item(), -std::log(0.1), 1e-12);
}

TEST(Autograd, LeafGradientsAccumulateUntilZeroed) {
  auto p = Tensor::parameter(1, 1, {2.0});
  scale(p, 3.0).backward();
  scale(p, 3.0).backward();
  EXPECT_DOUBLE_EQ(p.grad()[0], 6.0);
  p.zero_grad();
  EXPECT_DOUBLE_EQ(p.grad()[0], 0.0);
}

TEST(Autograd, SharedSubgraphGetsBothContributions) {
  auto p = Tensor::parameter(1, 1, {1.5});
  auto q = mul(p, p);
  add(q, scale(q, 2.0)).backward();  // 3 p^2
  EXPECT_DOUBLE_EQ(p.grad()[0], 9.0);
}

TEST(Autograd, NoGradGuardStopsRecording) {
  auto p = Tensor::parameter(1, 2, {1, 2});
  {
    NoGradGuard g;
    EXPECT_FALSE(grad_enabled());
    auto y = scale(p, 2.0);
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_TRUE(grad_enabled());
  EXPECT_TRUE(scale(p, 2.0).requires_grad());
}

TEST(Autograd, DetachBlocksGradient) {
  auto p = Tensor::parameter(1, 1, {2.0});
  add(mul(p, detach(p)), p).backward();  // d/dp (p * c + p) = c + 1
  EXPECT_DOUBLE_EQ(p.grad()[0], 3.0);
}

}  // namespace
}  // namespace stancy::ag
