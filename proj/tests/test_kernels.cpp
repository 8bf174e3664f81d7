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
#include <vector>

#include <gtest/gtest.h>

#include "stancy/kernels.hpp"
#include "stancy/random.hpp"

namespace stancy::kernels {
namespace {

std::vector<const KernelTable*> simd_tables() {
  std::vector<const KernelTable*> out;
  if (auto* t = avx2_table()) out.push_back(t);
  if (auto* t = neon_table()) out.push_back(t);
  return out;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal(0.0, 3.0);
  return v;
}

// Lengths straddle every vector width and remainder path.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 100, 257, 1031};

double rel_close(double a, double b) { return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)}); }

TEST(Kernels, ScalarReferenceValues) {
  const auto& s = scalar_table();
  std::vector<double> x{1, 2, 3}, y{4, 5, 6}, out(3);
  EXPECT_DOUBLE_EQ(s.dot(x.data(), y.data(), 3), 32.0);
  EXPECT_DOUBLE_EQ(s.sum(x.data(), 3), 6.0);
  s.add(x.data(), y.data(), out.data(), 3);
  EXPECT_EQ(out, (std::vector<double>{5, 7, 9}));
  s.mul(x.data(), y.data(), out.data(), 3);
  EXPECT_EQ(out, (std::vector<double>{4, 10, 18}));
  s.axpy(2.0, x.data(), y.data(), 3);
  EXPECT_EQ(y, (std::vector<double>{6, 9, 12}));
  s.scale(0.5, x.data(), 3);
  EXPECT_EQ(x, (std::vector<double>{0.5, 1, 1.5}));
}

TEST(Kernels, SimdMatchesScalarOnReductions) {
  const auto& ref = scalar_table();
  for (const auto* t : simd_tables()) {
    for (std::size_t n : kLengths) {
      auto x = random_vector(n, 11 + n), y = random_vector(n, 97 + n);
      EXPECT_LT(rel_close(t->dot(x.data(), y.data(), n), ref.dot(x.data(), y.data(), n)), 1e-12) << t->name << " n=" << n;
      EXPECT_LT(rel_close(t->sum(x.data(), n), ref.sum(x.data(), n)), 1e-12) << t->name << " n=" << n;
    }
  }
}

TEST(Kernels, SimdMatchesScalarElementwiseExactly) {
  const auto& ref = scalar_table();
  for (const auto* t : simd_tables()) {
    for (std::size_t n : kLengths) {
      auto x = random_vector(n, 5 + n), y = random_vector(n, 6 + n);
      std::vector<double> a(n), b(n);
      t->add(x.data(), y.data(), a.data(), n);
      ref.add(x.data(), y.data(), b.data(), n);
      EXPECT_EQ(a, b) << t->name;
      t->mul(x.data(), y.data(), a.data(), n);
      ref.mul(x.data(), y.data(), b.data(), n);
      EXPECT_EQ(a, b) << t->name;
      auto sa = x, sb = x;
      t->scale(-1.25, sa.data(), n);
      ref.scale(-1.25, sb.data(), n);
      EXPECT_EQ(sa, sb) << t->name;
      auto ya = y, yb = y;
      t->axpy(0.75, x.data(), ya.data(), n);
      ref.axpy(0.75, x.data(), yb.data(), n);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(ya[i], yb[i], 1e-12 * std::max(1.0, std::fabs(yb[i])));
    }
  }
}

TEST(Kernels, ForcingScalarIsHonoredAndRestorable) {
  const Isa before = active().isa;
  ASSERT_TRUE(set_active(Isa::kScalar));
  EXPECT_EQ(active().isa, Isa::kScalar);
  EXPECT_TRUE(set_active("scalar"));
  EXPECT_FALSE(set_active("no-such-isa"));
  EXPECT_EQ(active().isa, Isa::kScalar);
  set_active(before);
  EXPECT_EQ(active().isa, before);
}

TEST(Kernels, UnavailableVariantIsRejected) {
  const Isa before = active().isa;
  if (!neon_table()) EXPECT_FALSE(set_active(Isa::kNeon));
  if (!avx2_table()) EXPECT_FALSE(set_active(Isa::kAvx2));
  EXPECT_EQ(active().isa, before);
}

}  // namespace
}  // namespace stancy::kernels
