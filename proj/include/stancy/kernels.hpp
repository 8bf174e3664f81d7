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
#include <span>
#include <string_view>

// Dense double-precision primitives used by every tensor op. Each ISA
// provides one KernelTable; the active table is chosen once at startup from
// CPU features and can be forced with STANCY_SIMD=scalar|avx2|neon.
namespace stancy::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  Isa isa;
  const char* name;
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // x *= a
  void (*scale)(double a, double* x, std::size_t n);
  // out = x + y
  void (*add)(const double* x, const double* y, double* out, std::size_t n);
  // out = x * y (elementwise)
  void (*mul)(const double* x, const double* y, double* out, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* avx2_table();
const KernelTable* neon_table();

const KernelTable& active();
// Returns false (and leaves the active table unchanged) if `isa` is unavailable.
bool set_active(Isa isa);
bool set_active(std::string_view name);

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline void scale(double a, std::span<double> x) { active().scale(a, x.data(), x.size()); }
inline void add(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  active().add(x.data(), y.data(), out.data(), x.size());
}
inline void mul(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  active().mul(x.data(), y.data(), out.data(), x.size());
}
inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

}  // namespace stancy::kernels
