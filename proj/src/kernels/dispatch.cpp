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

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "stancy/kernels.hpp"

namespace stancy::kernels {

#ifndef STANCY_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif
#ifndef STANCY_HAVE_NEON
const KernelTable* neon_table() { return nullptr; }
#endif

namespace {

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &scalar_table();
    case Isa::kAvx2:
      return avx2_table();
    case Isa::kNeon:
      return neon_table();
  }
  return nullptr;
}

const KernelTable* detect() {
  if (const char* forced = std::getenv("STANCY_SIMD")) {
    std::string_view name(forced);
    if (name == "scalar") return &scalar_table();
    if (name == "avx2" && avx2_table()) return avx2_table();
    if (name == "neon" && neon_table()) return neon_table();
  }
  if (const KernelTable* t = avx2_table()) return t;
  if (const KernelTable* t = neon_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{detect()};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool set_active(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (!t) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

bool set_active(std::string_view name) {
  if (name == "scalar") return set_active(Isa::kScalar);
  if (name == "avx2") return set_active(Isa::kAvx2);
  if (name == "neon") return set_active(Isa::kNeon);
  return false;
}

}  // namespace stancy::kernels
