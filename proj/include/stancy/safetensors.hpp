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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

// Reader/writer for the safetensors container (8-byte little-endian header
// length, JSON header, raw tensor bytes). Values are widened to double.
namespace stancy::safetensors {

struct TensorData {
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

using TensorMap = std::map<std::string, TensorData>;

// Accepts F64, F32, F16 and BF16 tensors.
TensorMap load(const std::filesystem::path& path);
// Writes F64 tensors (lossless for our parameters) via temp-file + rename.
void save(const std::filesystem::path& path, const TensorMap& tensors,
          const std::map<std::string, std::string>& metadata = {});

}  // namespace stancy::safetensors
