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

#include "stancy/safetensors.hpp"

#include <bit>
#include <cstdint>
#include <cmath>
#include <cstring>
#include <limits>

#include "json.hpp"
#include "stancy/errors.hpp"
#include "stancy/io.hpp"

namespace stancy::safetensors {
namespace {

static_assert(std::endian::native == std::endian::little, "safetensors I/O assumes a little-endian host");

double half_to_double(std::uint16_t h) {
  const std::uint32_t sign = (h >> 15) & 1u;
  const std::uint32_t exp = (h >> 10) & 0x1Fu;
  const std::uint32_t mant = h & 0x3FFu;
  double v;
  if (exp == 0) {
    v = std::ldexp(static_cast<double>(mant), -24);
  } else if (exp == 31) {
    v = mant ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
  } else {
    v = std::ldexp(static_cast<double>(mant | 0x400u), static_cast<int>(exp) - 25);
  }
  return sign ? -v : v;
}

}  // namespace

TensorMap load(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  if (bytes.size() < 8) throw CheckpointError(path.string() + ": truncated safetensors file");
  std::uint64_t header_len = 0;
  std::memcpy(&header_len, bytes.data(), 8);
  if (header_len > bytes.size() - 8) throw CheckpointError(path.string() + ": header length exceeds file size");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path.string() + ": malformed header: " + e.what());
  }
  const char* data = bytes.data() + 8 + header_len;
  const std::size_t data_len = bytes.size() - 8 - header_len;

  TensorMap out;
  for (auto it = header.begin(); it != header.end(); ++it) {
    if (it.key() == "__metadata__") continue;
    const auto& info = it.value();
    TensorData t;
    t.shape = info.at("shape").get<std::vector<std::size_t>>();
    const auto offsets = info.at("data_offsets").get<std::vector<std::size_t>>();
    if (offsets.size() != 2 || offsets[0] > offsets[1] || offsets[1] > data_len) {
      throw CheckpointError(path.string() + ": bad data_offsets for " + it.key());
    }
    std::size_t count = 1;
    for (auto d : t.shape) count *= d;
    const std::string dtype = info.at("dtype").get<std::string>();
    const char* src = data + offsets[0];
    const std::size_t nbytes = offsets[1] - offsets[0];
    t.values.resize(count);
    auto expect = [&](std::size_t width) {
      if (nbytes != count * width) throw CheckpointError(path.string() + ": size mismatch for " + it.key());
    };
    if (dtype == "F64") {
      expect(8);
      std::memcpy(t.values.data(), src, nbytes);
    } else if (dtype == "F32") {
      expect(4);
      for (std::size_t i = 0; i < count; ++i) {
        float f;
        std::memcpy(&f, src + 4 * i, 4);
        t.values[i] = f;
      }
    } else if (dtype == "F16" || dtype == "BF16") {
      expect(2);
      for (std::size_t i = 0; i < count; ++i) {
        std::uint16_t h;
        std::memcpy(&h, src + 2 * i, 2);
        if (dtype == "F16") {
          t.values[i] = half_to_double(h);
        } else {
          const std::uint32_t w = static_cast<std::uint32_t>(h) << 16;
          float f;
          std::memcpy(&f, &w, 4);
          t.values[i] = f;
        }
      }
    } else {
      throw CheckpointError(path.string() + ": unsupported dtype " + dtype + " for " + it.key());
    }
    out.emplace(it.key(), std::move(t));
  }
  return out;
}

void save(const std::filesystem::path& path, const TensorMap& tensors,
          const std::map<std::string, std::string>& metadata) {
  nlohmann::json header = nlohmann::json::object();
  std::size_t offset = 0;
  for (const auto& [name, t] : tensors) {
    const std::size_t nbytes = t.values.size() * sizeof(double);
    header[name] = {{"dtype", "F64"}, {"shape", t.shape}, {"data_offsets", {offset, offset + nbytes}}};
    offset += nbytes;
  }
  if (!metadata.empty()) header["__metadata__"] = metadata;
  std::string head = header.dump();
  // Pad so tensor data starts 8-byte aligned.
  while ((head.size() + 8) % 8 != 0) head.push_back(' ');
  std::string buf;
  buf.reserve(8 + head.size() + offset);
  const std::uint64_t len = head.size();
  buf.append(reinterpret_cast<const char*>(&len), 8);
  buf += head;
  for (const auto& [name, t] : tensors) {
    buf.append(reinterpret_cast<const char*>(t.values.data()), t.values.size() * sizeof(double));
  }
  io::write_file_atomic(path, buf);
}

}  // namespace stancy::safetensors
