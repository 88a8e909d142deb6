// Copyright 2026 The dpn-toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dpn/tensor.hpp"

namespace dpn {

using ParameterSet = std::map<std::string, Tensor, std::less<>>;

// Checkpoint layout, little-endian throughout:
//   "DPN1"                 4 bytes magic
//   version                u32 (currently 1)
//   parameter count        u32
//   per parameter, in name order:
//     name length          u32
//     name                 UTF-8 bytes
//     rank                 u32
//     dims                 rank x u32
//     payload              row-major f64

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const ParameterSet& params);
ParameterSet decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params);
ParameterSet load_checkpoint(const std::filesystem::path& path);

}  // namespace dpn
