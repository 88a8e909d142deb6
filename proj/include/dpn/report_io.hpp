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

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dpn/attacks.hpp"

namespace dpn {

/// One line of an attack batch manifest.
struct AttackRecord {
  std::size_t index = 0;
  int target_class = -1;
  double epsilon = 0.0;
  Norm norm = Norm::kLinf;
  double achieved_delta = 0.0;
  bool success = false;

  friend bool operator==(const AttackRecord&, const AttackRecord&) = default;
};

AttackRecord to_record(std::size_t index, const AttackResult& result);

/// JSON lines: {"index", "target_class", "epsilon", "norm", "achieved_delta", "success"}.
std::string encode_attack_manifest(std::span<const AttackRecord> records);
std::vector<AttackRecord> decode_attack_manifest(std::string_view text);

/// Lower-case hex SHA-256 of a byte string or a file.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

/// Record of one CLI invocation: the command, its resolved settings and the
/// digest of every artifact it wrote.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> settings;
  /// Resolved training configuration text, empty when not applicable.
  std::string config;
  /// Artifact file name (relative to the output directory) -> SHA-256.
  std::map<std::string, std::string> artifacts;

  std::string to_json() const;
  static RunManifest from_json(std::string_view text);
};

/// Exclusive advisory lock on an output directory, released on destruction
/// (and by the kernel if the process dies).
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace dpn
