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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dpn {

enum class OodSourceKind { kNone, kDataset, kFgsmAdv };

/// Where the out-of-domain half of the joint loss comes from.
struct OodSource {
  OodSourceKind kind = OodSourceKind::kNone;
  /// Dataset name when kind == kDataset.
  std::string dataset;

  static OodSource none() { return {}; }
  static OodSource named(std::string name) { return {OodSourceKind::kDataset, std::move(name)}; }
  static OodSource fgsm_adv() { return {OodSourceKind::kFgsmAdv, {}}; }

  friend bool operator==(const OodSource&, const OodSource&) = default;
};

/// Text form: "none", "fgsm_adv" or "dataset:<name>".
std::string format_ood_source(const OodSource& source);
OodSource parse_ood_source(std::string_view text);

struct TrainConfig {
  double eta0 = 1e-3;
  int epochs = 20;
  int cycle_length = 10;
  /// Probability of keeping a unit.
  double dropout_keep = 1.0;
  double gamma = 0.0;
  double beta_in = 100.0;
  double beta_adv = 1.0;
  OodSource ood_source;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  std::size_t hidden_width = 128;
  std::size_t hidden_layers = 2;
  bool augment = false;

  /// Throws FormatError describing the first violated constraint.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Config files are flat "key = value" lines; '#' starts a comment. Keys are
// exactly the TrainConfig field names. Unknown or repeated keys are errors;
// omitted keys keep their defaults.
TrainConfig parse_train_config(std::string_view text);
std::string format_train_config(const TrainConfig& cfg);
TrainConfig load_train_config(const std::filesystem::path& path);

/// Splits key-value text into ordered (key, value) pairs. Shared by the
/// other flat config formats.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

/// One row of the published training-configuration table.
struct TrainingTableRow {
  std::string dataset;
  std::string model;
  TrainConfig config;
};

std::vector<TrainingTableRow> training_table();

struct DatasetInfo {
  std::string name;
  std::size_t train;
  std::size_t valid;
  std::size_t test;
  std::size_t classes;
};

std::vector<DatasetInfo> dataset_table();

}  // namespace dpn
