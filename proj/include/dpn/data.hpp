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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "dpn/tensor.hpp"

namespace dpn {

/// Feature rows [N, D] with one label per row. Empty when N == 0.
struct LabeledSet {
  Tensor x;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  LabeledSet subset(std::span<const std::size_t> indices) const;
};

struct DatasetSplit {
  LabeledSet train;
  LabeledSet valid;
  LabeledSet test;
  std::size_t num_classes = 0;
  /// Shape of one example before flattening, e.g. {28, 28}; {D} for tabular data.
  Shape sample_shape;

  std::size_t input_dim() const { return shape_size(sample_shape); }
  /// Throws FormatError on label range or width inconsistencies.
  void validate() const;
};

// ---- synthetic data --------------------------------------------------------

/// Gaussian blobs in the plane plus a ring of out-of-domain points.
///
/// The first two coordinates carry the blobs and the ring; any further
/// coordinates up to ambient_dim are filled with pad_value + N(0, pad_sigma)
/// so that the data sits on a thin slab inside a higher-dimensional box.
struct SyntheticSpec {
  std::size_t num_classes = 3;
  std::size_t points_per_class = 500;
  std::size_t valid_per_class = 100;
  std::size_t test_per_class = 200;
  std::size_t ood_points = 300;
  std::vector<std::array<double, 2>> means;
  /// Standard deviation of every blob along each axis.
  double cov_scale = 0.05;
  double ood_ring_radius = 0.45;
  std::array<double, 2> center = {0.0, 0.0};
  std::size_t ambient_dim = 2;
  double pad_value = 0.5;
  double pad_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Three blobs around (0.5, 0.5) inside the unit box, padded to 10 dims.
  static SyntheticSpec three_class_default();
};

struct SyntheticData {
  DatasetSplit split;
  /// Ring points, shape [ood_points, ambient_dim].
  Tensor ood;
};

SyntheticData gen_synthetic(const SyntheticSpec& spec);

SyntheticSpec parse_synthetic_spec(std::string_view text);
std::string format_synthetic_spec(const SyntheticSpec& spec);

// ---- IDX -------------------------------------------------------------------

/// Images file (magic 0x00000803) as [N, rows, cols] scaled to [0, 1].
Tensor load_idx_images(const std::filesystem::path& path);
/// Labels file (magic 0x00000801).
std::vector<int> load_idx_labels(const std::filesystem::path& path);
/// Both files, flattened to [N, rows * cols]; counts must agree.
LabeledSet load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                    Shape* sample_shape = nullptr);

Tensor decode_idx_images(std::span<const std::uint8_t> bytes);
std::vector<int> decode_idx_labels(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_idx_images(std::span<const std::uint8_t> pixels, std::uint32_t count,
                                            std::uint32_t rows, std::uint32_t cols);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);

// ---- CSV -------------------------------------------------------------------

/// Header "x0,...,x{D-1},label" followed by one row per example.
void write_csv_dataset(const std::filesystem::path& path, const LabeledSet& set);
LabeledSet read_csv_dataset(const std::filesystem::path& path);
/// Feature-only CSV (header x0..x{D-1}).
void write_csv_features(const std::filesystem::path& path, const Tensor& x);
Tensor read_csv_features(const std::filesystem::path& path);

}  // namespace dpn
