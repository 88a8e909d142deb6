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

#include <random>

#include "dpn/tensor.hpp"

namespace dpn {

/// One draw of the image augmentation policy.
struct AugmentParams {
  bool flip = false;
  /// Integer translation in pixels, each in [-4, 4].
  int shift_rows = 0;
  int shift_cols = 0;
  /// Rotation about the image center, degrees in [-15, 15].
  double angle_deg = 0.0;

  bool is_identity() const { return !flip && shift_rows == 0 && shift_cols == 0 && angle_deg == 0.0; }
};

inline constexpr int kMaxShift = 4;
inline constexpr double kMaxRotationDeg = 15.0;

AugmentParams sample_augment(std::mt19937_64& rng);

/// Applies left-right flip, then rotation (bilinear, zero fill), then the
/// shift (zero padding) to an [H, W] or [H, W, C] image. Output stays in
/// [0, 1]. Throws ShapeError for other ranks.
Tensor augment_image(const Tensor& image, const AugmentParams& params);

/// Random augmentation; returns the image unchanged when disabled.
Tensor augment(const Tensor& image, std::mt19937_64& rng, bool enabled);

}  // namespace dpn
