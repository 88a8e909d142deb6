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

#include "dpn/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dpn/error.hpp"

namespace dpn {

AugmentParams sample_augment(std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> shift(-kMaxShift, kMaxShift);
  std::uniform_real_distribution<double> angle(-kMaxRotationDeg, kMaxRotationDeg);
  AugmentParams p;
  p.flip = coin(rng);
  p.shift_rows = shift(rng);
  p.shift_cols = shift(rng);
  p.angle_deg = angle(rng);
  return p;
}

Tensor augment_image(const Tensor& image, const AugmentParams& params) {
  if (image.rank() != 2 && image.rank() != 3) {
    throw ShapeError("augment expects an [H, W] or [H, W, C] image, got " +
                     shape_string(image.shape()));
  }
  if (params.is_identity()) return image;
  const std::size_t h = image.dim(0);
  const std::size_t w = image.dim(1);
  const std::size_t c = image.rank() == 3 ? image.dim(2) : 1;
  const auto src = image.data();
  auto at = [&](std::ptrdiff_t r, std::ptrdiff_t col, std::size_t ch) -> double {
    if (r < 0 || col < 0 || r >= static_cast<std::ptrdiff_t>(h) || col >= static_cast<std::ptrdiff_t>(w)) {
      return 0.0;
    }
    const auto cc = params.flip ? static_cast<std::ptrdiff_t>(w) - 1 - col : col;
    return src[(static_cast<std::size_t>(r) * w + static_cast<std::size_t>(cc)) * c + ch];
  };

  const double theta = params.angle_deg * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double cy = (static_cast<double>(h) - 1.0) / 2.0;
  const double cx = (static_cast<double>(w) - 1.0) / 2.0;

  Tensor out(image.shape(), 0.0);
  auto dst = out.data();
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t col = 0; col < w; ++col) {
      // Undo the shift, then the rotation, to find the source location.
      const double yr = static_cast<double>(r) - params.shift_rows - cy;
      const double xr = static_cast<double>(col) - params.shift_cols - cx;
      const double sy = cos_t * yr + sin_t * xr + cy;
      const double sx = -sin_t * yr + cos_t * xr + cx;
      const double fy = std::floor(sy);
      const double fx = std::floor(sx);
      const double dy = sy - fy;
      const double dx = sx - fx;
      const auto y0 = static_cast<std::ptrdiff_t>(fy);
      const auto x0 = static_cast<std::ptrdiff_t>(fx);
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double v = (1 - dy) * ((1 - dx) * at(y0, x0, ch) + dx * at(y0, x0 + 1, ch)) +
                         dy * ((1 - dx) * at(y0 + 1, x0, ch) + dx * at(y0 + 1, x0 + 1, ch));
        dst[(r * w + col) * c + ch] = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

Tensor augment(const Tensor& image, std::mt19937_64& rng, bool enabled) {
  if (image.rank() != 2 && image.rank() != 3) {
    throw ShapeError("augment expects an [H, W] or [H, W, C] image, got " +
                     shape_string(image.shape()));
  }
  if (!enabled) return image;
  return augment_image(image, sample_augment(rng));
}

}  // namespace dpn
