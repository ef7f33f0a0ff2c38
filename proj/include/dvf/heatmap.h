/*
 * Copyright 2026 The DVF Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "dvf/calib.h"
#include "dvf/rng.h"
#include "dvf/types.h"

namespace dvf {

// Dense H x W foreground confidence field, row-major, values in [0, 1].
// Pixel (i, j) is row i, column j; its center sits at (u, v) = (j, i).
class ForegroundHeatmap {
 public:
  ForegroundHeatmap() = default;
  // All-zero map. Throws kEmptyImage if either dimension is zero or negative.
  ForegroundHeatmap(int width, int height);
  // Throws kDimMismatch if values.size() != width * height, kInvalidRange if
  // any value lies outside [0, 1].
  ForegroundHeatmap(int width, int height, std::vector<float> values);

  int width() const { return width_; }
  int height() const { return height_; }
  float at(int row, int col) const { return values_[Offset(row, col)]; }
  float& at(int row, int col) { return values_[Offset(row, col)]; }
  std::span<const float> values() const { return values_; }

  bool operator==(const ForegroundHeatmap&) const = default;

 private:
  std::size_t Offset(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> values_;
};

struct ConfidenceRange {
  double a = 0.8;
  double b = 1.0;
};

// Throws kInvalidRange unless 0 <= a <= b <= 1.
void ValidateConfidenceRange(const ConfidenceRange& range);

// Pixels with v1 <= i <= v2 and u1 <= j <= u2 (integer pixel coordinates,
// after clipping to the image) take the box confidence; all others are 0.
ForegroundHeatmap MaskFromBox(const Box2D& box, int width, int height);

// Pixel-wise max. An empty list yields an all-zero map of the given size.
ForegroundHeatmap AggregateMasks(std::span<const ForegroundHeatmap> masks,
                                 int width, int height);

// Projects every box with visible_flags[n] set, draws its confidence from
// U[a, b] and max-aggregates the resulting masks. Boxes are visited in order
// and one draw is consumed per box that projects into the image.
ForegroundHeatmap TrainingMask(const CameraCalib& calib,
                               std::span<const Box3D> gt_boxes,
                               const std::vector<bool>& visible_flags,
                               const ConfidenceRange& range, RandomStream& rng);

// Max-aggregated masks of external 2D detections. Out-of-image coordinates
// are clipped, never rejected.
ForegroundHeatmap InferenceMask(std::span<const Box2D> detections, int width,
                                int height);

// Bilinear interpolation between the four surrounding pixel centers; 0 for
// (u, v) outside [0, W-1] x [0, H-1] or non-finite.
double Sample(const ForegroundHeatmap& map, double u, double v);

// Detection text: one `u1 v1 u2 v2 confidence` per line, `#` starts a comment.
// Throws kWrongFieldCount / kMalformedFloat / kInvalidRange with line context.
std::vector<Box2D> ParseDetections(std::string_view text);

}  // namespace dvf
