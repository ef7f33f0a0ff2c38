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

#include "dvf/heatmap.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "dvf/error.h"

namespace dvf {
namespace {

void CheckDims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kEmptyImage, "heatmap size " + std::to_string(width) +
                                            "x" + std::to_string(height));
  }
}

// a + t * (b - a), kept inside [min(a, b), max(a, b)].
double Lerp(double a, double b, double t) {
  const double value = a + t * (b - a);
  return std::clamp(value, std::min(a, b), std::max(a, b));
}

}  // namespace

ForegroundHeatmap::ForegroundHeatmap(int width, int height)
    : width_(width), height_(height) {
  CheckDims(width, height);
  values_.assign(static_cast<std::size_t>(width) * height, 0.0f);
}

ForegroundHeatmap::ForegroundHeatmap(int width, int height,
                                     std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  CheckDims(width, height);
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kDimMismatch,
                "expected " + std::to_string(static_cast<std::size_t>(width) * height) +
                    " values, got " + std::to_string(values_.size()));
  }
  for (const float v : values_) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error(ErrorCode::kInvalidRange, "heatmap value outside [0, 1]");
    }
  }
}

void ValidateConfidenceRange(const ConfidenceRange& range) {
  if (!(range.a >= 0.0 && range.a <= range.b && range.b <= 1.0)) {
    throw Error(ErrorCode::kInvalidRange,
                "confidence range must satisfy 0 <= a <= b <= 1, got [" +
                    std::to_string(range.a) + ", " + std::to_string(range.b) + "]");
  }
}

ForegroundHeatmap MaskFromBox(const Box2D& box, int width, int height) {
  ForegroundHeatmap map(width, height);
  if (!(box.confidence >= 0.0 && box.confidence <= 1.0)) {
    throw Error(ErrorCode::kInvalidRange, "box confidence outside [0, 1]");
  }
  const double u1 = std::clamp(box.u1, 0.0, static_cast<double>(width));
  const double u2 = std::clamp(box.u2, 0.0, static_cast<double>(width));
  const double v1 = std::clamp(box.v1, 0.0, static_cast<double>(height));
  const double v2 = std::clamp(box.v2, 0.0, static_cast<double>(height));
  // NaN bounds fail these comparisons too.
  if (!(u2 > u1 && v2 > v1)) return map;

  const int col_begin = static_cast<int>(std::ceil(u1));
  const int col_end = std::min(static_cast<int>(std::floor(u2)), width - 1);
  const int row_begin = static_cast<int>(std::ceil(v1));
  const int row_end = std::min(static_cast<int>(std::floor(v2)), height - 1);
  const float c = static_cast<float>(box.confidence);
  for (int i = row_begin; i <= row_end; ++i) {
    for (int j = col_begin; j <= col_end; ++j) map.at(i, j) = c;
  }
  return map;
}

ForegroundHeatmap AggregateMasks(std::span<const ForegroundHeatmap> masks,
                                 int width, int height) {
  ForegroundHeatmap out(width, height);
  for (const ForegroundHeatmap& mask : masks) {
    if (mask.width() != width || mask.height() != height) {
      throw Error(ErrorCode::kDimMismatch,
                  "mask " + std::to_string(mask.width()) + "x" +
                      std::to_string(mask.height()) + " vs " +
                      std::to_string(width) + "x" + std::to_string(height));
    }
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        out.at(i, j) = std::max(out.at(i, j), mask.at(i, j));
      }
    }
  }
  return out;
}

ForegroundHeatmap TrainingMask(const CameraCalib& calib,
                               std::span<const Box3D> gt_boxes,
                               const std::vector<bool>& visible_flags,
                               const ConfidenceRange& range, RandomStream& rng) {
  if (gt_boxes.size() != visible_flags.size()) {
    throw Error(ErrorCode::kDimMismatch,
                std::to_string(gt_boxes.size()) + " boxes but " +
                    std::to_string(visible_flags.size()) + " visibility flags");
  }
  ValidateConfidenceRange(range);
  const int width = calib.image_width;
  const int height = calib.image_height;
  ForegroundHeatmap out(width, height);
  for (std::size_t n = 0; n < gt_boxes.size(); ++n) {
    if (!visible_flags[n]) continue;
    std::optional<Box2D> box = ProjectBoxToAabb(calib, gt_boxes[n]);
    if (!box) continue;
    box->confidence = rng.Uniform(range.a, range.b);
    const ForegroundHeatmap mask = MaskFromBox(*box, width, height);
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        out.at(i, j) = std::max(out.at(i, j), mask.at(i, j));
      }
    }
  }
  return out;
}

ForegroundHeatmap InferenceMask(std::span<const Box2D> detections, int width,
                                int height) {
  std::vector<ForegroundHeatmap> masks;
  masks.reserve(detections.size());
  for (const Box2D& det : detections) {
    masks.push_back(MaskFromBox(det, width, height));
  }
  return AggregateMasks(masks, width, height);
}

double Sample(const ForegroundHeatmap& map, double u, double v) {
  if (map.width() == 0 || map.height() == 0) return 0.0;
  if (!(u >= 0.0 && v >= 0.0 && u <= map.width() - 1 && v <= map.height() - 1)) {
    return 0.0;
  }
  const int j0 = static_cast<int>(std::floor(u));
  const int i0 = static_cast<int>(std::floor(v));
  const int j1 = std::min(j0 + 1, map.width() - 1);
  const int i1 = std::min(i0 + 1, map.height() - 1);
  const double fu = u - j0;
  const double fv = v - i0;
  const double top = Lerp(map.at(i0, j0), map.at(i0, j1), fu);
  const double bottom = Lerp(map.at(i1, j0), map.at(i1, j1), fu);
  return Lerp(top, bottom, fv);
}

std::vector<Box2D> ParseDetections(std::string_view text) {
  std::vector<Box2D> out;
  int line_number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::size_t stop = end == std::string_view::npos ? text.size() : end;
    std::string_view line = text.substr(pos, stop - pos);
    pos = stop + 1;
    ++line_number;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    double values[5];
    int count = 0;
    std::size_t p = 0;
    while (true) {
      p = line.find_first_not_of(" \t\r", p);
      if (p == std::string_view::npos) break;
      std::size_t q = line.find_first_of(" \t\r", p);
      if (q == std::string_view::npos) q = line.size();
      const std::string_view token = line.substr(p, q - p);
      p = q;
      if (count == 5) {
        ++count;
        break;
      }
      const auto [ptr, ec] =
          std::from_chars(token.data(), token.data() + token.size(), values[count]);
      if (ec != std::errc() || ptr != token.data() + token.size() ||
          !std::isfinite(values[count])) {
        throw Error(ErrorCode::kMalformedFloat,
                    "detections line " + std::to_string(line_number) +
                        ", field " + std::to_string(count + 1));
      }
      ++count;
    }
    if (count == 0) continue;
    if (count != 5) {
      throw Error(ErrorCode::kWrongFieldCount,
                  "detections line " + std::to_string(line_number) +
                      ": expected 5 fields");
    }
    Box2D box{values[0], values[1], values[2], values[3], values[4]};
    if (box.u1 > box.u2 || box.v1 > box.v2 || box.confidence < 0.0 ||
        box.confidence > 1.0) {
      throw Error(ErrorCode::kInvalidRange,
                  "detections line " + std::to_string(line_number) +
                      ": bounds must be ordered and confidence in [0, 1]");
    }
    out.push_back(box);
  }
  return out;
}

}  // namespace dvf
