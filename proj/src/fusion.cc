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

#include "dvf/fusion.h"

#include "dvf/error.h"

namespace dvf {

FusedLevel FuseLevel(const SparseVoxelLevel& level, const GridConfig& config,
                     const CameraCalib& calib, const ForegroundHeatmap& map,
                     const std::optional<GlobalTransform>& applied_transform) {
  FusedLevel out;
  out.level = level.level;
  out.channels = level.channels;
  out.centers = VoxelCenters(level, config);
  if (applied_transform) out.centers = InvertPoints(*applied_transform, out.centers);
  out.pixel_locs = ProjectPoints(calib, out.centers);

  out.rhos.resize(level.size(), 0.0);
  out.features.resize(level.features.size());
  for (std::size_t n = 0; n < level.size(); ++n) {
    const PixelPoint& px = out.pixel_locs[n];
    const double rho = px.in_front ? Sample(map, px.u, px.v) : 0.0;
    out.rhos[n] = rho;
    const auto v = level.feature(n);
    double* vf = out.features.data() + n * out.channels;
    for (int c = 0; c < out.channels; ++c) vf[c] = rho * v[c] + v[c];
  }
  return out;
}

std::vector<FusedLevel> FuseHierarchy(
    const VoxelHierarchy& hierarchy, const CameraCalib& calib,
    const ForegroundHeatmap& map,
    const std::optional<GlobalTransform>& applied_transform) {
  std::vector<FusedLevel> out;
  out.reserve(hierarchy.levels.size());
  for (const SparseVoxelLevel& level : hierarchy.levels) {
    out.push_back(FuseLevel(level, hierarchy.config, calib, map, applied_transform));
  }
  return out;
}

CorrespondenceStats CorrespondenceReport(std::span<const FusedLevel> fused,
                                         int image_width, int image_height,
                                         double foreground_threshold) {
  if (!(foreground_threshold >= 0.0 && foreground_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidRange, "foreground threshold must be in [0, 1]");
  }
  CorrespondenceStats stats;
  stats.threshold = foreground_threshold;
  stats.total.level = -1;
  for (const FusedLevel& level : fused) {
    LevelCorrespondence counts;
    counts.level = level.level;
    counts.voxels = level.size();
    for (std::size_t n = 0; n < level.size(); ++n) {
      const PixelPoint& px = level.pixel_locs[n];
      if (!InImage(px, image_width, image_height)) continue;
      ++counts.in_image;
      if (level.rhos[n] > foreground_threshold) {
        ++counts.foreground;
      } else {
        ++counts.background;
      }
      stats.records.push_back({level.level, px.u, px.v, level.rhos[n]});
    }
    stats.total.voxels += counts.voxels;
    stats.total.in_image += counts.in_image;
    stats.total.foreground += counts.foreground;
    stats.total.background += counts.background;
    stats.levels.push_back(counts);
  }
  return stats;
}

}  // namespace dvf
