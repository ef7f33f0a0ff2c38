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

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dvf/augment.h"
#include "dvf/calib.h"
#include "dvf/heatmap.h"
#include "dvf/voxelgrid.h"

namespace dvf {

// One hierarchy level after weighting by image foreground confidence.
struct FusedLevel {
  int level = 0;
  int channels = 0;
  // v_f = rho * v + v, row-major like SparseVoxelLevel::features.
  std::vector<double> features;
  std::vector<double> rhos;
  std::vector<PixelPoint> pixel_locs;
  // Voxel centers in the sensor frame (after undoing any augmentation); these
  // are the points that were projected.
  std::vector<Eigen::Vector3d> centers;

  std::size_t size() const { return rhos.size(); }
  std::span<const double> feature(std::size_t n) const {
    return {features.data() + n * channels, static_cast<std::size_t>(channels)};
  }
};

// Projects every voxel center (mapped back through `applied_transform` when
// the scene was augmented), samples the heatmap and applies
// v_f = rho * v + v. Voxels behind the camera or outside the image get
// rho = 0 and keep their features unchanged.
FusedLevel FuseLevel(const SparseVoxelLevel& level, const GridConfig& config,
                     const CameraCalib& calib, const ForegroundHeatmap& map,
                     const std::optional<GlobalTransform>& applied_transform);

std::vector<FusedLevel> FuseHierarchy(
    const VoxelHierarchy& hierarchy, const CameraCalib& calib,
    const ForegroundHeatmap& map,
    const std::optional<GlobalTransform>& applied_transform);

struct LevelCorrespondence {
  int level = 0;
  std::size_t voxels = 0;
  std::size_t in_image = 0;
  std::size_t foreground = 0;
  std::size_t background = 0;
};

struct OverlayRecord {
  int level = 0;
  double u = 0.0;
  double v = 0.0;
  double rho = 0.0;
};

struct CorrespondenceStats {
  double threshold = 0.9;
  std::vector<LevelCorrespondence> levels;
  LevelCorrespondence total;
  // In-image correspondences only, level-major in voxel order.
  std::vector<OverlayRecord> records;
};

// Counts in-image voxel/pixel correspondences per level and splits them into
// foreground (rho > threshold) and background. Throws kInvalidRange unless the
// threshold lies in [0, 1].
CorrespondenceStats CorrespondenceReport(std::span<const FusedLevel> fused,
                                         int image_width, int image_height,
                                         double foreground_threshold);

}  // namespace dvf
