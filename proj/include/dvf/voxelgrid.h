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
#include <vector>

#include <Eigen/Core>

#include "dvf/types.h"

namespace dvf {

using VoxelIndex = Eigen::Vector3i;

// Per-voxel base features produced by Voxelize: normalised point count, mean
// intensity and centroid offset from the voxel center in voxel units.
inline constexpr int kBaseFeatureChannels = 5;

struct GridConfig {
  Eigen::Vector3d range_min{0.0, -40.0, -1.0};
  Eigen::Vector3d range_max{70.0, 40.0, 3.0};
  Eigen::Vector3d resolution{0.05, 0.05, 0.1};
  int num_levels = 4;
  int dilation_radius = 1;

  // floor((max - min) / res) per axis.
  VoxelIndex BaseDims() const;
  // ceil(base / 2^level) per axis.
  VoxelIndex LevelDims(int level) const;
  // Edge lengths of a voxel at `level`.
  Eigen::Vector3d LevelResolution(int level) const;
};

// Throws kInvalidConfig if any GridConfig invariant is violated.
void ValidateGridConfig(const GridConfig& config);

// Occupied voxels of one level, sorted lexicographically by (i, j, k).
// Features are stored row-major: voxel n owns
// features[n * channels, (n + 1) * channels).
struct SparseVoxelLevel {
  int level = 0;
  VoxelIndex dims = VoxelIndex::Zero();
  int channels = kBaseFeatureChannels;
  std::vector<VoxelIndex> indices;
  std::vector<double> features;

  std::size_t size() const { return indices.size(); }
  std::span<const double> feature(std::size_t n) const {
    return {features.data() + n * channels, static_cast<std::size_t>(channels)};
  }
  std::span<double> feature(std::size_t n) {
    return {features.data() + n * channels, static_cast<std::size_t>(channels)};
  }
};

struct VoxelHierarchy {
  GridConfig config;
  std::vector<SparseVoxelLevel> levels;
};

SparseVoxelLevel Voxelize(const PointCloud& points, const GridConfig& config);

// Halves the resolution: each child maps to parent floor(idx / 2), parents
// average their children's features, then occupancy is Chebyshev-dilated by
// `dilation_radius` inside the parent grid. Dilation-created voxels copy the
// feature of the nearest (Euclidean, index space) contributing parent, ties
// going to the lexicographically smallest index. Throws kGridTooSmall if any
// axis of the input grid has fewer than 2 cells.
SparseVoxelLevel Downsample(const SparseVoxelLevel& level, int dilation_radius);

VoxelHierarchy BuildHierarchy(const PointCloud& points, const GridConfig& config);

// range_min + (idx + 0.5) * resolution * 2^level, in index order.
std::vector<Eigen::Vector3d> VoxelCenters(const SparseVoxelLevel& level,
                                          const GridConfig& config);

}  // namespace dvf
