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

#include "dvf/voxelgrid.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "dvf/error.h"

namespace dvf {
namespace {

std::int64_t Linear(const VoxelIndex& idx, const VoxelIndex& dims) {
  return (static_cast<std::int64_t>(idx.x()) * dims.y() + idx.y()) * dims.z() +
         idx.z();
}

VoxelIndex Unlinear(std::int64_t key, const VoxelIndex& dims) {
  const int k = static_cast<int>(key % dims.z());
  key /= dims.z();
  const int j = static_cast<int>(key % dims.y());
  const int i = static_cast<int>(key / dims.y());
  return {i, j, k};
}

}  // namespace

VoxelIndex GridConfig::BaseDims() const {
  VoxelIndex dims;
  for (int a = 0; a < 3; ++a) {
    // The epsilon absorbs representation error in e.g. 4.0 / 0.1.
    dims[a] = static_cast<int>(
        std::floor((range_max[a] - range_min[a]) / resolution[a] + 1e-9));
  }
  return dims;
}

VoxelIndex GridConfig::LevelDims(int level) const {
  const VoxelIndex base = BaseDims();
  const int scale = 1 << level;
  VoxelIndex dims;
  for (int a = 0; a < 3; ++a) dims[a] = (base[a] + scale - 1) / scale;
  return dims;
}

Eigen::Vector3d GridConfig::LevelResolution(int level) const {
  return resolution * static_cast<double>(1 << level);
}

void ValidateGridConfig(const GridConfig& config) {
  if (config.num_levels < 1 || config.num_levels > 16) {
    throw Error(ErrorCode::kInvalidConfig,
                "num_levels must be in [1, 16], got " +
                    std::to_string(config.num_levels));
  }
  if (config.dilation_radius < 0) {
    throw Error(ErrorCode::kInvalidConfig, "dilation_radius must be >= 0");
  }
  for (int a = 0; a < 3; ++a) {
    if (!std::isfinite(config.range_min[a]) ||
        !std::isfinite(config.range_max[a]) ||
        !(config.range_max[a] > config.range_min[a])) {
      throw Error(ErrorCode::kInvalidConfig, "range_max must exceed range_min");
    }
    if (!(config.resolution[a] > 0.0) || !std::isfinite(config.resolution[a])) {
      throw Error(ErrorCode::kInvalidConfig, "resolution must be positive");
    }
  }
  const VoxelIndex dims = config.BaseDims();
  const int needed = 1 << (config.num_levels - 1);
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < needed) {
      throw Error(ErrorCode::kInvalidConfig,
                  "grid axis " + std::to_string(a) + " has " +
                      std::to_string(dims[a]) + " cells, need at least " +
                      std::to_string(needed));
    }
  }
}

SparseVoxelLevel Voxelize(const PointCloud& points, const GridConfig& config) {
  struct Accumulator {
    int count = 0;
    double intensity = 0.0;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  };

  SparseVoxelLevel out;
  out.level = 0;
  out.dims = config.BaseDims();
  out.channels = kBaseFeatureChannels;

  std::unordered_map<std::int64_t, Accumulator> cells;
  for (const LidarPoint& point : points) {
    const Eigen::Vector3d rel =
        (point.position - config.range_min).cwiseQuotient(config.resolution);
    VoxelIndex idx;
    bool inside = true;
    for (int a = 0; a < 3 && inside; ++a) {
      const double f = std::floor(rel[a]);
      inside = std::isfinite(f) && f >= 0.0 && f < out.dims[a];
      if (inside) idx[a] = static_cast<int>(f);
    }
    if (!inside) continue;
    Accumulator& cell = cells[Linear(idx, out.dims)];
    ++cell.count;
    cell.intensity += point.intensity;
    cell.sum += point.position;
  }

  std::vector<std::int64_t> keys;
  keys.reserve(cells.size());
  int max_count = 0;
  for (const auto& [key, cell] : cells) {
    keys.push_back(key);
    max_count = std::max(max_count, cell.count);
  }
  // Linear order with row-major (i, j, k) is lexicographic order.
  std::sort(keys.begin(), keys.end());

  out.indices.reserve(keys.size());
  out.features.reserve(keys.size() * kBaseFeatureChannels);
  for (const std::int64_t key : keys) {
    const Accumulator& cell = cells.at(key);
    const VoxelIndex idx = Unlinear(key, out.dims);
    const Eigen::Vector3d center =
        config.range_min +
        (idx.cast<double>() + Eigen::Vector3d::Constant(0.5))
            .cwiseProduct(config.resolution);
    const Eigen::Vector3d centroid = cell.sum / cell.count;
    const Eigen::Vector3d offset =
        (centroid - center).cwiseQuotient(config.resolution);
    out.indices.push_back(idx);
    out.features.push_back(static_cast<double>(cell.count) / max_count);
    out.features.push_back(cell.intensity / cell.count);
    out.features.push_back(offset.x());
    out.features.push_back(offset.y());
    out.features.push_back(offset.z());
  }
  return out;
}

SparseVoxelLevel Downsample(const SparseVoxelLevel& level, int dilation_radius) {
  for (int a = 0; a < 3; ++a) {
    if (level.dims[a] < 2) {
      throw Error(ErrorCode::kGridTooSmall,
                  "level " + std::to_string(level.level) + " axis " +
                      std::to_string(a) + " has " +
                      std::to_string(level.dims[a]) + " cells");
    }
  }
  if (dilation_radius < 0) {
    throw Error(ErrorCode::kInvalidConfig, "dilation_radius must be >= 0");
  }

  SparseVoxelLevel out;
  out.level = level.level + 1;
  out.channels = level.channels;
  for (int a = 0; a < 3; ++a) out.dims[a] = (level.dims[a] + 1) / 2;
  const std::size_t channels = static_cast<std::size_t>(level.channels);

  // Contributing parents: average the children's features.
  struct Parent {
    int children = 0;
    std::vector<double> sum;
  };
  std::unordered_map<std::int64_t, Parent> parents;
  for (std::size_t n = 0; n < level.size(); ++n) {
    const VoxelIndex parent_idx = level.indices[n].array() / 2;
    Parent& parent = parents[Linear(parent_idx, out.dims)];
    if (parent.sum.empty()) parent.sum.assign(channels, 0.0);
    const auto f = level.feature(n);
    for (std::size_t c = 0; c < channels; ++c) parent.sum[c] += f[c];
    ++parent.children;
  }
  for (auto& [key, parent] : parents) {
    for (double& v : parent.sum) v /= parent.children;
  }

  std::vector<std::int64_t> occupied;
  occupied.reserve(parents.size());
  for (const auto& [key, parent] : parents) occupied.push_back(key);

  if (dilation_radius > 0) {
    std::unordered_map<std::int64_t, bool> seen;
    seen.reserve(parents.size() * 4);
    for (const auto& [key, parent] : parents) seen[key] = true;
    const int r = dilation_radius;
    for (const auto& [key, parent] : parents) {
      const VoxelIndex base = Unlinear(key, out.dims);
      for (int di = -r; di <= r; ++di) {
        for (int dj = -r; dj <= r; ++dj) {
          for (int dk = -r; dk <= r; ++dk) {
            const VoxelIndex idx = base + VoxelIndex(di, dj, dk);
            if ((idx.array() < 0).any() || (idx.array() >= out.dims.array()).any())
              continue;
            const std::int64_t nkey = Linear(idx, out.dims);
            if (seen.emplace(nkey, false).second) occupied.push_back(nkey);
          }
        }
      }
    }
  }
  std::sort(occupied.begin(), occupied.end());

  out.indices.reserve(occupied.size());
  out.features.reserve(occupied.size() * channels);
  const int r = dilation_radius;
  for (const std::int64_t key : occupied) {
    const VoxelIndex idx = Unlinear(key, out.dims);
    out.indices.push_back(idx);
    const auto direct = parents.find(key);
    if (direct != parents.end()) {
      out.features.insert(out.features.end(), direct->second.sum.begin(),
                          direct->second.sum.end());
      continue;
    }
    // Scan in lexicographic order so the first strict minimum wins ties.
    const Parent* nearest = nullptr;
    int best = std::numeric_limits<int>::max();
    for (int di = -r; di <= r; ++di) {
      for (int dj = -r; dj <= r; ++dj) {
        for (int dk = -r; dk <= r; ++dk) {
          const VoxelIndex n = idx + VoxelIndex(di, dj, dk);
          if ((n.array() < 0).any() || (n.array() >= out.dims.array()).any())
            continue;
          const auto it = parents.find(Linear(n, out.dims));
          if (it == parents.end()) continue;
          const int d2 = di * di + dj * dj + dk * dk;
          if (d2 < best) {
            best = d2;
            nearest = &it->second;
          }
        }
      }
    }
    out.features.insert(out.features.end(), nearest->sum.begin(),
                        nearest->sum.end());
  }
  return out;
}

VoxelHierarchy BuildHierarchy(const PointCloud& points, const GridConfig& config) {
  ValidateGridConfig(config);
  VoxelHierarchy hierarchy;
  hierarchy.config = config;
  hierarchy.levels.reserve(config.num_levels);
  hierarchy.levels.push_back(Voxelize(points, config));
  for (int l = 0; l + 1 < config.num_levels; ++l) {
    hierarchy.levels.push_back(
        Downsample(hierarchy.levels.back(), config.dilation_radius));
  }
  return hierarchy;
}

std::vector<Eigen::Vector3d> VoxelCenters(const SparseVoxelLevel& level,
                                          const GridConfig& config) {
  const Eigen::Vector3d res = config.LevelResolution(level.level);
  std::vector<Eigen::Vector3d> centers;
  centers.reserve(level.size());
  for (const VoxelIndex& idx : level.indices) {
    centers.push_back(config.range_min +
                      (idx.cast<double>() + Eigen::Vector3d::Constant(0.5))
                          .cwiseProduct(res));
  }
  return centers;
}

}  // namespace dvf
