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

#include <map>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "dvf/dataio.h"
#include "dvf/error.h"

namespace dvf {
namespace {

SparseVoxelLevel RandomLevel(std::mt19937_64& gen, const GridConfig& config, int count) {
  std::uniform_real_distribution<double> x(0, 70), y(-40, 40), z(-1, 3), in(0, 1);
  PointCloud points;
  for (int i = 0; i < count; ++i) points.push_back({{x(gen), y(gen), z(gen)}, in(gen)});
  return Voxelize(points, config);
}

ForegroundHeatmap Constant(const CameraCalib& calib, float value) {
  return ForegroundHeatmap(
      calib.image_width, calib.image_height,
      std::vector<float>(static_cast<std::size_t>(calib.image_width) * calib.image_height,
                         value));
}

// Returns the image AABB of the box corners, computed straight from the
// projection matrices, or false when any corner is behind the camera.
bool CornerAabb(const CameraCalib& calib, const Box3D& box, double bounds[4]) {
  const Eigen::Matrix<double, 3, 4> m = calib.proj * calib.rect * calib.lidar_to_cam;
  bounds[0] = bounds[1] = 1e300;
  bounds[2] = bounds[3] = -1e300;
  for (const Eigen::Vector3d& c : box.Corners()) {
    const Eigen::Vector3d h = m * c.homogeneous();
    if (h.z() <= 0.0) return false;
    bounds[0] = std::min(bounds[0], h.x() / h.z());
    bounds[1] = std::min(bounds[1], h.y() / h.z());
    bounds[2] = std::max(bounds[2], h.x() / h.z());
    bounds[3] = std::max(bounds[3], h.y() / h.z());
  }
  return true;
}

TEST(FuseLevelTest, ZeroHeatmapIsBitIdentical) {
  std::mt19937_64 gen(1);
  const GridConfig config;
  const CameraCalib calib = KittiReferenceCalib();
  const SparseVoxelLevel level = RandomLevel(gen, config, 2000);
  const FusedLevel fused = FuseLevel(level, config, calib, Constant(calib, 0.0f), std::nullopt);
  EXPECT_EQ(fused.features, level.features);
  EXPECT_EQ(fused.channels, level.channels);
  for (const double rho : fused.rhos) EXPECT_EQ(rho, 0.0);
}

TEST(FuseLevelTest, ConstantOneDoublesInFrustumVoxels) {
  std::mt19937_64 gen(2);
  const GridConfig config;
  const CameraCalib calib = KittiReferenceCalib();
  const SparseVoxelLevel level = RandomLevel(gen, config, 2000);
  const FusedLevel fused = FuseLevel(level, config, calib, Constant(calib, 1.0f), std::nullopt);
  int in_image = 0;
  for (std::size_t n = 0; n < level.size(); ++n) {
    const bool visible =
        InImage(fused.pixel_locs[n], calib.image_width, calib.image_height);
    in_image += visible;
    for (int c = 0; c < level.channels; ++c) {
      const double v = level.feature(n)[c];
      EXPECT_EQ(fused.feature(n)[c], visible ? 2.0 * v : v);
    }
  }
  EXPECT_GT(in_image, 100);
}

TEST(FuseLevelTest, HalfRhoExample) {
  // One voxel projecting to the middle of a pinhole image under a 0.5 map.
  GridConfig config;
  config.range_min = Eigen::Vector3d(-1, -1, 0);
  config.range_max = Eigen::Vector3d(1, 1, 20);
  config.resolution = Eigen::Vector3d(2, 2, 20);
  config.num_levels = 1;
  SparseVoxelLevel level;
  level.dims = VoxelIndex(1, 1, 1);
  level.channels = 5;
  level.indices = {VoxelIndex(0, 0, 0)};
  level.features = {0.2, 0.4, 0, 0, 0};
  const CameraCalib calib = PinholeCalib(10, 5, 5, 11, 11);
  const FusedLevel fused = FuseLevel(level, config, calib, Constant(calib, 0.5f), std::nullopt);
  EXPECT_EQ(fused.rhos[0], 0.5);
  EXPECT_DOUBLE_EQ(fused.features[0], 0.3);
  EXPECT_DOUBLE_EQ(fused.features[1], 0.6);
  EXPECT_EQ(fused.features[2], 0.0);
}

TEST(FuseLevelTest, ScalingLawOnRandomHeatmaps) {
  std::mt19937_64 gen(3);
  const GridConfig config;
  const CameraCalib calib = KittiReferenceCalib();
  std::uniform_real_distribution<float> val(0.0f, 1.0f);
  std::vector<float> values(static_cast<std::size_t>(calib.image_width) * calib.image_height);
  for (float& v : values) v = val(gen);
  const ForegroundHeatmap map(calib.image_width, calib.image_height, values);
  const SparseVoxelLevel level = RandomLevel(gen, config, 3000);
  const FusedLevel fused = FuseLevel(level, config, calib, map, std::nullopt);
  ASSERT_EQ(fused.size(), level.size());
  ASSERT_EQ(fused.features.size(), level.features.size());
  for (std::size_t n = 0; n < level.size(); ++n) {
    EXPECT_GE(fused.rhos[n], 0.0);
    EXPECT_LE(fused.rhos[n], 1.0);
    if (!InImage(fused.pixel_locs[n], calib.image_width, calib.image_height)) {
      EXPECT_EQ(fused.rhos[n], 0.0);
    }
    for (int c = 0; c < level.channels; ++c) {
      const double expected = (1.0 + fused.rhos[n]) * level.feature(n)[c];
      EXPECT_NEAR(fused.feature(n)[c], expected, 1e-12 * std::abs(expected));
    }
  }
}

TEST(FuseLevelTest, ScalingLawIsExactOnDyadicValues) {
  std::mt19937_64 gen(4);
  const GridConfig config;
  const CameraCalib calib = KittiReferenceCalib();
  SparseVoxelLevel level = RandomLevel(gen, config, 3000);
  for (double& f : level.features) f = static_cast<double>(gen() % 256) / 64.0 - 2.0;
  for (const float rho : {0.0f, 0.25f, 0.5f, 0.875f, 1.0f}) {
    const FusedLevel fused =
        FuseLevel(level, config, calib, Constant(calib, rho), std::nullopt);
    for (std::size_t n = 0; n < level.size(); ++n) {
      for (int c = 0; c < level.channels; ++c) {
        EXPECT_EQ(fused.feature(n)[c], (1.0 + fused.rhos[n]) * level.feature(n)[c]);
      }
    }
  }
}

TEST(FuseHierarchyTest, EmptyHierarchy) {
  const GridConfig config;
  const CameraCalib calib = KittiReferenceCalib();
  const auto fused = FuseHierarchy(BuildHierarchy({}, config), calib, Constant(calib, 1.0f),
                                   std::nullopt);
  ASSERT_EQ(fused.size(), 4u);
  for (const FusedLevel& level : fused) EXPECT_EQ(level.size(), 0u);
}

TEST(FuseHierarchyTest, SinglePointDoublesEveryLevel) {
  GridConfig config;
  config.dilation_radius = 0;
  const CameraCalib calib = KittiReferenceCalib();
  const PointCloud points = {{{15.0, 0.3, 0.2}, 0.6}};
  const VoxelHierarchy h = BuildHierarchy(points, config);
  const auto fused = FuseHierarchy(h, calib, Constant(calib, 1.0f), std::nullopt);
  ASSERT_EQ(fused.size(), 4u);
  for (int l = 0; l < 4; ++l) {
    ASSERT_EQ(fused[l].size(), 1u);
    for (int c = 0; c < fused[l].channels; ++c) {
      EXPECT_EQ(fused[l].feature(0)[c], 2.0 * h.levels[l].feature(0)[c]);
    }
  }
  const CorrespondenceStats stats =
      CorrespondenceReport(fused, calib.image_width, calib.image_height, 0.9);
  EXPECT_EQ(stats.total.foreground, 4u);
  EXPECT_EQ(stats.total.in_image, 4u);
  EXPECT_EQ(stats.records.size(), 4u);
}

TEST(FuseHierarchyTest, ThreeCarSceneMatchesPointInBoxOracle) {
  SyntheticOptions options;
  options.seed = 7;
  options.n_objects = 3;
  const Scene scene = SyntheticScene(options);
  ASSERT_EQ(scene.gt_boxes.size(), 3u);
  const CameraCalib& calib = scene.calib;
  RandomStream rng(11);
  const ForegroundHeatmap map =
      TrainingMask(calib, scene.gt_boxes, scene.mask_visible, ConfidenceRange{}, rng);
  const VoxelHierarchy h = BuildHierarchy(scene.points, options.grid);
  const auto fused = FuseHierarchy(h, calib, map, std::nullopt);

  std::vector<std::array<double, 4>> aabbs;
  for (const Box3D& box : scene.gt_boxes) {
    std::array<double, 4> b;
    ASSERT_TRUE(CornerAabb(calib, box, b.data()));
    aabbs.push_back(b);
  }
  for (const FusedLevel& level : fused) {
    int foreground = 0;
    for (std::size_t n = 0; n < level.size(); ++n) {
      const Eigen::Vector3d& c = level.centers[n];
      const double u = level.pixel_locs[n].u, v = level.pixel_locs[n].v;
      bool inside_box = false, deep_in_aabb = false, near_any_aabb = false;
      for (std::size_t k = 0; k < scene.gt_boxes.size(); ++k) {
        const auto& b = aabbs[k];
        if (scene.gt_boxes[k].Contains(c) && u >= b[0] + 1 && u <= b[2] - 1 &&
            v >= b[1] + 1 && v <= b[3] - 1) {
          inside_box = true;
        }
        deep_in_aabb |= u >= b[0] + 1 && u <= b[2] - 1 && v >= b[1] + 1 && v <= b[3] - 1;
        near_any_aabb |= u > b[0] - 1 && u < b[2] + 1 && v > b[1] - 1 && v < b[3] + 1;
      }
      if (!level.pixel_locs[n].in_front) near_any_aabb = false;
      if (inside_box || (deep_in_aabb && level.pixel_locs[n].in_front)) {
        EXPECT_GE(level.rhos[n], 0.8) << "level " << level.level << " voxel " << n;
        foreground += inside_box;
      }
      if (!near_any_aabb) EXPECT_EQ(level.rhos[n], 0.0);
    }
    EXPECT_GT(foreground, 0) << "level " << level.level;
  }
}

TEST(FuseHierarchyTest, FlipEquivarianceOnSymmetricGrid) {
  SyntheticOptions options;
  options.seed = 3;
  options.n_objects = 3;
  const Scene scene = SyntheticScene(options);
  RandomStream rng(5);
  const ForegroundHeatmap map =
      TrainingMask(scene.calib, scene.gt_boxes, scene.mask_visible, {}, rng);
  GridConfig grid = options.grid;
  grid.dilation_radius = 0;

  const GlobalTransform flip{1.0, 0.0, true};
  const Scene flipped = ApplyTransform(scene, flip);
  const VoxelHierarchy plain = BuildHierarchy(scene.points, grid);
  const VoxelHierarchy mirrored = BuildHierarchy(flipped.points, grid);
  const auto a = FuseHierarchy(plain, scene.calib, map, std::nullopt);
  const auto b = FuseHierarchy(mirrored, scene.calib, map, flipped.applied_transform);

  for (int l = 0; l < grid.num_levels; ++l) {
    const SparseVoxelLevel& la = plain.levels[l];
    const SparseVoxelLevel& lb = mirrored.levels[l];
    std::map<std::array<int, 3>, double> rho_a;
    for (std::size_t n = 0; n < la.size(); ++n) {
      const VoxelIndex& i = la.indices[n];
      rho_a[{i.x(), la.dims.y() - 1 - i.y(), i.z()}] = a[l].rhos[n];
    }
    std::size_t matched = 0;
    for (std::size_t n = 0; n < lb.size(); ++n) {
      const VoxelIndex& i = lb.indices[n];
      const auto it = rho_a.find({i.x(), i.y(), i.z()});
      if (it == rho_a.end()) continue;
      ++matched;
      EXPECT_NEAR(b[l].rhos[n], it->second, 1e-6);
    }
    // Points landing exactly on a y boundary may round differently.
    EXPECT_GE(matched, la.size() * 99 / 100);
  }
}

TEST(CorrespondenceReportTest, ZeroMapHasNoForeground) {
  std::mt19937_64 gen(8);
  const CameraCalib calib = KittiReferenceCalib();
  SparseVoxelLevel level = RandomLevel(gen, GridConfig(), 1000);
  const auto fused = FuseHierarchy(
      VoxelHierarchy{GridConfig(), {level}}, calib, Constant(calib, 0.0f), std::nullopt);
  const CorrespondenceStats stats =
      CorrespondenceReport(fused, calib.image_width, calib.image_height, 0.9);
  EXPECT_EQ(stats.total.foreground, 0u);
  EXPECT_EQ(stats.total.background, stats.total.in_image);
  EXPECT_EQ(stats.records.size(), stats.total.in_image);
  EXPECT_GT(stats.total.in_image, 0u);
  EXPECT_EQ(stats.total.voxels, level.size());
  EXPECT_EQ(stats.threshold, 0.9);
}

TEST(CorrespondenceReportTest, RejectsThresholdOutsideUnitInterval) {
  EXPECT_THROW(CorrespondenceReport({}, 10, 10, 1.5), Error);
  EXPECT_THROW(CorrespondenceReport({}, 10, 10, -0.1), Error);
}

}  // namespace
}  // namespace dvf
