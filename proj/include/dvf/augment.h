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
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dvf/calib.h"
#include "dvf/rng.h"
#include "dvf/types.h"
#include "dvf/voxelgrid.h"

namespace dvf {

// Global augmentation applied as flip(rotate(scale(p))): scale by s, rotate by
// yaw about +z, then mirror y -> -y when flip_x is set.
struct GlobalTransform {
  double scale = 1.0;
  double yaw = 0.0;
  bool flip_x = false;

  Eigen::Vector3d Apply(const Eigen::Vector3d& p) const;
  Eigen::Vector3d Invert(const Eigen::Vector3d& p) const;
  Box3D Apply(const Box3D& box) const;
  Box3D Invert(const Box3D& box) const;
};

// Throws kInvalidConfig for s <= 0 or a non-finite yaw.
void ValidateTransform(const GlobalTransform& t);

// Draws s ~ U[scale_min, scale_max], yaw ~ U[yaw_min, yaw_max] and a fair
// flip, in that order.
struct AugmentRanges {
  double scale_min = 0.95;
  double scale_max = 1.05;
  double yaw_min = -0.7853981633974483;
  double yaw_max = 0.7853981633974483;
};
GlobalTransform RandomTransform(const AugmentRanges& ranges, RandomStream& rng);

struct Scene {
  PointCloud points;
  std::vector<Box3D> gt_boxes;
  std::vector<std::string> gt_classes;
  std::vector<bool> mask_visible;
  CameraCalib calib;
  std::optional<GlobalTransform> applied_transform;

  // Throws kDimMismatch unless the per-box vectors have equal length.
  void CheckConsistent() const;
};

Scene ApplyTransform(const Scene& scene, const GlobalTransform& t);

std::vector<Eigen::Vector3d> InvertPoints(const GlobalTransform& t,
                                          std::span<const Eigen::Vector3d> points);

struct SampleEntry {
  // Points relative to the box center, box yaw 0.
  PointCloud points;
  // dims and center.z are used on placement; center.xy and yaw are ignored.
  Box3D box;
  std::string label;
};

struct SampleDB {
  std::vector<SampleEntry> entries;

  SampleDB WithLabel(std::string_view label) const;
};

// Throws kInvalidConfig if an entry's points leave its canonical box.
void ValidateSampleDB(const SampleDB& db);

struct GtSampleOptions {
  int k = 5;
  // Attempts budget; 0 means 10 * k.
  int max_attempts = 0;
  // Ground positions are drawn inside the grid range, keeping the whole
  // footprint inside it.
  GridConfig grid;
};

struct GtSampleResult {
  Scene scene;
  // Indices into scene.gt_boxes of the inserted boxes.
  std::vector<std::size_t> inserted;
  int attempts = 0;
};

// Pastes up to k database objects at random ground positions and headings.
// Candidates whose BEV footprint overlaps any existing box (IoU > 0) are
// rejected. Inserted boxes start with mask_visible = true.
GtSampleResult GtSample(const Scene& scene, const SampleDB& db,
                        const GtSampleOptions& options, RandomStream& rng);

// Hides each listed box from the foreground mask with probability p_drop.
// Throws kIndexOutOfRange / kInvalidRange.
Scene DropoutMasks(const Scene& scene, std::span<const std::size_t> inserted,
                   double p_drop, RandomStream& rng);

// Removes each point independently with probability `fraction`, keeping the
// survivors in order. Throws kInvalidRange unless fraction is in [0, 1].
PointCloud DropPoints(const PointCloud& points, double fraction,
                      RandomStream& rng);

}  // namespace dvf
