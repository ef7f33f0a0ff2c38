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

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dvf/augment.h"
#include "dvf/fusion.h"
#include "dvf/types.h"

namespace dvf {

// Area of the intersection of two convex polygons given counter-clockwise.
double ConvexIntersectionArea(std::span<const Eigen::Vector2d> a,
                              std::span<const Eigen::Vector2d> b);

// Rotated bird's-eye-view IoU. Throws kDegenerateBox for non-positive dims.
double BevIou(const Box3D& a, const Box3D& b);
// Rotated 3D IoU: BEV intersection times vertical overlap over volume union.
double Iou3d(const Box3D& a, const Box3D& b);

enum class IouKind { kBev, k3d };

// `frame` identifies the scene; detections only match ground truth of the
// same frame.
struct Detection {
  Box3D box;
  double score = 0.0;
  std::string label;
  int frame = 0;
};

struct GroundTruth {
  Box3D box;
  std::string label;
  int frame = 0;
};

struct RangeBin {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
};

struct EvalConfig {
  std::map<std::string, double> iou_thresholds{
      {"Car", 0.7}, {"Pedestrian", 0.5}, {"Cyclist", 0.5}};
  int recall_positions = 40;
  std::vector<RangeBin> range_bins{{0.0, 20.0}, {20.0, 40.0}, {40.0, kInf}};

  static constexpr double kInf = std::numeric_limits<double>::infinity();
};

// Throws kInvalidConfig when thresholds or bins violate their invariants.
void ValidateEvalConfig(const EvalConfig& config);

// Average precision of one class at `recall_positions` evenly spaced recalls
// r = 1/R .. R/R, using the interpolated precision max_{r' >= r} p(r').
//
// Detections of `label` are matched greedily in descending score order (ties
// keep input order); each takes the unmatched ground truth of the same label
// with the highest IoU, provided it reaches the class threshold. The
// precision/recall curve is sampled at every distinct score, so tied
// detections enter together. Matching is restricted to equal frames. No ground truth yields AP 0.
// Throws kUnknownClass if `label` has no configured threshold.
double ApR40(std::span<const Detection> detections,
             std::span<const GroundTruth> ground_truth, const std::string& label,
             const EvalConfig& config, IouKind kind);

struct BinAp {
  RangeBin bin;
  double ap = 0.0;
  std::size_t num_gt = 0;
  std::size_t num_det = 0;
  // True when the bin holds no ground truth; ap is then reported as 0.
  bool empty = false;
};

// BEV range of a box center from the sensor origin.
double BevRange(const Box3D& box);
// Index of the half-open bin [lo, hi) containing `range`, if any.
std::optional<std::size_t> BinOf(std::span<const RangeBin> bins, double range);

std::vector<BinAp> RangeBinnedAp(std::span<const Detection> detections,
                                 std::span<const GroundTruth> ground_truth,
                                 const std::string& label,
                                 const EvalConfig& config, IouKind kind);

// Correspondence budget of point-level painting versus multi-scale voxel
// sampling.
struct DensityBin {
  RangeBin bin;
  std::size_t point_pixel = 0;
  std::size_t voxel_pixel = 0;
  std::optional<double> ratio;
};

struct DensityReport {
  std::size_t point_pixel = 0;
  std::size_t voxel_pixel = 0;
  std::optional<double> ratio;
  std::vector<std::size_t> voxel_pixel_per_level;
  std::vector<DensityBin> bins;
};

// Points are taken in the sensor frame; when the scene carries an applied
// transform they are mapped back before projection.
DensityReport DensityComparison(const Scene& scene,
                                std::span<const FusedLevel> fused,
                                const CameraCalib& calib,
                                std::span<const RangeBin> bins);

// KITTI difficulty buckets (community-standard constants):
//   easy:     bbox height >= 40 px, occlusion <= 0, truncation <= 0.15
//   moderate: bbox height >= 25 px, occlusion <= 1, truncation <= 0.30
//   hard:     bbox height >= 25 px, occlusion <= 2, truncation <= 0.50
enum class Difficulty { kEasy, kModerate, kHard };

struct DifficultyInputs {
  double bbox_height = 0.0;
  int occlusion = 0;
  double truncation = 0.0;
};

bool PassesDifficulty(const DifficultyInputs& inputs, Difficulty difficulty);

}  // namespace dvf
