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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dvf/augment.h"
#include "dvf/calib.h"
#include "dvf/eval.h"
#include "dvf/fusion.h"
#include "dvf/heatmap.h"
#include "dvf/types.h"
#include "dvf/voxelgrid.h"

namespace dvf {

// --- KITTI velodyne ---------------------------------------------------------

// Little-endian float32 quadruples (x, y, z, intensity). Throws
// kTruncatedFile when the length is not a multiple of 16.
PointCloud ReadVelodyne(std::string_view bytes);
std::string EncodeVelodyne(const PointCloud& points);

// --- KITTI labels -----------------------------------------------------------

struct LabelRecord {
  std::string label;
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;
  Box2D bbox2d;
  // (h, w, l) in meters.
  Eigen::Vector3d dims = Eigen::Vector3d::Ones();
  // Bottom-center in the rectified camera frame.
  Eigen::Vector3d location = Eigen::Vector3d::Zero();
  double rotation_y = 0.0;
  std::optional<double> score;
};

// 15 fields per line, 16 with a trailing score. Blank lines are skipped.
// Throws kWrongFieldCount(line) / kMalformedFloat(line, field).
std::vector<LabelRecord> ParseLabels(std::string_view text);
std::string FormatLabels(const std::vector<LabelRecord>& records);

// Lifts the bottom-center location to the box center, maps it through
// (rect * lidar_to_cam)^-1 and converts rotation_y to a LiDAR yaw with
// yaw = -rotation_y - pi/2. Throws kSingularCalib.
Box3D CameraBoxToLidar(const LabelRecord& record, const CameraCalib& calib);

// Inverse of CameraBoxToLidar. bbox2d is the clipped projected AABB (zeros
// when not visible); truncation and occlusion are left at 0.
LabelRecord LidarBoxToCamera(const Box3D& box, const std::string& label,
                             const CameraCalib& calib);

// --- Synthetic scenes -------------------------------------------------------

struct SyntheticOptions {
  std::uint64_t seed = 0;
  int n_objects = 0;
  GridConfig grid;
  CameraCalib calib = KittiReferenceCalib();
  // Optional explicit BEV ranges, one per object.
  std::vector<double> object_ranges;
  double ground_z = -0.9;
};

// Ground rings plus car-sized cuboid clusters in front of the camera. Object
// point counts follow 4000 * (5 m / range)^2, so density falls with range.
Scene SyntheticScene(const SyntheticOptions& options);

// Car templates in their canonical frame, for ground-truth sampling.
SampleDB SyntheticSampleDB(std::uint64_t seed, int count);

// --- Heatmap formats --------------------------------------------------------

// Binary PGM (P5), byte = round(255 * value).
std::string EncodePgm(const ForegroundHeatmap& map);
// "DVFH", u32 width, u32 height, u32 0, then width*height little-endian
// float32 values, row-major.
std::string EncodeDvfh(const ForegroundHeatmap& map);
ForegroundHeatmap DecodeDvfh(std::string_view bytes);

// --- Reports ----------------------------------------------------------------

// Header `level,u,v,rho` then one row per record.
std::string OverlayCsv(const CorrespondenceStats& stats);
nlohmann::json StatsJson(const CorrespondenceStats& stats);
nlohmann::json DensityJson(const DensityReport& report);

// --- Files ------------------------------------------------------------------

// Both throw kIo naming the path.
std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view bytes);

// One `<name>.bin` (velodyne format) plus `<name>.json` sidecar
// {"label", "dims": [l, w, h], "center_z"} per entry.
SampleDB LoadSampleDB(const std::filesystem::path& dir);
void SaveSampleDB(const SampleDB& db, const std::filesystem::path& dir);

}  // namespace dvf
