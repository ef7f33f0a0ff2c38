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
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dvf/types.h"

namespace dvf {

inline constexpr int kKittiImageWidth = 1242;
inline constexpr int kKittiImageHeight = 375;

// Projection chain from the LiDAR frame to pixels:
//   pixel_h = proj * rect * lidar_to_cam * [p; 1]
struct CameraCalib {
  Eigen::Matrix<double, 3, 4> proj = Eigen::Matrix<double, 3, 4>::Identity();
  Eigen::Matrix4d rect = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d lidar_to_cam = Eigen::Matrix4d::Identity();
  int image_width = kKittiImageWidth;
  int image_height = kKittiImageHeight;

  // proj * rect * lidar_to_cam.
  Eigen::Matrix<double, 3, 4> Chain() const;
  // rect * lidar_to_cam, the rigid part of the chain.
  Eigen::Matrix4d LidarToRect() const;
};

// Throws kInvalidConfig when a CameraCalib invariant does not hold (bottom
// rows, orthonormal rotation within `tolerance`, positive image size).
void ValidateCalib(const CameraCalib& calib, double tolerance = 1e-6);

// Pinhole chain with identity rect/lidar_to_cam, i.e. LiDAR frame == camera
// frame.
CameraCalib PinholeCalib(double focal, double cx, double cy, int width,
                         int height);

// Calibration values of KITTI training frame 000000 (camera 2).
CameraCalib KittiReferenceCalib();

// Parses the KITTI calibration text format. Requires P2, R0_rect and
// Tr_velo_to_cam; other keys are ignored.
CameraCalib ParseCalib(std::string_view text, int image_width = kKittiImageWidth,
                       int image_height = kKittiImageHeight);

// Inverse of ParseCalib for the three keys it reads.
std::string FormatCalib(const CameraCalib& calib);

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool in_front = false;
};

PixelPoint ProjectPoint(const CameraCalib& calib, const Eigen::Vector3d& p);
std::vector<PixelPoint> ProjectPoints(const CameraCalib& calib,
                                      std::span<const Eigen::Vector3d> points);

// Recovers the LiDAR-frame point that projects to (u, v) at the given depth.
// Throws kSingularCalib if the chain is not invertible.
Eigen::Vector3d BackProject(const CameraCalib& calib, const PixelPoint& pixel);

// True when the pixel lies in front of the camera and inside the sampling
// domain [0, W-1] x [0, H-1].
bool InImage(const PixelPoint& pixel, int width, int height);

// Image-plane AABB of the in-front corners of `box`, clipped to
// [0, W] x [0, H]. nullopt when no corner is in front or the clipped box has
// zero area. The confidence of the result is 0; callers assign it.
// Throws kNonPositiveDims.
std::optional<Box2D> ProjectBoxToAabb(const CameraCalib& calib, const Box3D& box);

// Same as ProjectBoxToAabb but without clipping to the image.
std::optional<Box2D> ProjectBoxToAabbUnclipped(const CameraCalib& calib,
                                               const Box3D& box);

}  // namespace dvf
