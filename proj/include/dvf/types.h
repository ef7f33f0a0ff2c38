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

#include <array>
#include <vector>

#include <Eigen/Core>

namespace dvf {

// A single LiDAR return in the sensor frame. Intensity is in [0, 1].
struct LidarPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double intensity = 0.0;

  bool operator==(const LidarPoint&) const = default;
};

using PointCloud = std::vector<LidarPoint>;

// Oriented 3D box in the LiDAR frame. dims = (length, width, height); length
// runs along the heading, height along the vertical (z) axis. yaw rotates the
// heading about +z, measured from +x.
struct Box3D {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d dims = Eigen::Vector3d::Ones();
  double yaw = 0.0;

  // Corners in a fixed order: bottom face (z - h/2) counter-clockwise
  // starting at (+l/2, +w/2), then the top face in the same order.
  std::array<Eigen::Vector3d, 8> Corners() const;

  // Footprint polygon (counter-clockwise) in the x-y plane.
  std::array<Eigen::Vector2d, 4> BevCorners() const;

  // True when p lies inside the box (closed).
  bool Contains(const Eigen::Vector3d& p, double tolerance = 1e-9) const;

  bool operator==(const Box3D&) const = default;
};

// Axis-aligned image-plane box. u is the column axis, v the row axis.
struct Box2D {
  double u1 = 0.0;
  double v1 = 0.0;
  double u2 = 0.0;
  double v2 = 0.0;
  double confidence = 0.0;

  double Area() const { return (u2 - u1) * (v2 - v1); }

  bool operator==(const Box2D&) const = default;
};

}  // namespace dvf
