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

#include <cmath>

#include "dvf/error.h"
#include "dvf/types.h"

namespace dvf {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingKey: return "MissingKey";
    case ErrorCode::kMalformedFloat: return "MalformedFloat";
    case ErrorCode::kWrongCount: return "WrongCount";
    case ErrorCode::kNonPositiveDims: return "NonPositiveDims";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kGridTooSmall: return "GridTooSmall";
    case ErrorCode::kEmptyImage: return "EmptyImage";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kAlreadyTransformed: return "AlreadyTransformed";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kWrongFieldCount: return "WrongFieldCount";
    case ErrorCode::kSingularCalib: return "SingularCalib";
    case ErrorCode::kDegenerateBox: return "DegenerateBox";
    case ErrorCode::kUnknownClass: return "UnknownClass";
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

std::array<Eigen::Vector2d, 4> Box3D::BevCorners() const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const double hl = 0.5 * dims.x();
  const double hw = 0.5 * dims.y();
  const std::array<Eigen::Vector2d, 4> local = {
      Eigen::Vector2d(hl, hw), Eigen::Vector2d(-hl, hw),
      Eigen::Vector2d(-hl, -hw), Eigen::Vector2d(hl, -hw)};
  std::array<Eigen::Vector2d, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = Eigen::Vector2d(center.x() + c * local[i].x() - s * local[i].y(),
                             center.y() + s * local[i].x() + c * local[i].y());
  }
  return out;
}

std::array<Eigen::Vector3d, 8> Box3D::Corners() const {
  const auto bev = BevCorners();
  const double zb = center.z() - 0.5 * dims.z();
  const double zt = center.z() + 0.5 * dims.z();
  std::array<Eigen::Vector3d, 8> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = Eigen::Vector3d(bev[i].x(), bev[i].y(), zb);
    out[i + 4] = Eigen::Vector3d(bev[i].x(), bev[i].y(), zt);
  }
  return out;
}

bool Box3D::Contains(const Eigen::Vector3d& p, double tolerance) const {
  const Eigen::Vector3d d = p - center;
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const double local_x = c * d.x() + s * d.y();
  const double local_y = -s * d.x() + c * d.y();
  return std::abs(local_x) <= 0.5 * dims.x() + tolerance &&
         std::abs(local_y) <= 0.5 * dims.y() + tolerance &&
         std::abs(d.z()) <= 0.5 * dims.z() + tolerance;
}

}  // namespace dvf
