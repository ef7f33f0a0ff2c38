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

#include "dvf/calib.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "dvf/error.h"

namespace dvf {
namespace {

constexpr std::string_view kWhitespace = " \t\r\n";

std::vector<std::string_view> SplitWhitespace(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    pos = line.find_first_not_of(kWhitespace, pos);
    if (pos == std::string_view::npos) break;
    const std::size_t end = line.find_first_of(kWhitespace, pos);
    const std::size_t stop = end == std::string_view::npos ? line.size() : end;
    tokens.push_back(line.substr(pos, stop - pos));
    pos = stop;
  }
  return tokens;
}

struct KeyedLine {
  int line_number;
  std::vector<std::string_view> values;
};

std::vector<double> ParseFloats(const KeyedLine& entry, std::string_view key,
                                std::size_t expected) {
  if (entry.values.size() != expected) {
    throw Error(ErrorCode::kWrongCount,
                std::string(key) + " expected " + std::to_string(expected) +
                    " values, got " + std::to_string(entry.values.size()));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (std::size_t i = 0; i < entry.values.size(); ++i) {
    const std::string_view token = entry.values[i];
    double value = 0.0;
    const auto [end, ec] =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || end != token.data() + token.size() ||
        !std::isfinite(value)) {
      throw Error(ErrorCode::kMalformedFloat,
                  "line " + std::to_string(entry.line_number) + ", column " +
                      std::to_string(i + 1) + ": '" + std::string(token) + "'");
    }
    out.push_back(value);
  }
  return out;
}

}  // namespace

Eigen::Matrix<double, 3, 4> CameraCalib::Chain() const {
  return proj * rect * lidar_to_cam;
}

Eigen::Matrix4d CameraCalib::LidarToRect() const { return rect * lidar_to_cam; }

void ValidateCalib(const CameraCalib& calib, double tolerance) {
  const Eigen::RowVector4d bottom(0, 0, 0, 1);
  if (calib.rect.row(3) != bottom) {
    throw Error(ErrorCode::kInvalidConfig, "rect bottom row is not (0,0,0,1)");
  }
  if (calib.lidar_to_cam.row(3) != bottom) {
    throw Error(ErrorCode::kInvalidConfig,
                "lidar_to_cam bottom row is not (0,0,0,1)");
  }
  const Eigen::Matrix3d rotation = calib.lidar_to_cam.topLeftCorner<3, 3>();
  const double error =
      (rotation * rotation.transpose() - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  if (!(error <= tolerance)) {
    throw Error(ErrorCode::kInvalidConfig,
                "lidar_to_cam rotation is not orthonormal (error " +
                    std::to_string(error) + ")");
  }
  if (calib.image_width <= 0 || calib.image_height <= 0) {
    throw Error(ErrorCode::kInvalidConfig, "image size must be positive");
  }
}

CameraCalib PinholeCalib(double focal, double cx, double cy, int width,
                         int height) {
  CameraCalib calib;
  calib.proj << focal, 0, cx, 0,  //
      0, focal, cy, 0,            //
      0, 0, 1, 0;
  calib.image_width = width;
  calib.image_height = height;
  return calib;
}

CameraCalib KittiReferenceCalib() {
  CameraCalib calib;
  calib.proj << 7.070493e+02, 0.0, 6.040814e+02, 4.575831e+01,  //
      0.0, 7.070493e+02, 1.805066e+02, -3.454157e-01,             //
      0.0, 0.0, 1.0, 4.981016e-03;
  calib.rect << 9.999128e-01, 1.009263e-02, -8.511932e-03, 0.0,  //
      -1.012729e-02, 9.999406e-01, -4.037671e-03, 0.0,            //
      8.470675e-03, 4.123522e-03, 9.999556e-01, 0.0,              //
      0.0, 0.0, 0.0, 1.0;
  calib.lidar_to_cam << 6.927964e-03, -9.999722e-01, -2.757829e-03,
      -2.457729e-02,                                                //
      -1.162982e-03, 2.749836e-03, -9.999955e-01, -6.129760e-02,   //
      9.999753e-01, 6.931141e-03, -1.143899e-03, -3.321029e-01,    //
      0.0, 0.0, 0.0, 1.0;
  return calib;
}

CameraCalib ParseCalib(std::string_view text, int image_width,
                       int image_height) {
  std::map<std::string, KeyedLine, std::less<>> entries;
  int line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::size_t stop = end == std::string_view::npos ? text.size() : end;
    std::string_view line = text.substr(pos, stop - pos);
    ++line_number;
    pos = stop + 1;
    const std::size_t colon = line.find(':');
    if (colon != std::string_view::npos) {
      const auto key_tokens = SplitWhitespace(line.substr(0, colon));
      if (key_tokens.size() == 1) {
        entries[std::string(key_tokens[0])] =
            KeyedLine{line_number, SplitWhitespace(line.substr(colon + 1))};
      }
    }
    if (end == std::string_view::npos) break;
  }

  auto require = [&](std::string_view key, std::size_t count) {
    const auto it = entries.find(key);
    if (it == entries.end()) {
      throw Error(ErrorCode::kMissingKey, std::string(key));
    }
    return ParseFloats(it->second, key, count);
  };

  const std::vector<double> p2 = require("P2", 12);
  const std::vector<double> r0 = require("R0_rect", 9);
  const std::vector<double> tr = require("Tr_velo_to_cam", 12);

  CameraCalib calib;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      calib.proj(r, c) = p2[r * 4 + c];
      calib.lidar_to_cam(r, c) = tr[r * 4 + c];
    }
    for (int c = 0; c < 3; ++c) calib.rect(r, c) = r0[r * 3 + c];
  }
  calib.image_width = image_width;
  calib.image_height = image_height;
  return calib;
}

std::string FormatCalib(const CameraCalib& calib) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "P2:";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) out << ' ' << calib.proj(r, c);
  out << "\nR0_rect:";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out << ' ' << calib.rect(r, c);
  out << "\nTr_velo_to_cam:";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) out << ' ' << calib.lidar_to_cam(r, c);
  out << '\n';
  return out.str();
}

PixelPoint ProjectPoint(const CameraCalib& calib, const Eigen::Vector3d& p) {
  return ProjectPoints(calib, std::span<const Eigen::Vector3d>(&p, 1)).front();
}

std::vector<PixelPoint> ProjectPoints(const CameraCalib& calib,
                                      std::span<const Eigen::Vector3d> points) {
  const Eigen::Matrix<double, 3, 4> chain = calib.Chain();
  std::vector<PixelPoint> out;
  out.reserve(points.size());
  for (const Eigen::Vector3d& p : points) {
    const Eigen::Vector3d h = chain.leftCols<3>() * p + chain.col(3);
    PixelPoint pixel;
    pixel.depth = h.z();
    if (h.z() != 0.0) {
      pixel.u = h.x() / h.z();
      pixel.v = h.y() / h.z();
      pixel.in_front = h.z() > 0.0;
    }
    out.push_back(pixel);
  }
  return out;
}

Eigen::Vector3d BackProject(const CameraCalib& calib, const PixelPoint& pixel) {
  const Eigen::Matrix<double, 3, 4> chain = calib.Chain();
  const Eigen::Matrix3d m = chain.leftCols<3>();
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::kSingularCalib, "projection chain is singular");
  }
  const Eigen::Vector3d h(pixel.u * pixel.depth, pixel.v * pixel.depth,
                          pixel.depth);
  return lu.solve(h - chain.col(3));
}

bool InImage(const PixelPoint& pixel, int width, int height) {
  return pixel.in_front && pixel.u >= 0.0 && pixel.v >= 0.0 &&
         pixel.u <= width - 1 && pixel.v <= height - 1;
}

std::optional<Box2D> ProjectBoxToAabbUnclipped(const CameraCalib& calib,
                                               const Box3D& box) {
  if (!(box.dims.x() > 0.0 && box.dims.y() > 0.0 && box.dims.z() > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDims, "box dims must be positive");
  }
  const auto corners = box.Corners();
  const auto pixels = ProjectPoints(calib, corners);
  std::optional<Box2D> out;
  for (const PixelPoint& pixel : pixels) {
    if (!pixel.in_front) continue;
    if (!out) {
      out = Box2D{pixel.u, pixel.v, pixel.u, pixel.v, 0.0};
      continue;
    }
    out->u1 = std::min(out->u1, pixel.u);
    out->v1 = std::min(out->v1, pixel.v);
    out->u2 = std::max(out->u2, pixel.u);
    out->v2 = std::max(out->v2, pixel.v);
  }
  return out;
}

std::optional<Box2D> ProjectBoxToAabb(const CameraCalib& calib, const Box3D& box) {
  std::optional<Box2D> out = ProjectBoxToAabbUnclipped(calib, box);
  if (!out) return std::nullopt;
  const double width = calib.image_width;
  const double height = calib.image_height;
  out->u1 = std::clamp(out->u1, 0.0, width);
  out->u2 = std::clamp(out->u2, 0.0, width);
  out->v1 = std::clamp(out->v1, 0.0, height);
  out->v2 = std::clamp(out->v2, 0.0, height);
  if (!(out->u2 > out->u1 && out->v2 > out->v1)) return std::nullopt;
  return out;
}

}  // namespace dvf
