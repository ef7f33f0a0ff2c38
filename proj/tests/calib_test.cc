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

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dvf/error.h"

namespace dvf {
namespace {

constexpr char kIdentityCalib[] =
    "P0: 1 0 0 0 0 1 0 0 0 0 1 0\n"
    "P2: 1 0 0 0 0 1 0 0 0 0 1 0\n"
    "R0_rect: 1 0 0 0 1 0 0 0 1\n"
    "Tr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n"
    "Tr_imu_to_velo: 1 0 0 0 0 1 0 0 0 0 1 0\n";

// Calibration of the 2011_09_26 KITTI drive (camera 2).
constexpr char kKittiCalib[] =
    "P0: 7.215377e+02 0.000000e+00 6.095593e+02 0.000000e+00 0.000000e+00 "
    "7.215377e+02 1.728540e+02 0.000000e+00 0.000000e+00 0.000000e+00 1.000000e+00 "
    "0.000000e+00\r\n"
    "P2: 7.215377e+02 0.000000e+00 6.095593e+02 4.485728e+01 0.000000e+00 "
    "7.215377e+02 1.728540e+02 2.163791e-01 0.000000e+00 0.000000e+00 1.000000e+00 "
    "2.745884e-03\r\n"
    "R0_rect: 9.999239e-01 9.837760e-03 -7.445048e-03 -9.869795e-03 9.999421e-01 "
    "-4.278459e-03 7.402527e-03 4.351614e-03 9.999631e-01\r\n"
    "Tr_velo_to_cam: 7.533745e-03 -9.999714e-01 -6.166020e-04 -4.069766e-03 "
    "1.480249e-02 7.280733e-04 -9.998902e-01 -7.631618e-02 9.998621e-01 "
    "7.523790e-03 1.480755e-02 -2.717806e-01\r\n";

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIo;
}

TEST(ParseCalibTest, IdentityChain) {
  const CameraCalib calib = ParseCalib(kIdentityCalib);
  EXPECT_EQ(calib.proj.row(0), Eigen::RowVector4d(1, 0, 0, 0));
  EXPECT_EQ(calib.rect, Eigen::Matrix4d::Identity());
  EXPECT_EQ(calib.lidar_to_cam, Eigen::Matrix4d::Identity());
  EXPECT_NO_THROW(ValidateCalib(calib));
}

TEST(ParseCalibTest, MissingKey) {
  const std::string text = "P2: 1 0 0 0 0 1 0 0 0 0 1 0\nTr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n";
  try {
    ParseCalib(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingKey);
    EXPECT_NE(std::string(e.what()).find("R0_rect"), std::string::npos);
  }
}

TEST(ParseCalibTest, MalformedFloatAndWrongCount) {
  std::string bad_float = kIdentityCalib;
  bad_float.replace(bad_float.find("R0_rect: 1"), 10, "R0_rect: x");
  EXPECT_EQ(CodeOf([&] { ParseCalib(bad_float); }), ErrorCode::kMalformedFloat);
  try {
    ParseCalib(bad_float);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3, column 1"), std::string::npos) << e.what();
  }

  std::string short_line = kIdentityCalib;
  short_line.replace(short_line.find("P2: 1 0 0 0"), 11, "P2: 1 0 0");
  EXPECT_EQ(CodeOf([&] { ParseCalib(short_line); }), ErrorCode::kWrongCount);
}

TEST(ParseCalibTest, KittiFileMatchesIndependentTokenization) {
  const CameraCalib calib = ParseCalib(kKittiCalib);
  EXPECT_DOUBLE_EQ(calib.proj(0, 0), 721.5377);

  // Hand-read every P2 / Tr value with stream extraction.
  std::istringstream lines(kKittiCalib);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    std::vector<double> values;
    double v;
    while (fields >> v) values.push_back(v);
    if (key == "P2:") {
      for (int i = 0; i < 12; ++i) EXPECT_EQ(calib.proj(i / 4, i % 4), values[i]);
    } else if (key == "Tr_velo_to_cam:") {
      for (int i = 0; i < 12; ++i) EXPECT_EQ(calib.lidar_to_cam(i / 4, i % 4), values[i]);
    } else if (key == "R0_rect:") {
      for (int i = 0; i < 9; ++i) EXPECT_EQ(calib.rect(i / 3, i % 3), values[i]);
    }
  }
  EXPECT_EQ(calib.lidar_to_cam.row(3), Eigen::RowVector4d(0, 0, 0, 1));
  EXPECT_EQ(calib.rect.row(3), Eigen::RowVector4d(0, 0, 0, 1));
  EXPECT_EQ(calib.rect(3, 3), 1.0);
  EXPECT_NO_THROW(ValidateCalib(calib));
}

TEST(ParseCalibTest, FormatRoundTrip) {
  const CameraCalib calib = KittiReferenceCalib();
  const CameraCalib parsed = ParseCalib(FormatCalib(calib));
  EXPECT_EQ(parsed.proj, calib.proj);
  EXPECT_EQ(parsed.rect, calib.rect);
  EXPECT_EQ(parsed.lidar_to_cam, calib.lidar_to_cam);
}

TEST(ValidateCalibTest, RejectsBrokenInvariants) {
  CameraCalib calib;
  calib.lidar_to_cam(0, 0) = 1.1;
  EXPECT_EQ(CodeOf([&] { ValidateCalib(calib); }), ErrorCode::kInvalidConfig);
  calib = CameraCalib();
  calib.rect(3, 0) = 1.0;
  EXPECT_EQ(CodeOf([&] { ValidateCalib(calib); }), ErrorCode::kInvalidConfig);
  calib = CameraCalib();
  calib.image_width = 0;
  EXPECT_EQ(CodeOf([&] { ValidateCalib(calib); }), ErrorCode::kInvalidConfig);
}

TEST(ProjectPointsTest, OpticalAxis) {
  const CameraCalib calib = PinholeCalib(1.0, 0.0, 0.0, 10, 10);
  const PixelPoint px = ProjectPoint(calib, {0, 0, 5});
  EXPECT_EQ(px.u, 0.0);
  EXPECT_EQ(px.v, 0.0);
  EXPECT_EQ(px.depth, 5.0);
  EXPECT_TRUE(px.in_front);
}

TEST(ProjectPointsTest, BehindCameraAndZeroDepth) {
  const CameraCalib calib = PinholeCalib(100.0, 50.0, 40.0, 100, 80);
  EXPECT_FALSE(ProjectPoint(calib, {1, 1, -3}).in_front);
  const PixelPoint zero = ProjectPoint(calib, {1, 1, 0});
  EXPECT_FALSE(zero.in_front);
  EXPECT_EQ(zero.u, 0.0);
  EXPECT_EQ(zero.v, 0.0);
}

TEST(ProjectPointsTest, PinholeFormula) {
  // u = 100 * 1 / 10 + 50 = 60, v = 100 * 2 / 10 + 40 = 60.
  const CameraCalib calib = PinholeCalib(100.0, 50.0, 40.0, 100, 80);
  const PixelPoint px = ProjectPoint(calib, {1, 2, 10});
  EXPECT_DOUBLE_EQ(px.u, 60.0);
  EXPECT_DOUBLE_EQ(px.v, 60.0);
  EXPECT_DOUBLE_EQ(px.depth, 10.0);
}

TEST(ProjectPointsTest, PreservesOrderAndRoundTrips) {
  const CameraCalib calib = KittiReferenceCalib();
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> x(1.0, 80.0), yz(-20.0, 20.0);
  std::vector<Eigen::Vector3d> points;
  for (int i = 0; i < 500; ++i) points.emplace_back(x(gen), yz(gen), yz(gen));
  const auto pixels = ProjectPoints(calib, points);
  ASSERT_EQ(pixels.size(), points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    EXPECT_EQ(pixels[i].u, ProjectPoint(calib, points[i]).u);
    if (!pixels[i].in_front) continue;
    const Eigen::Vector3d back = BackProject(calib, pixels[i]);
    EXPECT_LE((back - points[i]).norm(), 1e-6 * points[i].norm());
  }
}

TEST(ProjectBoxTest, SymmetricAroundPrincipalPoint) {
  const CameraCalib calib = PinholeCalib(100.0, 50.0, 50.0, 100, 100);
  Box3D cube;
  cube.center = {0, 0, 10};
  cube.dims = {2, 2, 2};
  const auto box = ProjectBoxToAabb(calib, cube);
  ASSERT_TRUE(box);
  EXPECT_NEAR(50.0 - box->u1, box->u2 - 50.0, 1e-12);
  EXPECT_NEAR(50.0 - box->v1, box->v2 - 50.0, 1e-12);
}

TEST(ProjectBoxTest, UnitCubeMatchesHandProjection) {
  // Nearest face at z = 9.5: u in [50 - 50/9.5, 50 + 50/9.5].
  const CameraCalib calib = PinholeCalib(100.0, 50.0, 50.0, 100, 100);
  Box3D cube;
  cube.center = {0, 0, 10};
  cube.dims = {1, 1, 1};
  const auto box = ProjectBoxToAabb(calib, cube);
  ASSERT_TRUE(box);
  EXPECT_NEAR(box->u1, 44.736842105263158, 1e-9);
  EXPECT_NEAR(box->u2, 55.263157894736842, 1e-9);
  EXPECT_NEAR(box->v1, 44.736842105263158, 1e-9);
  EXPECT_NEAR(box->v2, 55.263157894736842, 1e-9);
  EXPECT_EQ(box->confidence, 0.0);
}

TEST(ProjectBoxTest, BehindCameraIsNotVisible) {
  const CameraCalib calib = PinholeCalib(100.0, 50.0, 50.0, 100, 100);
  Box3D box;
  box.center = {0, 0, -10};
  EXPECT_FALSE(ProjectBoxToAabb(calib, box));
}

TEST(ProjectBoxTest, OffImageIsNotVisible) {
  const CameraCalib calib = PinholeCalib(100.0, 50.0, 50.0, 100, 100);
  Box3D box;
  box.center = {30, 0, 10};
  EXPECT_FALSE(ProjectBoxToAabb(calib, box));
}

TEST(ProjectBoxTest, StraddlingBoxUsesInFrontCornersAndClips) {
  const CameraCalib calib = PinholeCalib(100.0, 50.0, 50.0, 100, 100);
  Box3D box;
  box.center = {0, 0, 0.5};
  box.dims = {2, 2, 2};
  const auto aabb = ProjectBoxToAabb(calib, box);
  ASSERT_TRUE(aabb);
  EXPECT_EQ(aabb->u1, 0.0);
  EXPECT_EQ(aabb->u2, 100.0);
}

TEST(ProjectBoxTest, NonPositiveDims) {
  const CameraCalib calib = PinholeCalib(100.0, 50.0, 50.0, 100, 100);
  Box3D box;
  box.center = {0, 0, 10};
  box.dims = {1, 0, 1};
  EXPECT_EQ(CodeOf([&] { ProjectBoxToAabb(calib, box); }), ErrorCode::kNonPositiveDims);
}

TEST(ProjectBoxTest, ContainsInFrontCornersAndClipsInsideImage) {
  const CameraCalib calib = KittiReferenceCalib();
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> x(-5.0, 60.0), y(-30.0, 30.0), z(-2.0, 1.0),
      d(0.3, 5.0), yaw(-3.2, 3.2);
  for (int i = 0; i < 300; ++i) {
    Box3D box;
    box.center = {x(gen), y(gen), z(gen)};
    box.dims = {d(gen), d(gen), d(gen)};
    box.yaw = yaw(gen);
    const auto unclipped = ProjectBoxToAabbUnclipped(calib, box);
    if (unclipped) {
      for (const PixelPoint& px : ProjectPoints(calib, box.Corners())) {
        if (!px.in_front) continue;
        EXPECT_GE(px.u, unclipped->u1);
        EXPECT_LE(px.u, unclipped->u2);
        EXPECT_GE(px.v, unclipped->v1);
        EXPECT_LE(px.v, unclipped->v2);
      }
    }
    if (const auto clipped = ProjectBoxToAabb(calib, box)) {
      EXPECT_GE(clipped->u1, 0.0);
      EXPECT_LE(clipped->u2, calib.image_width);
      EXPECT_GE(clipped->v1, 0.0);
      EXPECT_LE(clipped->v2, calib.image_height);
    }
  }
}

}  // namespace
}  // namespace dvf
