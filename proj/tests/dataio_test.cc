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

#include "dvf/dataio.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dvf/error.h"
#include "dvf/eval.h"

namespace dvf {
namespace {

ErrorCode CodeOf(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

std::string Float32Bytes(std::initializer_list<float> values) {
  std::string out;
  for (const float v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
  }
  return out;
}

double AabbIou(const Box2D& a, const Box2D& b) {
  const double iw = std::max(0.0, std::min(a.u2, b.u2) - std::max(a.u1, b.u1));
  const double ih = std::max(0.0, std::min(a.v2, b.v2) - std::max(a.v1, b.v1));
  const double inter = iw * ih;
  return inter / (a.Area() + b.Area() - inter);
}

CameraCalib IdentityCalib() { return PinholeCalib(700, 600, 180, 1242, 375); }

TEST(VelodyneTest, FixedSizes) {
  EXPECT_TRUE(ReadVelodyne("").empty());
  const PointCloud one = ReadVelodyne(Float32Bytes({1.0f, 2.0f, 3.0f, 0.5f}));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].position, Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(one[0].intensity, 0.5);
  EXPECT_EQ(CodeOf([] { ReadVelodyne(std::string(17, '\0')); }), ErrorCode::kTruncatedFile);
}

TEST(VelodyneTest, RandomRoundTripIsBitExact) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 20; ++trial) {
    std::string bytes;
    const int n = static_cast<int>(gen() % 500);
    for (int i = 0; i < 4 * n; ++i) {
      const float v = std::uniform_real_distribution<float>(-80.0f, 80.0f)(gen);
      bytes += Float32Bytes({v});
    }
    const PointCloud cloud = ReadVelodyne(bytes);
    ASSERT_EQ(cloud.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(EncodeVelodyne(cloud), bytes);
  }
}

constexpr char kCarLine[] =
    "Car 0.00 0 -1.57 599.41 156.40 629.75 189.25 2.85 2.63 12.34 0.47 1.49 69.44 -1.56";

TEST(LabelsTest, ParsesWellFormedLines) {
  EXPECT_TRUE(ParseLabels("").empty());
  const auto records = ParseLabels(std::string(kCarLine) + "\n\nDontCare -1 -1 -10 503.89 "
                                   "169.71 590.61 190.13 -1 -1 -1 -1000 -1000 -1000 -10\n");
  ASSERT_EQ(records.size(), 2u);
  const LabelRecord& car = records[0];
  EXPECT_EQ(car.label, "Car");
  EXPECT_EQ(car.bbox2d.u1, 599.41);
  EXPECT_EQ(car.dims, Eigen::Vector3d(2.85, 2.63, 12.34));
  EXPECT_EQ(car.location, Eigen::Vector3d(0.47, 1.49, 69.44));
  EXPECT_EQ(car.rotation_y, -1.56);
  EXPECT_FALSE(car.score.has_value());
  EXPECT_EQ(records[1].label, "DontCare");
}

TEST(LabelsTest, SixteenthFieldIsScore) {
  const auto records = ParseLabels(std::string(kCarLine) + " 0.93\n");
  ASSERT_EQ(records.size(), 1u);
  ASSERT_TRUE(records[0].score.has_value());
  EXPECT_EQ(*records[0].score, 0.93);
}

TEST(LabelsTest, Malformations) {
  EXPECT_EQ(CodeOf([] { ParseLabels("Car 0 0 0 1 2 3 4 5 6 7 8 9 10\n"); }),
            ErrorCode::kWrongFieldCount);
  EXPECT_EQ(CodeOf([] { ParseLabels(std::string(kCarLine) + " 0.9 1\n"); }),
            ErrorCode::kWrongFieldCount);
  EXPECT_EQ(CodeOf([] { ParseLabels("Car 0 0 0 1 2 3 4 5 6 abc 8 9 10 11\n"); }),
            ErrorCode::kMalformedFloat);
  try {
    ParseLabels("\nCar 0 0 0 1 2 3 4 5 6 7 8 9 10 x\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2, field 15"), std::string::npos) << e.what();
  }
}

TEST(LabelsTest, FormatRoundTrip) {
  const auto records = ParseLabels(std::string(kCarLine) + " 0.5\n");
  const auto again = ParseLabels(FormatLabels(records));
  ASSERT_EQ(again.size(), 1u);
  EXPECT_NEAR((again[0].location - records[0].location).norm(), 0.0, 1e-9);
  EXPECT_EQ(again[0].score, records[0].score);
}

TEST(FrameConversionTest, IdentityChainLiftsCenter) {
  LabelRecord record;
  record.label = "Car";
  record.dims = Eigen::Vector3d(2.0, 1.6, 4.0);
  record.location = Eigen::Vector3d(0, 0, 10);
  const Box3D box = CameraBoxToLidar(record, IdentityCalib());
  EXPECT_NEAR((box.center - Eigen::Vector3d(0, -1, 10)).norm(), 0.0, 1e-12);
  EXPECT_EQ(box.dims, Eigen::Vector3d(4.0, 1.6, 2.0));
}

TEST(FrameConversionTest, RoundTripThroughCameraFrame) {
  const CameraCalib calib = KittiReferenceCalib();
  RandomStream rng(6);
  for (int n = 0; n < 200; ++n) {
    const Box3D box{{rng.Uniform(5, 60), rng.Uniform(-20, 20), rng.Uniform(-1.5, 0.5)},
                    {rng.Uniform(3, 5), rng.Uniform(1.4, 2), rng.Uniform(1.3, 1.8)},
                    rng.Uniform(-std::numbers::pi, std::numbers::pi)};
    const Box3D back = CameraBoxToLidar(LidarBoxToCamera(box, "Car", calib), calib);
    EXPECT_LT((back.center - box.center).norm(), 1e-6);
    EXPECT_LT((back.dims - box.dims).norm(), 1e-12);
    EXPECT_NEAR(std::remainder(back.yaw - box.yaw, 2 * std::numbers::pi), 0.0, 1e-9);
  }
}

TEST(FrameConversionTest, SingularCalib) {
  CameraCalib calib = IdentityCalib();
  calib.rect.setZero();
  EXPECT_EQ(CodeOf([&] { CameraBoxToLidar(LabelRecord{}, calib); }),
            ErrorCode::kSingularCalib);
}

TEST(FrameConversionTest, ProjectedAabbAgreesWithLabelBbox) {
  // Pedestrian from KITTI training frame 000000, whose calibration is the
  // reference calibration.
  const auto records = ParseLabels(
      "Pedestrian 0.00 0 -0.20 712.40 143.00 810.73 307.92 1.89 0.48 1.20 1.84 1.47 8.41 "
      "0.01\n");
  const CameraCalib calib = KittiReferenceCalib();
  const Box3D box = CameraBoxToLidar(records[0], calib);
  const auto aabb = ProjectBoxToAabb(calib, box);
  ASSERT_TRUE(aabb.has_value());
  EXPECT_GT(AabbIou(*aabb, records[0].bbox2d), 0.5);

  // Synthesized labels carry the projected AABB as bbox2d.
  SyntheticOptions options;
  options.seed = 4;
  options.n_objects = 3;
  const Scene scene = SyntheticScene(options);
  for (const Box3D& b : scene.gt_boxes) {
    const LabelRecord record = LidarBoxToCamera(b, "Car", scene.calib);
    const auto projected = ProjectBoxToAabb(scene.calib, CameraBoxToLidar(record, scene.calib));
    ASSERT_TRUE(projected.has_value());
    EXPECT_GT(AabbIou(*projected, record.bbox2d), 0.99);
  }
}

TEST(SyntheticSceneTest, NoObjectsMeansGroundOnly) {
  SyntheticOptions options;
  options.seed = 1;
  const Scene scene = SyntheticScene(options);
  EXPECT_TRUE(scene.gt_boxes.empty());
  EXPECT_GT(scene.points.size(), 1000u);
  for (const LidarPoint& p : scene.points) EXPECT_NEAR(p.position.z(), options.ground_z, 0.05);
}

TEST(SyntheticSceneTest, Deterministic) {
  SyntheticOptions options;
  options.seed = 7;
  options.n_objects = 3;
  const Scene a = SyntheticScene(options);
  const Scene b = SyntheticScene(options);
  EXPECT_EQ(EncodeVelodyne(a.points), EncodeVelodyne(b.points));
  ASSERT_EQ(a.gt_boxes.size(), 3u);
  for (std::size_t n = 0; n < 3; ++n) EXPECT_EQ(a.gt_boxes[n].center, b.gt_boxes[n].center);
  options.seed = 8;
  EXPECT_NE(EncodeVelodyne(SyntheticScene(options).points), EncodeVelodyne(a.points));
}

TEST(SyntheticSceneTest, DensityFallsWithRange) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticOptions options;
    options.seed = seed;
    options.n_objects = 3;
    options.object_ranges = {10.0, 25.0, 45.0};
    const Scene scene = SyntheticScene(options);
    ASSERT_EQ(scene.gt_boxes.size(), 3u);
    std::vector<int> counts(3, 0);
    for (const LidarPoint& p : scene.points) {
      for (int k = 0; k < 3; ++k) counts[k] += scene.gt_boxes[k].Contains(p.position, 1e-6);
    }
    EXPECT_GT(counts[0], counts[1]);
    EXPECT_GT(counts[1], counts[2]);
    EXPECT_GT(counts[2], 0);
  }
}

TEST(SyntheticSceneTest, BoxesAreInFrontAndDisjoint) {
  SyntheticOptions options;
  options.seed = 12;
  options.n_objects = 6;
  const Scene scene = SyntheticScene(options);
  for (std::size_t i = 0; i < scene.gt_boxes.size(); ++i) {
    EXPECT_TRUE(ProjectBoxToAabb(scene.calib, scene.gt_boxes[i]).has_value());
    for (std::size_t j = i + 1; j < scene.gt_boxes.size(); ++j) {
      EXPECT_EQ(BevIou(scene.gt_boxes[i], scene.gt_boxes[j]), 0.0);
    }
  }
}

TEST(HeatmapFormatTest, PgmOfOnesIsAll255) {
  const ForegroundHeatmap map(5, 3, std::vector<float>(15, 1.0f));
  const std::string pgm = EncodePgm(map);
  const std::string header = "P5\n5 3\n255\n";
  ASSERT_EQ(pgm.size(), header.size() + 15);
  EXPECT_EQ(pgm.substr(0, header.size()), header);
  for (std::size_t n = header.size(); n < pgm.size(); ++n) {
    EXPECT_EQ(static_cast<unsigned char>(pgm[n]), 255);
  }
}

TEST(HeatmapFormatTest, DvfhRoundTripIsBitExact) {
  std::mt19937_64 gen(3);
  std::vector<float> values(40 * 30);
  for (float& v : values) v = std::uniform_real_distribution<float>(0.0f, 1.0f)(gen);
  const ForegroundHeatmap map(40, 30, values);
  const std::string bytes = EncodeDvfh(map);
  EXPECT_EQ(bytes.size(), 16u + 4u * 1200u);
  EXPECT_EQ(bytes.substr(0, 4), "DVFH");
  EXPECT_EQ(DecodeDvfh(bytes), map);
  EXPECT_EQ(CodeOf([&] { DecodeDvfh(bytes.substr(0, bytes.size() - 1)); }),
            ErrorCode::kTruncatedFile);
}

TEST(StatsFormatTest, EmptyStatsAreValidJson) {
  const CorrespondenceStats stats = CorrespondenceReport({}, 10, 10, 0.9);
  const nlohmann::json json = nlohmann::json::parse(StatsJson(stats).dump());
  EXPECT_EQ(json["total"]["in_image"], 0);
  EXPECT_EQ(json["total"]["foreground"], 0);
  EXPECT_TRUE(json["levels"].empty());
  EXPECT_EQ(OverlayCsv(stats), "level,u,v,rho\n");
}

TEST(StatsFormatTest, OverlayRows) {
  CorrespondenceStats stats;
  stats.records = {{2, 10.5, 20.25, 0.875}};
  EXPECT_EQ(OverlayCsv(stats), "level,u,v,rho\n2,10.5000,20.2500,0.875000\n");
}

TEST(FileTest, MissingFileReportsPath) {
  try {
    ReadFile("/nonexistent/dir/file.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/file.bin"), std::string::npos);
  }
}

TEST(SampleDbTest, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "dvf_sample_db_test";
  std::filesystem::remove_all(dir);
  const SampleDB db = SyntheticSampleDB(9, 4);
  EXPECT_NO_THROW(ValidateSampleDB(db));
  SaveSampleDB(db, dir);
  const SampleDB loaded = LoadSampleDB(dir);
  ASSERT_EQ(loaded.entries.size(), db.entries.size());
  for (std::size_t n = 0; n < db.entries.size(); ++n) {
    EXPECT_EQ(loaded.entries[n].label, db.entries[n].label);
    EXPECT_EQ(loaded.entries[n].points.size(), db.entries[n].points.size());
    EXPECT_NEAR((loaded.entries[n].box.dims - db.entries[n].box.dims).norm(), 0.0, 1e-12);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace dvf
