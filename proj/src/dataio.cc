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

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "dvf/error.h"

namespace dvf {
namespace {

void PutU32(std::string& out, std::uint32_t value) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((value >> (8 * b)) & 0xff));
}

std::uint32_t GetU32(std::string_view bytes, std::size_t offset) {
  std::uint32_t value = 0;
  for (int b = 0; b < 4; ++b) {
    value |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + b]))
             << (8 * b);
  }
  return value;
}

void PutF32(std::string& out, float value) { PutU32(out, std::bit_cast<std::uint32_t>(value)); }

float GetF32(std::string_view bytes, std::size_t offset) {
  return std::bit_cast<float>(GetU32(bytes, offset));
}

double WrapAngle(double angle) {
  angle = std::remainder(angle, 2.0 * std::numbers::pi);
  return angle;
}

std::vector<std::string_view> Tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t p = 0;
  while (true) {
    p = line.find_first_not_of(" \t\r", p);
    if (p == std::string_view::npos) break;
    std::size_t q = line.find_first_of(" \t\r", p);
    if (q == std::string_view::npos) q = line.size();
    out.push_back(line.substr(p, q - p));
    p = q;
  }
  return out;
}

// Uniform point on the five non-bottom faces of a box centered at the origin
// with yaw 0, weighted by face area.
Eigen::Vector3d SurfacePoint(const Eigen::Vector3d& dims, RandomStream& rng) {
  const double l = dims.x(), w = dims.y(), h = dims.z();
  const double areas[5] = {w * h, w * h, l * h, l * h, l * w};
  const double total = std::accumulate(std::begin(areas), std::end(areas), 0.0);
  double pick = rng.Uniform(0.0, total);
  int face = 0;
  while (face < 4 && pick >= areas[face]) pick -= areas[face++];
  const double a = rng.Uniform(-0.5, 0.5);
  const double b = rng.Uniform(-0.5, 0.5);
  switch (face) {
    case 0: return {0.5 * l, a * w, b * h};
    case 1: return {-0.5 * l, a * w, b * h};
    case 2: return {a * l, 0.5 * w, b * h};
    case 3: return {a * l, -0.5 * w, b * h};
    default: return {a * l, b * w, 0.5 * h};
  }
}

constexpr double kCarLength = 3.9;
constexpr double kCarWidth = 1.6;
constexpr double kCarHeight = 1.56;

Eigen::Vector3d CarDims(RandomStream& rng) {
  return {kCarLength * rng.Uniform(0.95, 1.05), kCarWidth * rng.Uniform(0.95, 1.05),
          kCarHeight * rng.Uniform(0.95, 1.05)};
}

int ObjectPointCount(double range) {
  const double ratio = 5.0 / std::max(range, 1.0);
  return static_cast<int>(std::lround(4000.0 * ratio * ratio));
}

}  // namespace

PointCloud ReadVelodyne(std::string_view bytes) {
  if (bytes.size() % 16 != 0) {
    throw Error(ErrorCode::kTruncatedFile,
                "velodyne payload of " + std::to_string(bytes.size()) +
                    " bytes is not a multiple of 16");
  }
  PointCloud points;
  points.reserve(bytes.size() / 16);
  for (std::size_t offset = 0; offset < bytes.size(); offset += 16) {
    LidarPoint point;
    point.position = Eigen::Vector3d(GetF32(bytes, offset), GetF32(bytes, offset + 4),
                                     GetF32(bytes, offset + 8));
    point.intensity = GetF32(bytes, offset + 12);
    points.push_back(point);
  }
  return points;
}

std::string EncodeVelodyne(const PointCloud& points) {
  std::string out;
  out.reserve(points.size() * 16);
  for (const LidarPoint& point : points) {
    PutF32(out, static_cast<float>(point.position.x()));
    PutF32(out, static_cast<float>(point.position.y()));
    PutF32(out, static_cast<float>(point.position.z()));
    PutF32(out, static_cast<float>(point.intensity));
  }
  return out;
}

std::vector<LabelRecord> ParseLabels(std::string_view text) {
  std::vector<LabelRecord> records;
  int line_number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::size_t stop = end == std::string_view::npos ? text.size() : end;
    const std::string_view line = text.substr(pos, stop - pos);
    pos = stop + 1;
    ++line_number;
    const auto tokens = Tokens(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 15 && tokens.size() != 16) {
      throw Error(ErrorCode::kWrongFieldCount,
                  "label line " + std::to_string(line_number) + " has " +
                      std::to_string(tokens.size()) + " fields, expected 15 or 16");
    }
    double values[16] = {};
    for (std::size_t f = 1; f < tokens.size(); ++f) {
      const std::string_view token = tokens[f];
      const auto [ptr, ec] =
          std::from_chars(token.data(), token.data() + token.size(), values[f]);
      if (ec != std::errc() || ptr != token.data() + token.size() ||
          !std::isfinite(values[f])) {
        throw Error(ErrorCode::kMalformedFloat,
                    "label line " + std::to_string(line_number) + ", field " +
                        std::to_string(f + 1) + ": '" + std::string(token) + "'");
      }
    }
    LabelRecord record;
    record.label = std::string(tokens[0]);
    record.truncation = values[1];
    record.occlusion = static_cast<int>(values[2]);
    record.alpha = values[3];
    record.bbox2d = Box2D{values[4], values[5], values[6], values[7], 0.0};
    record.dims = Eigen::Vector3d(values[8], values[9], values[10]);
    record.location = Eigen::Vector3d(values[11], values[12], values[13]);
    record.rotation_y = values[14];
    if (tokens.size() == 16) record.score = values[15];
    records.push_back(std::move(record));
  }
  return records;
}

std::string FormatLabels(const std::vector<LabelRecord>& records) {
  std::string out;
  for (const LabelRecord& r : records) {
    out += fmt::format("{} {:.2f} {} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} "
                       "{:.6f} {:.6f} {:.6f} {:.6f}",
                       r.label, r.truncation, r.occlusion, r.alpha, r.bbox2d.u1,
                       r.bbox2d.v1, r.bbox2d.u2, r.bbox2d.v2, r.dims.x(), r.dims.y(),
                       r.dims.z(), r.location.x(), r.location.y(), r.location.z(),
                       r.rotation_y);
    if (r.score) out += fmt::format(" {:.6f}", *r.score);
    out += '\n';
  }
  return out;
}

Box3D CameraBoxToLidar(const LabelRecord& record, const CameraCalib& calib) {
  const Eigen::Matrix4d to_rect = calib.LidarToRect();
  const Eigen::FullPivLU<Eigen::Matrix4d> lu(to_rect);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::kSingularCalib, "rect * lidar_to_cam is singular");
  }
  const double h = record.dims.x();
  // Camera y points down, so the box center sits h/2 above the bottom.
  const Eigen::Vector4d center_rect(record.location.x(), record.location.y() - 0.5 * h,
                                    record.location.z(), 1.0);
  const Eigen::Vector4d center = lu.solve(center_rect);
  Box3D box;
  box.center = center.head<3>() / center.w();
  box.dims = Eigen::Vector3d(record.dims.z(), record.dims.y(), h);
  box.yaw = WrapAngle(-record.rotation_y - 0.5 * std::numbers::pi);
  return box;
}

LabelRecord LidarBoxToCamera(const Box3D& box, const std::string& label,
                             const CameraCalib& calib) {
  const Eigen::Vector4d center_rect =
      calib.LidarToRect() * Eigen::Vector4d(box.center.x(), box.center.y(),
                                            box.center.z(), 1.0);
  LabelRecord record;
  record.label = label;
  record.dims = Eigen::Vector3d(box.dims.z(), box.dims.y(), box.dims.x());
  record.location = Eigen::Vector3d(center_rect.x(), center_rect.y() + 0.5 * box.dims.z(),
                                    center_rect.z());
  record.rotation_y = WrapAngle(-box.yaw - 0.5 * std::numbers::pi);
  record.alpha =
      WrapAngle(record.rotation_y - std::atan2(record.location.x(), record.location.z()));
  if (const auto aabb = ProjectBoxToAabb(calib, box)) {
    record.bbox2d = *aabb;
    record.bbox2d.confidence = 0.0;
  }
  return record;
}

Scene SyntheticScene(const SyntheticOptions& options) {
  if (options.n_objects < 0) {
    throw Error(ErrorCode::kInvalidConfig, "n_objects must be >= 0");
  }
  if (!options.object_ranges.empty() &&
      options.object_ranges.size() != static_cast<std::size_t>(options.n_objects)) {
    throw Error(ErrorCode::kInvalidConfig, "object_ranges must list one range per object");
  }
  RandomStream root(options.seed);
  RandomStream ground_rng = root.Split("ground");
  RandomStream object_rng = root.Split("objects");

  Scene scene;
  scene.calib = options.calib;
  const GridConfig& grid = options.grid;
  auto in_grid_xy = [&](const Eigen::Vector3d& p) {
    return p.x() >= grid.range_min.x() && p.x() < grid.range_max.x() &&
           p.y() >= grid.range_min.y() && p.y() < grid.range_max.y();
  };

  // Ground rings, geometrically spaced like the beams of a spinning LiDAR.
  constexpr double kHalfFov = 50.0 * std::numbers::pi / 180.0;
  constexpr double kAzimuthStep = 0.25 * std::numbers::pi / 180.0;
  for (double ring = 4.0; ring < grid.range_max.x(); ring *= 1.1) {
    for (double az = -kHalfFov; az <= kHalfFov; az += kAzimuthStep) {
      const double a = az + ground_rng.Uniform(-0.1, 0.1) * kAzimuthStep;
      const double d = ring * (1.0 + ground_rng.Uniform(-0.005, 0.005));
      LidarPoint point;
      point.position = Eigen::Vector3d(d * std::cos(a), d * std::sin(a),
                                       options.ground_z + ground_rng.Uniform(-0.02, 0.02));
      point.intensity = ground_rng.Uniform(0.1, 0.4);
      if (in_grid_xy(point.position)) scene.points.push_back(point);
    }
  }

  constexpr double kObjectHalfFov = 30.0 * std::numbers::pi / 180.0;
  for (int n = 0; n < options.n_objects; ++n) {
    RandomStream rng = object_rng.Split("object-" + std::to_string(n));
    Box3D box;
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      const double range = options.object_ranges.empty() ? rng.Uniform(8.0, 50.0)
                                                         : options.object_ranges[n];
      const double azimuth = rng.Uniform(-kObjectHalfFov, kObjectHalfFov);
      box.dims = CarDims(rng);
      box.center = Eigen::Vector3d(range * std::cos(azimuth), range * std::sin(azimuth),
                                   options.ground_z + 0.5 * box.dims.z());
      box.yaw = rng.Uniform(-std::numbers::pi, std::numbers::pi);
      placed = std::none_of(scene.gt_boxes.begin(), scene.gt_boxes.end(),
                            [&](const Box3D& other) { return BevIou(box, other) > 0.0; });
    }
    if (!placed) continue;

    const int count = ObjectPointCount(std::hypot(box.center.x(), box.center.y()));
    const double c = std::cos(box.yaw);
    const double s = std::sin(box.yaw);
    for (int i = 0; i < count; ++i) {
      const Eigen::Vector3d local = SurfacePoint(box.dims, rng);
      LidarPoint point;
      point.position = box.center + Eigen::Vector3d(c * local.x() - s * local.y(),
                                                    s * local.x() + c * local.y(), local.z());
      point.intensity = rng.Uniform(0.3, 0.9);
      scene.points.push_back(point);
    }
    scene.gt_boxes.push_back(box);
    scene.gt_classes.push_back("Car");
    scene.mask_visible.push_back(true);
  }
  return scene;
}

SampleDB SyntheticSampleDB(std::uint64_t seed, int count) {
  RandomStream root(seed);
  SampleDB db;
  for (int n = 0; n < count; ++n) {
    RandomStream rng = root.Split("sample-" + std::to_string(n));
    SampleEntry entry;
    entry.label = "Car";
    entry.box.dims = CarDims(rng);
    entry.box.center = Eigen::Vector3d(0.0, 0.0, -0.9 + 0.5 * entry.box.dims.z());
    const int points = ObjectPointCount(rng.Uniform(10.0, 30.0));
    for (int i = 0; i < points; ++i) {
      LidarPoint point;
      point.position = SurfacePoint(entry.box.dims, rng);
      point.intensity = rng.Uniform(0.3, 0.9);
      entry.points.push_back(point);
    }
    db.entries.push_back(std::move(entry));
  }
  return db;
}

std::string EncodePgm(const ForegroundHeatmap& map) {
  std::string out = fmt::format("P5\n{} {}\n255\n", map.width(), map.height());
  out.reserve(out.size() + map.values().size());
  for (const float v : map.values()) {
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
  }
  return out;
}

std::string EncodeDvfh(const ForegroundHeatmap& map) {
  std::string out = "DVFH";
  PutU32(out, static_cast<std::uint32_t>(map.width()));
  PutU32(out, static_cast<std::uint32_t>(map.height()));
  PutU32(out, 0);
  out.reserve(out.size() + 4 * map.values().size());
  for (const float v : map.values()) PutF32(out, v);
  return out;
}

ForegroundHeatmap DecodeDvfh(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != "DVFH") {
    throw Error(ErrorCode::kTruncatedFile, "missing DVFH header");
  }
  const std::uint32_t width = GetU32(bytes, 4);
  const std::uint32_t height = GetU32(bytes, 8);
  const std::uint64_t count = static_cast<std::uint64_t>(width) * height;
  if (bytes.size() != 16 + 4 * count) {
    throw Error(ErrorCode::kTruncatedFile,
                "DVFH payload size does not match " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  std::vector<float> values(count);
  for (std::uint64_t n = 0; n < count; ++n) values[n] = GetF32(bytes, 16 + 4 * n);
  return ForegroundHeatmap(static_cast<int>(width), static_cast<int>(height),
                           std::move(values));
}

std::string OverlayCsv(const CorrespondenceStats& stats) {
  std::string out = "level,u,v,rho\n";
  for (const OverlayRecord& r : stats.records) {
    out += fmt::format("{},{:.4f},{:.4f},{:.6f}\n", r.level, r.u, r.v, r.rho);
  }
  return out;
}

nlohmann::json StatsJson(const CorrespondenceStats& stats) {
  auto counts = [](const LevelCorrespondence& c) {
    return nlohmann::json{{"voxels", c.voxels},
                          {"in_image", c.in_image},
                          {"foreground", c.foreground},
                          {"background", c.background}};
  };
  nlohmann::json levels = nlohmann::json::array();
  for (const LevelCorrespondence& c : stats.levels) {
    nlohmann::json entry = counts(c);
    entry["level"] = c.level;
    levels.push_back(std::move(entry));
  }
  return {{"threshold", stats.threshold}, {"levels", levels}, {"total", counts(stats.total)}};
}

nlohmann::json DensityJson(const DensityReport& report) {
  auto ratio = [](const std::optional<double>& r) {
    return r ? nlohmann::json(*r) : nlohmann::json(nullptr);
  };
  auto bound = [](double v) {
    return std::isinf(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
  };
  nlohmann::json bins = nlohmann::json::array();
  for (const DensityBin& bin : report.bins) {
    bins.push_back({{"lo", bound(bin.bin.lo)},
                    {"hi", bound(bin.bin.hi)},
                    {"point_pixel", bin.point_pixel},
                    {"voxel_pixel", bin.voxel_pixel},
                    {"ratio", ratio(bin.ratio)}});
  }
  return {{"point_pixel", report.point_pixel},
          {"voxel_pixel", report.voxel_pixel},
          {"voxel_pixel_per_level", report.voxel_pixel_per_level},
          {"ratio", ratio(report.ratio)},
          {"bins", bins}};
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

SampleDB LoadSampleDB(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIo, "sample database " + dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> sidecars;
  for (const auto& item : std::filesystem::directory_iterator(dir)) {
    if (item.path().extension() == ".json") sidecars.push_back(item.path());
  }
  std::sort(sidecars.begin(), sidecars.end());
  SampleDB db;
  for (const auto& sidecar : sidecars) {
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(ReadFile(sidecar));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kIo, sidecar.string() + ": " + e.what());
    }
    SampleEntry entry;
    try {
      entry.label = meta.at("label").get<std::string>();
      const auto dims = meta.at("dims").get<std::vector<double>>();
      if (dims.size() != 3) throw Error(ErrorCode::kWrongCount, "dims needs 3 values");
      entry.box.dims = Eigen::Vector3d(dims[0], dims[1], dims[2]);
      entry.box.center = Eigen::Vector3d(0.0, 0.0, meta.at("center_z").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kIo, sidecar.string() + ": " + e.what());
    }
    auto bin = sidecar;
    bin.replace_extension(".bin");
    entry.points = ReadVelodyne(ReadFile(bin));
    db.entries.push_back(std::move(entry));
  }
  ValidateSampleDB(db);
  return db;
}

void SaveSampleDB(const SampleDB& db, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  for (std::size_t n = 0; n < db.entries.size(); ++n) {
    const SampleEntry& entry = db.entries[n];
    const std::string stem = fmt::format("{:06d}_{}", n, entry.label);
    nlohmann::json meta = {
        {"label", entry.label},
        {"dims", {entry.box.dims.x(), entry.box.dims.y(), entry.box.dims.z()}},
        {"center_z", entry.box.center.z()}};
    WriteFile(dir / (stem + ".json"), meta.dump(2) + "\n");
    WriteFile(dir / (stem + ".bin"), EncodeVelodyne(entry.points));
  }
}

}  // namespace dvf
