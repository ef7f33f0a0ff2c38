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

#include "dvf/augment.h"

#include <cmath>
#include <numbers>
#include <string>

#include "dvf/error.h"
#include "dvf/eval.h"

namespace dvf {
namespace {

Eigen::Vector3d RotateZ(const Eigen::Vector3d& p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z()};
}

}  // namespace

Eigen::Vector3d GlobalTransform::Apply(const Eigen::Vector3d& p) const {
  Eigen::Vector3d out = RotateZ(scale * p, yaw);
  if (flip_x) out.y() = -out.y();
  return out;
}

Eigen::Vector3d GlobalTransform::Invert(const Eigen::Vector3d& p) const {
  Eigen::Vector3d out = p;
  if (flip_x) out.y() = -out.y();
  return RotateZ(out, -yaw) / scale;
}

Box3D GlobalTransform::Apply(const Box3D& box) const {
  Box3D out;
  out.center = Apply(box.center);
  out.dims = box.dims * scale;
  out.yaw = box.yaw + yaw;
  if (flip_x) out.yaw = -out.yaw;
  return out;
}

Box3D GlobalTransform::Invert(const Box3D& box) const {
  Box3D out;
  out.center = Invert(box.center);
  out.dims = box.dims / scale;
  out.yaw = (flip_x ? -box.yaw : box.yaw) - yaw;
  return out;
}

void ValidateTransform(const GlobalTransform& t) {
  if (!(t.scale > 0.0) || !std::isfinite(t.scale) || !std::isfinite(t.yaw)) {
    throw Error(ErrorCode::kInvalidConfig,
                "transform needs scale > 0 and a finite yaw");
  }
}

GlobalTransform RandomTransform(const AugmentRanges& ranges, RandomStream& rng) {
  GlobalTransform t;
  t.scale = rng.Uniform(ranges.scale_min, ranges.scale_max);
  t.yaw = rng.Uniform(ranges.yaw_min, ranges.yaw_max);
  t.flip_x = rng.Bernoulli(0.5);
  ValidateTransform(t);
  return t;
}

void Scene::CheckConsistent() const {
  if (mask_visible.size() != gt_boxes.size() ||
      gt_classes.size() != gt_boxes.size()) {
    throw Error(ErrorCode::kDimMismatch,
                "scene has " + std::to_string(gt_boxes.size()) + " boxes, " +
                    std::to_string(gt_classes.size()) + " classes and " +
                    std::to_string(mask_visible.size()) + " visibility flags");
  }
}

Scene ApplyTransform(const Scene& scene, const GlobalTransform& t) {
  if (scene.applied_transform) {
    throw Error(ErrorCode::kAlreadyTransformed,
                "scene already carries a global transform");
  }
  ValidateTransform(t);
  Scene out = scene;
  for (LidarPoint& point : out.points) point.position = t.Apply(point.position);
  for (Box3D& box : out.gt_boxes) box = t.Apply(box);
  out.applied_transform = t;
  return out;
}

std::vector<Eigen::Vector3d> InvertPoints(const GlobalTransform& t,
                                          std::span<const Eigen::Vector3d> points) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(points.size());
  for (const Eigen::Vector3d& p : points) out.push_back(t.Invert(p));
  return out;
}

SampleDB SampleDB::WithLabel(std::string_view label) const {
  SampleDB out;
  for (const SampleEntry& entry : entries) {
    if (entry.label == label) out.entries.push_back(entry);
  }
  return out;
}

void ValidateSampleDB(const SampleDB& db) {
  for (std::size_t n = 0; n < db.entries.size(); ++n) {
    const SampleEntry& entry = db.entries[n];
    Box3D canonical = entry.box;
    canonical.center = Eigen::Vector3d::Zero();
    canonical.yaw = 0.0;
    for (const LidarPoint& point : entry.points) {
      if (!canonical.Contains(point.position, 1e-6)) {
        throw Error(ErrorCode::kInvalidConfig,
                    "sample " + std::to_string(n) + " has a point outside its box");
      }
    }
  }
}

GtSampleResult GtSample(const Scene& scene, const SampleDB& db,
                        const GtSampleOptions& options, RandomStream& rng) {
  scene.CheckConsistent();
  if (options.k < 0) {
    throw Error(ErrorCode::kInvalidConfig, "k must be >= 0");
  }
  GtSampleResult result;
  result.scene = scene;
  if (options.k == 0 || db.entries.empty()) return result;

  const int budget = options.max_attempts > 0 ? options.max_attempts : 10 * options.k;
  int accepted = 0;
  const Eigen::Vector3d& lo = options.grid.range_min;
  const Eigen::Vector3d& hi = options.grid.range_max;
  while (accepted < options.k && result.attempts < budget) {
    ++result.attempts;
    const SampleEntry& entry = db.entries[rng.Index(db.entries.size())];
    const double yaw = rng.Uniform(-std::numbers::pi, std::numbers::pi);
    const double radius = 0.5 * std::hypot(entry.box.dims.x(), entry.box.dims.y());
    const double x_lo = lo.x() + radius, x_hi = hi.x() - radius;
    const double y_lo = lo.y() + radius, y_hi = hi.y() - radius;
    if (x_lo > x_hi || y_lo > y_hi) continue;
    Box3D candidate = entry.box;
    candidate.center.x() = rng.Uniform(x_lo, x_hi);
    candidate.center.y() = rng.Uniform(y_lo, y_hi);
    candidate.yaw = yaw;

    bool collides = false;
    for (const Box3D& existing : result.scene.gt_boxes) {
      if (BevIou(candidate, existing) > 0.0) {
        collides = true;
        break;
      }
    }
    if (collides) continue;

    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    for (const LidarPoint& point : entry.points) {
      const Eigen::Vector3d& p = point.position;
      LidarPoint placed;
      placed.position = Eigen::Vector3d(c * p.x() - s * p.y(), s * p.x() + c * p.y(),
                                        p.z()) +
                        candidate.center;
      placed.intensity = point.intensity;
      result.scene.points.push_back(placed);
    }
    result.inserted.push_back(result.scene.gt_boxes.size());
    result.scene.gt_boxes.push_back(candidate);
    result.scene.gt_classes.push_back(entry.label);
    result.scene.mask_visible.push_back(true);
    ++accepted;
  }
  return result;
}

Scene DropoutMasks(const Scene& scene, std::span<const std::size_t> inserted,
                   double p_drop, RandomStream& rng) {
  scene.CheckConsistent();
  if (!(p_drop >= 0.0 && p_drop <= 1.0)) {
    throw Error(ErrorCode::kInvalidRange, "p_drop must be in [0, 1]");
  }
  Scene out = scene;
  for (const std::size_t index : inserted) {
    if (index >= out.gt_boxes.size()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "box index " + std::to_string(index) + " of " +
                      std::to_string(out.gt_boxes.size()));
    }
    if (rng.Bernoulli(p_drop)) out.mask_visible[index] = false;
  }
  return out;
}

PointCloud DropPoints(const PointCloud& points, double fraction,
                      RandomStream& rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidRange, "point-drop fraction must be in [0, 1]");
  }
  PointCloud out;
  out.reserve(points.size());
  for (const LidarPoint& point : points) {
    if (!rng.Bernoulli(fraction)) out.push_back(point);
  }
  return out;
}

}  // namespace dvf
