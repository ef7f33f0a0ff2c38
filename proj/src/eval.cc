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

#include "dvf/eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dvf/error.h"

namespace dvf {
namespace {

double Cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

double PolygonArea(const std::vector<Eigen::Vector2d>& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    twice += Cross(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * std::abs(twice);
}

void CheckBox(const Box3D& box) {
  if (!(box.dims.x() > 0.0 && box.dims.y() > 0.0 && box.dims.z() > 0.0) ||
      !box.dims.allFinite() || !box.center.allFinite() || !std::isfinite(box.yaw)) {
    throw Error(ErrorCode::kDegenerateBox, "box must have positive finite dims");
  }
}

double BevIntersection(const Box3D& a, const Box3D& b) {
  const auto pa = a.BevCorners();
  const auto pb = b.BevCorners();
  return ConvexIntersectionArea(pa, pb);
}

}  // namespace

double ConvexIntersectionArea(std::span<const Eigen::Vector2d> a,
                              std::span<const Eigen::Vector2d> b) {
  // Sutherland-Hodgman: clip `a` against each edge of convex `b`.
  std::vector<Eigen::Vector2d> poly(a.begin(), a.end());
  for (std::size_t e = 0; e < b.size() && !poly.empty(); ++e) {
    const Eigen::Vector2d& p0 = b[e];
    const Eigen::Vector2d& p1 = b[(e + 1) % b.size()];
    const Eigen::Vector2d edge = p1 - p0;
    std::vector<Eigen::Vector2d> clipped;
    clipped.reserve(poly.size() + 2);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Eigen::Vector2d& cur = poly[i];
      const Eigen::Vector2d& nxt = poly[(i + 1) % poly.size()];
      const double sc = Cross(edge, cur - p0);
      const double sn = Cross(edge, nxt - p0);
      if (sc >= 0.0) clipped.push_back(cur);
      if ((sc >= 0.0) != (sn >= 0.0)) {
        const double t = sc / (sc - sn);
        clipped.push_back(cur + t * (nxt - cur));
      }
    }
    poly = std::move(clipped);
  }
  if (poly.size() < 3) return 0.0;
  return PolygonArea(poly);
}

double BevIou(const Box3D& a, const Box3D& b) {
  CheckBox(a);
  CheckBox(b);
  const double area_a = a.dims.x() * a.dims.y();
  const double area_b = b.dims.x() * b.dims.y();
  const double inter = std::min(BevIntersection(a, b), std::min(area_a, area_b));
  return std::clamp(inter / (area_a + area_b - inter), 0.0, 1.0);
}

double Iou3d(const Box3D& a, const Box3D& b) {
  CheckBox(a);
  CheckBox(b);
  const double za0 = a.center.z() - 0.5 * a.dims.z();
  const double za1 = a.center.z() + 0.5 * a.dims.z();
  const double zb0 = b.center.z() - 0.5 * b.dims.z();
  const double zb1 = b.center.z() + 0.5 * b.dims.z();
  const double overlap = std::max(0.0, std::min(za1, zb1) - std::max(za0, zb0));
  const double vol_a = a.dims.prod();
  const double vol_b = b.dims.prod();
  const double area_inter = std::min(
      BevIntersection(a, b), std::min(a.dims.x() * a.dims.y(), b.dims.x() * b.dims.y()));
  const double inter = std::min(area_inter * overlap, std::min(vol_a, vol_b));
  return std::clamp(inter / (vol_a + vol_b - inter), 0.0, 1.0);
}

void ValidateEvalConfig(const EvalConfig& config) {
  for (const auto& [label, threshold] : config.iou_thresholds) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "IoU threshold for " + label + " must be in (0, 1]");
    }
  }
  if (config.recall_positions < 1) {
    throw Error(ErrorCode::kInvalidConfig, "recall_positions must be >= 1");
  }
  for (std::size_t i = 0; i < config.range_bins.size(); ++i) {
    const RangeBin& bin = config.range_bins[i];
    if (!(bin.lo < bin.hi) || bin.lo < 0.0) {
      throw Error(ErrorCode::kInvalidConfig, "range bins need 0 <= lo < hi");
    }
    if (i > 0 && bin.lo < config.range_bins[i - 1].hi) {
      throw Error(ErrorCode::kInvalidConfig, "range bins must be ordered and disjoint");
    }
  }
}

double ApR40(std::span<const Detection> detections,
             std::span<const GroundTruth> ground_truth, const std::string& label,
             const EvalConfig& config, IouKind kind) {
  const auto threshold_it = config.iou_thresholds.find(label);
  if (threshold_it == config.iou_thresholds.end()) {
    throw Error(ErrorCode::kUnknownClass, label);
  }
  const double threshold = threshold_it->second;

  std::vector<const GroundTruth*> gts;
  for (const GroundTruth& gt : ground_truth) {
    if (gt.label == label) gts.push_back(&gt);
  }
  std::vector<const Detection*> dets;
  for (const Detection& det : detections) {
    if (det.label == label) dets.push_back(&det);
  }
  const std::size_t num_gt = gts.size();
  if (num_gt == 0) return 0.0;
  std::stable_sort(dets.begin(), dets.end(), [](const Detection* a, const Detection* b) {
    return a->score > b->score;
  });

  std::vector<bool> matched(num_gt, false);
  // (tp, fp) at each distinct-score cutoff.
  std::vector<std::pair<std::size_t, std::size_t>> curve;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t d = 0; d < dets.size(); ++d) {
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < num_gt; ++g) {
      if (matched[g] || gts[g]->frame != dets[d]->frame) continue;
      const double iou = kind == IouKind::kBev ? BevIou(dets[d]->box, gts[g]->box)
                                               : Iou3d(dets[d]->box, gts[g]->box);
      if (iou >= threshold && iou > best_iou) {
        best = g;
        best_iou = iou;
      }
    }
    if (best) {
      matched[*best] = true;
      ++tp;
    } else {
      ++fp;
    }
    if (d + 1 == dets.size() || dets[d + 1]->score != dets[d]->score) {
      curve.emplace_back(tp, fp);
    }
  }

  const std::size_t positions = static_cast<std::size_t>(config.recall_positions);
  double sum = 0.0;
  for (std::size_t i = 1; i <= positions; ++i) {
    double best_precision = 0.0;
    for (const auto& [ctp, cfp] : curve) {
      // recall = ctp / num_gt >= i / positions, compared exactly.
      if (ctp * positions >= i * num_gt) {
        best_precision = std::max(
            best_precision, static_cast<double>(ctp) / static_cast<double>(ctp + cfp));
      }
    }
    sum += best_precision;
  }
  return sum / static_cast<double>(positions);
}

double BevRange(const Box3D& box) {
  return std::hypot(box.center.x(), box.center.y());
}

std::optional<std::size_t> BinOf(std::span<const RangeBin> bins, double range) {
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (range >= bins[i].lo && range < bins[i].hi) return i;
  }
  return std::nullopt;
}

std::vector<BinAp> RangeBinnedAp(std::span<const Detection> detections,
                                 std::span<const GroundTruth> ground_truth,
                                 const std::string& label,
                                 const EvalConfig& config, IouKind kind) {
  if (!config.iou_thresholds.contains(label)) {
    throw Error(ErrorCode::kUnknownClass, label);
  }
  const std::size_t num_bins = config.range_bins.size();
  std::vector<std::vector<Detection>> bin_dets(num_bins);
  std::vector<std::vector<GroundTruth>> bin_gts(num_bins);
  for (const Detection& det : detections) {
    if (det.label != label) continue;
    if (const auto bin = BinOf(config.range_bins, BevRange(det.box))) {
      bin_dets[*bin].push_back(det);
    }
  }
  for (const GroundTruth& gt : ground_truth) {
    if (gt.label != label) continue;
    if (const auto bin = BinOf(config.range_bins, BevRange(gt.box))) {
      bin_gts[*bin].push_back(gt);
    }
  }
  std::vector<BinAp> out;
  out.reserve(num_bins);
  for (std::size_t b = 0; b < num_bins; ++b) {
    BinAp entry;
    entry.bin = config.range_bins[b];
    entry.num_gt = bin_gts[b].size();
    entry.num_det = bin_dets[b].size();
    entry.empty = bin_gts[b].empty();
    entry.ap = entry.empty ? 0.0 : ApR40(bin_dets[b], bin_gts[b], label, config, kind);
    out.push_back(entry);
  }
  return out;
}

DensityReport DensityComparison(const Scene& scene,
                                std::span<const FusedLevel> fused,
                                const CameraCalib& calib,
                                std::span<const RangeBin> bins) {
  DensityReport report;
  report.bins.resize(bins.size());
  for (std::size_t b = 0; b < bins.size(); ++b) report.bins[b].bin = bins[b];

  const int width = calib.image_width;
  const int height = calib.image_height;
  for (const LidarPoint& point : scene.points) {
    const Eigen::Vector3d p = scene.applied_transform
                                  ? scene.applied_transform->Invert(point.position)
                                  : point.position;
    if (!InImage(ProjectPoint(calib, p), width, height)) continue;
    ++report.point_pixel;
    if (const auto bin = BinOf(bins, std::hypot(p.x(), p.y()))) {
      ++report.bins[*bin].point_pixel;
    }
  }
  for (const FusedLevel& level : fused) {
    std::size_t count = 0;
    for (std::size_t n = 0; n < level.size(); ++n) {
      if (!InImage(level.pixel_locs[n], width, height)) continue;
      ++count;
      const Eigen::Vector3d& c = level.centers[n];
      if (const auto bin = BinOf(bins, std::hypot(c.x(), c.y()))) {
        ++report.bins[*bin].voxel_pixel;
      }
    }
    report.voxel_pixel_per_level.push_back(count);
    report.voxel_pixel += count;
  }
  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  report.ratio = ratio(report.voxel_pixel, report.point_pixel);
  for (DensityBin& bin : report.bins) bin.ratio = ratio(bin.voxel_pixel, bin.point_pixel);
  return report;
}

bool PassesDifficulty(const DifficultyInputs& inputs, Difficulty difficulty) {
  struct Limits {
    double min_height;
    int max_occlusion;
    double max_truncation;
  };
  static constexpr Limits kLimits[] = {{40.0, 0, 0.15}, {25.0, 1, 0.30}, {25.0, 2, 0.50}};
  const Limits& limits = kLimits[static_cast<int>(difficulty)];
  return inputs.bbox_height >= limits.min_height &&
         inputs.occlusion <= limits.max_occlusion &&
         inputs.truncation <= limits.max_truncation;
}

}  // namespace dvf
