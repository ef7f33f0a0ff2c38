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

#include "dvf/pipeline.h"

#include <set>
#include <string>

#include "dvf/dataio.h"
#include "dvf/error.h"

namespace dvf {

void ValidateRunConfig(const RunConfig& config) {
  ValidateGridConfig(config.grid);
  if (config.grid.dilation_radius > 2) {
    throw Error(ErrorCode::kInvalidConfig, "dilation radius must be in [0, 2]");
  }
  ValidateConfidenceRange(config.confidence);
  if (config.k_samples < 0) {
    throw Error(ErrorCode::kInvalidConfig, "k_samples must be >= 0");
  }
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kInvalidRange, std::string(name) + " must be in [0, 1]");
    }
  };
  unit(config.p_drop, "p_drop");
  unit(config.point_drop, "point_drop");
  unit(config.fg_threshold, "fg_threshold");
  if (!(config.augment_ranges.scale_min > 0.0 &&
        config.augment_ranges.scale_min <= config.augment_ranges.scale_max &&
        config.augment_ranges.yaw_min <= config.augment_ranges.yaw_max)) {
    throw Error(ErrorCode::kInvalidConfig, "augmentation ranges are invalid");
  }
}

FuseOutputs RunFuse(const FuseInputs& inputs, const RunConfig& config) {
  ValidateRunConfig(config);
  inputs.scene.CheckConsistent();
  const RandomStream root(config.seed);
  const CameraCalib& calib = inputs.scene.calib;

  FuseOutputs out;
  out.scene = inputs.scene;
  if (config.point_drop > 0.0) {
    RandomStream rng = root.Split("point_drop");
    out.scene.points = DropPoints(out.scene.points, config.point_drop, rng);
  }

  if (inputs.mode == FuseMode::kTrain) {
    std::set<std::string> labels;
    for (const SampleEntry& entry : inputs.sample_db.entries) labels.insert(entry.label);
    for (const std::string& label : labels) {
      RandomStream rng = root.Split("gt_sample/" + label);
      GtSampleOptions options;
      options.k = config.k_samples;
      options.grid = config.grid;
      GtSampleResult sampled =
          GtSample(out.scene, inputs.sample_db.WithLabel(label), options, rng);
      out.scene = std::move(sampled.scene);
      out.inserted.insert(out.inserted.end(), sampled.inserted.begin(),
                          sampled.inserted.end());
    }
    RandomStream dropout_rng = root.Split("dropout");
    out.scene = DropoutMasks(out.scene, out.inserted, config.p_drop, dropout_rng);
    if (config.augment) {
      RandomStream rng = root.Split("augment");
      out.scene = ApplyTransform(out.scene, RandomTransform(config.augment_ranges, rng));
    }
  }

  out.hierarchy = BuildHierarchy(out.scene.points, config.grid);

  if (inputs.mode == FuseMode::kTrain) {
    std::vector<Box3D> sensor_boxes = out.scene.gt_boxes;
    if (out.scene.applied_transform) {
      for (Box3D& box : sensor_boxes) box = out.scene.applied_transform->Invert(box);
    }
    RandomStream rng = root.Split("confidence");
    out.heatmap = TrainingMask(calib, sensor_boxes, out.scene.mask_visible,
                               config.confidence, rng);
  } else {
    out.heatmap = InferenceMask(inputs.detections, calib.image_width, calib.image_height);
  }

  out.fused = FuseHierarchy(out.hierarchy, calib, out.heatmap, out.scene.applied_transform);
  out.stats = CorrespondenceReport(out.fused, calib.image_width, calib.image_height,
                                   config.fg_threshold);
  out.density = DensityComparison(out.scene, out.fused, calib, EvalConfig().range_bins);
  return out;
}

nlohmann::json FuseSummaryJson(const FuseOutputs& outputs, const RunConfig& config) {
  std::size_t visible_inserted = 0;
  for (const std::size_t n : outputs.inserted) {
    if (outputs.scene.mask_visible[n]) ++visible_inserted;
  }
  nlohmann::json transform = nullptr;
  if (outputs.scene.applied_transform) {
    const GlobalTransform& t = *outputs.scene.applied_transform;
    transform = {{"scale", t.scale}, {"yaw", t.yaw}, {"flip_x", t.flip_x}};
  }
  return {
      {"correspondences", StatsJson(outputs.stats)},
      {"density", DensityJson(outputs.density)},
      {"augmentation",
       {{"inserted", outputs.inserted.size()},
        {"inserted_visible", visible_inserted},
        {"boxes", outputs.scene.gt_boxes.size()},
        {"transform", transform}}},
      {"config",
       {{"seed", config.seed},
        {"levels", config.grid.num_levels},
        {"dilation", config.grid.dilation_radius},
        {"grid_res",
         {config.grid.resolution.x(), config.grid.resolution.y(),
          config.grid.resolution.z()}},
        {"conf_min", config.confidence.a},
        {"conf_max", config.confidence.b},
        {"k_samples", config.k_samples},
        {"p_drop", config.p_drop},
        {"point_drop", config.point_drop},
        {"fg_threshold", config.fg_threshold}}},
  };
}

void WriteFuseOutputs(const FuseOutputs& outputs, const RunConfig& config,
                      const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  WriteFile(dir / "heatmap.pgm", EncodePgm(outputs.heatmap));
  WriteFile(dir / "heatmap.dvfh", EncodeDvfh(outputs.heatmap));
  WriteFile(dir / "overlay.csv", OverlayCsv(outputs.stats));
  WriteFile(dir / "stats.json", FuseSummaryJson(outputs, config).dump(2) + "\n");
}

}  // namespace dvf
