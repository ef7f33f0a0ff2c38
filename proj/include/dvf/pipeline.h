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

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "dvf/augment.h"
#include "dvf/eval.h"
#include "dvf/fusion.h"
#include "dvf/heatmap.h"
#include "dvf/voxelgrid.h"

namespace dvf {

// Run parameters. Defaults are the published training settings: a = 0.8,
// b = 1.0, K = 5 samples per class, 50% mask dropout, 4 levels and a
// foreground threshold of 0.9.
struct RunConfig {
  GridConfig grid;
  ConfidenceRange confidence;
  int k_samples = 5;
  double p_drop = 0.5;
  double point_drop = 0.0;
  double fg_threshold = 0.9;
  bool augment = true;
  AugmentRanges augment_ranges;
  std::uint64_t seed = 0;
};

// Throws kInvalidConfig / kInvalidRange.
void ValidateRunConfig(const RunConfig& config);

enum class FuseMode { kTrain, kInfer };

struct FuseInputs {
  // Scene in the sensor frame, without augmentation.
  Scene scene;
  FuseMode mode = FuseMode::kTrain;
  // Inference only.
  std::vector<Box2D> detections;
  // Training only; ground-truth sampling is skipped when empty.
  SampleDB sample_db;
};

struct FuseOutputs {
  // Scene after sampling, dropout and augmentation.
  Scene scene;
  std::vector<std::size_t> inserted;
  VoxelHierarchy hierarchy;
  ForegroundHeatmap heatmap;
  std::vector<FusedLevel> fused;
  CorrespondenceStats stats;
  DensityReport density;
};

// Training: drop points, ground-truth sample (K per class, in label order),
// mask dropout, global augmentation, voxelize, build the mask from the
// visible boxes mapped back to the sensor frame, fuse.
// Inference: drop points, voxelize, build the mask from detections, fuse.
// Every stochastic stage draws from its own split of RandomStream(seed).
FuseOutputs RunFuse(const FuseInputs& inputs, const RunConfig& config);

nlohmann::json FuseSummaryJson(const FuseOutputs& outputs, const RunConfig& config);

// heatmap.pgm, heatmap.dvfh, overlay.csv and stats.json under `dir`.
void WriteFuseOutputs(const FuseOutputs& outputs, const RunConfig& config,
                      const std::filesystem::path& dir);

}  // namespace dvf
