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

#include "dvf/cli.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "dvf/calib.h"
#include "dvf/dataio.h"
#include "dvf/error.h"
#include "dvf/eval.h"
#include "dvf/pipeline.h"
#include "dvf/rng.h"

namespace dvf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad invocation (as opposed to a bad value); exits with kExitInputError.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> ParseList(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view token(text.data() + pos, end - pos);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
      throw UsageError(flag + ": '" + text + "' is not a comma-separated number list");
    }
    values.push_back(value);
    pos = end + 1;
  }
  return values;
}

std::vector<double> ParseListOf(const std::string& text, const std::string& flag,
                                std::size_t count) {
  std::vector<double> values = ParseList(text, flag);
  if (values.size() != count) {
    throw UsageError(fmt::format("{} expects {} comma-separated values", flag, count));
  }
  return values;
}

struct SyntheticSpec {
  std::uint64_t seed = 0;
  int n_objects = 0;
};

SyntheticSpec ParseSynthetic(const std::string& text) {
  const std::size_t comma = text.find(',');
  if (comma == std::string::npos) {
    throw UsageError("--synthetic expects 'seed,n_objects', got '" + text + "'");
  }
  SyntheticSpec spec;
  try {
    spec.seed = ParseSeed(text.substr(0, comma));
  } catch (const Error&) {
    throw UsageError("--synthetic seed '" + text.substr(0, comma) + "' is not an integer");
  }
  const std::string count = text.substr(comma + 1);
  const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(),
                                         spec.n_objects);
  if (ec != std::errc() || ptr != count.data() + count.size() || spec.n_objects < 0) {
    throw UsageError("--synthetic object count '" + count + "' is not a non-negative integer");
  }
  return spec;
}

// Options shared by `fuse` and `sweep`.
struct FuseArgs {
  std::string synthetic;
  std::string velodyne;
  std::string calib;
  std::string labels;
  std::string mode = "train";
  std::string dets;
  std::string sample_db;
  std::string seed;
  std::string grid_res;
  std::string image_size = "1242,375";
  int levels = 4;
  int dilation = 1;
  double conf_min = 0.8;
  double conf_max = 1.0;
  int k_samples = 5;
  double p_drop = 0.5;
  double point_drop = 0.0;
  double fg_threshold = 0.9;
  bool no_augment = false;
  std::string config;
  std::string out;

  CLI::Option* grid_res_opt = nullptr;
  CLI::Option* levels_opt = nullptr;
  CLI::Option* dilation_opt = nullptr;
  CLI::Option* conf_min_opt = nullptr;
  CLI::Option* conf_max_opt = nullptr;
  CLI::Option* k_samples_opt = nullptr;
  CLI::Option* p_drop_opt = nullptr;
  CLI::Option* point_drop_opt = nullptr;
  CLI::Option* fg_threshold_opt = nullptr;
  CLI::Option* no_augment_opt = nullptr;
};

void AddFuseOptions(CLI::App* cmd, FuseArgs& a) {
  cmd->add_option("--synthetic", a.synthetic, "Synthetic scene 'seed,n_objects'");
  cmd->add_option("--velodyne", a.velodyne, "KITTI velodyne .bin");
  cmd->add_option("--calib", a.calib, "KITTI calibration .txt");
  cmd->add_option("--labels", a.labels, "KITTI label .txt (training ground truth)");
  cmd->add_option("--mode", a.mode, "train | infer");
  cmd->add_option("--dets", a.dets, "2D detections file, or 'none'");
  cmd->add_option("--sample-db", a.sample_db, "Ground-truth sample database directory");
  cmd->add_option("--seed", a.seed, "Random seed (decimal or 0x-hex)")->required();
  a.grid_res_opt = cmd->add_option("--grid-res", a.grid_res, "Voxel size 'x,y,z' (m)");
  a.levels_opt = cmd->add_option("--levels", a.levels, "Hierarchy levels");
  a.dilation_opt = cmd->add_option("--dilation", a.dilation, "Dilation radius (0-2)");
  a.conf_min_opt = cmd->add_option("--conf-min", a.conf_min, "Confidence lower bound a");
  a.conf_max_opt = cmd->add_option("--conf-max", a.conf_max, "Confidence upper bound b");
  a.k_samples_opt = cmd->add_option("--k-samples", a.k_samples, "GT samples per class");
  a.p_drop_opt = cmd->add_option("--p-drop", a.p_drop, "Mask dropout probability");
  a.point_drop_opt = cmd->add_option("--point-drop", a.point_drop, "Point drop fraction");
  a.fg_threshold_opt =
      cmd->add_option("--fg-threshold", a.fg_threshold, "Foreground threshold");
  a.no_augment_opt = cmd->add_flag("--no-augment", a.no_augment,
                                   "Disable global augmentation in train mode");
  cmd->add_option("--image-size", a.image_size, "Image size 'W,H' (pixels)");
  cmd->add_option("--config", a.config, "JSON config file");
  cmd->add_option("--out", a.out, "Output directory")->required();
}

// Built-in defaults, then the JSON config, then explicit flags.
RunConfig BuildRunConfig(const FuseArgs& a) {
  RunConfig config;
  if (!a.config.empty()) {
    json file;
    try {
      file = json::parse(ReadFile(a.config));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kIo, a.config + ": " + e.what());
    }
    try {
      auto vec3 = [&](const char* key, Eigen::Vector3d& target) {
        if (!file.contains(key)) return;
        const auto v = file.at(key).get<std::vector<double>>();
        if (v.size() != 3) throw Error(ErrorCode::kIo, a.config + ": " + key + " needs 3 values");
        target = Eigen::Vector3d(v[0], v[1], v[2]);
      };
      vec3("grid_res", config.grid.resolution);
      vec3("range_min", config.grid.range_min);
      vec3("range_max", config.grid.range_max);
      config.grid.num_levels = file.value("levels", config.grid.num_levels);
      config.grid.dilation_radius = file.value("dilation", config.grid.dilation_radius);
      config.confidence.a = file.value("conf_min", config.confidence.a);
      config.confidence.b = file.value("conf_max", config.confidence.b);
      config.k_samples = file.value("k_samples", config.k_samples);
      config.p_drop = file.value("p_drop", config.p_drop);
      config.point_drop = file.value("point_drop", config.point_drop);
      config.fg_threshold = file.value("fg_threshold", config.fg_threshold);
      config.augment = file.value("augment", config.augment);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kIo, a.config + ": " + e.what());
    }
  }
  if (a.grid_res_opt->count()) {
    const auto v = ParseListOf(a.grid_res, "--grid-res", 3);
    config.grid.resolution = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  if (a.levels_opt->count()) config.grid.num_levels = a.levels;
  if (a.dilation_opt->count()) config.grid.dilation_radius = a.dilation;
  if (a.conf_min_opt->count()) config.confidence.a = a.conf_min;
  if (a.conf_max_opt->count()) config.confidence.b = a.conf_max;
  if (a.k_samples_opt->count()) config.k_samples = a.k_samples;
  if (a.p_drop_opt->count()) config.p_drop = a.p_drop;
  if (a.point_drop_opt->count()) config.point_drop = a.point_drop;
  if (a.fg_threshold_opt->count()) config.fg_threshold = a.fg_threshold;
  if (a.no_augment_opt->count()) config.augment = false;
  try {
    config.seed = ParseSeed(a.seed);
  } catch (const Error& e) {
    throw UsageError(std::string("--seed: ") + e.what());
  }
  return config;
}

std::pair<int, int> ParseImageSize(const std::string& text) {
  const auto v = ParseListOf(text, "--image-size", 2);
  if (v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]) || v[0] < 1 || v[1] < 1 ||
      v[0] > 1e5 || v[1] > 1e5) {
    throw Error(ErrorCode::kInvalidConfig, "--image-size must be two positive integers");
  }
  return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

Scene LabelsToScene(const std::vector<LabelRecord>& records, const CameraCalib& calib) {
  Scene scene;
  scene.calib = calib;
  for (const LabelRecord& record : records) {
    if (record.label == "DontCare") continue;
    scene.gt_boxes.push_back(CameraBoxToLidar(record, calib));
    scene.gt_classes.push_back(record.label);
    scene.mask_visible.push_back(true);
  }
  return scene;
}

FuseInputs LoadFuseInputs(const FuseArgs& a, const RunConfig& config) {
  FuseInputs inputs;
  if (a.mode == "train") {
    inputs.mode = FuseMode::kTrain;
  } else if (a.mode == "infer") {
    inputs.mode = FuseMode::kInfer;
  } else {
    throw UsageError("--mode must be 'train' or 'infer', got '" + a.mode + "'");
  }
  const auto [width, height] = ParseImageSize(a.image_size);

  if (!a.synthetic.empty()) {
    if (!a.velodyne.empty()) throw UsageError("--synthetic and --velodyne are exclusive");
    const SyntheticSpec spec = ParseSynthetic(a.synthetic);
    SyntheticOptions options;
    options.seed = spec.seed;
    options.n_objects = spec.n_objects;
    options.grid = config.grid;
    options.calib.image_width = width;
    options.calib.image_height = height;
    inputs.scene = SyntheticScene(options);
    if (inputs.mode == FuseMode::kTrain && a.sample_db.empty()) {
      inputs.sample_db = SyntheticSampleDB(RandomStream(spec.seed).Split("sample_db").seed(), 32);
    }
  } else if (!a.velodyne.empty()) {
    if (a.calib.empty()) throw UsageError("--velodyne requires --calib");
    const CameraCalib calib = ParseCalib(ReadFile(a.calib), width, height);
    ValidateCalib(calib);
    if (!a.labels.empty()) {
      inputs.scene = LabelsToScene(ParseLabels(ReadFile(a.labels)), calib);
    } else {
      inputs.scene.calib = calib;
    }
    inputs.scene.points = ReadVelodyne(ReadFile(a.velodyne));
  } else {
    throw UsageError("a scene source is required: --synthetic or --velodyne/--calib");
  }

  if (!a.sample_db.empty() && inputs.mode == FuseMode::kTrain) {
    inputs.sample_db = LoadSampleDB(a.sample_db);
  }
  if (inputs.mode == FuseMode::kInfer) {
    if (a.dets.empty()) throw UsageError("--mode infer requires --dets <file|none>");
    if (a.dets != "none") inputs.detections = ParseDetections(ReadFile(a.dets));
  }
  return inputs;
}

int CmdFuse(const FuseArgs& a, std::ostream& out) {
  const RunConfig config = BuildRunConfig(a);
  ValidateRunConfig(config);
  const FuseInputs inputs = LoadFuseInputs(a, config);
  const FuseOutputs outputs = RunFuse(inputs, config);
  WriteFuseOutputs(outputs, config, a.out);
  out << fmt::format("fused {} levels, {} in-image correspondences ({} foreground) -> {}\n",
                     outputs.fused.size(), outputs.stats.total.in_image,
                     outputs.stats.total.foreground, a.out);
  return kExitOk;
}

int CmdSweep(const FuseArgs& a, const std::string& variable, const std::string& values_text,
             std::ostream& out) {
  if (variable != "min_confidence" && variable != "p_drop" && variable != "point_drop") {
    throw UsageError("--sweep-var must be min_confidence, p_drop or point_drop");
  }
  const std::vector<double> values = ParseList(values_text, "--values");
  for (const double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kInvalidRange,
                  fmt::format("sweep value {} is outside [0, 1]", v));
    }
  }
  const RunConfig base = BuildRunConfig(a);
  ValidateRunConfig(base);
  const FuseInputs inputs = LoadFuseInputs(a, base);

  std::string csv =
      "variable,value,voxels,in_image,foreground,background,point_pixel,voxel_pixel,"
      "inserted,inserted_visible\n";
  for (const double v : values) {
    RunConfig config = base;
    if (variable == "min_confidence") {
      config.confidence.a = v;
    } else if (variable == "p_drop") {
      config.p_drop = v;
    } else {
      config.point_drop = v;
    }
    ValidateRunConfig(config);
    const FuseOutputs outputs = RunFuse(inputs, config);
    std::size_t visible = 0;
    for (const std::size_t n : outputs.inserted) visible += outputs.scene.mask_visible[n];
    const LevelCorrespondence& t = outputs.stats.total;
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", variable, v, t.voxels, t.in_image,
                       t.foreground, t.background, outputs.density.point_pixel,
                       outputs.density.voxel_pixel, outputs.inserted.size(), visible);
  }
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + a.out);
  WriteFile(fs::path(a.out) / "sweep.csv", csv);
  out << fmt::format("swept {} over {} values -> {}\n", variable, values.size(),
                     (fs::path(a.out) / "sweep.csv").string());
  return kExitOk;
}

struct EvalArgs {
  std::string pred_dir;
  std::string gt_dir;
  std::string calib_dir;
  std::string difficulty;
  std::string out;
};

json BinJson(const RangeBin& bin) {
  return {{"lo", bin.lo}, {"hi", std::isinf(bin.hi) ? json(nullptr) : json(bin.hi)}};
}

int CmdEval(const EvalArgs& a, std::ostream& out) {
  std::optional<Difficulty> difficulty;
  if (a.difficulty == "easy") {
    difficulty = Difficulty::kEasy;
  } else if (a.difficulty == "moderate") {
    difficulty = Difficulty::kModerate;
  } else if (a.difficulty == "hard") {
    difficulty = Difficulty::kHard;
  } else if (!a.difficulty.empty()) {
    throw UsageError("--difficulty must be easy, moderate or hard");
  }

  std::error_code ec;
  if (!fs::is_directory(a.gt_dir, ec)) {
    throw Error(ErrorCode::kIo, "ground-truth directory " + a.gt_dir + " not found");
  }
  if (!fs::is_directory(a.pred_dir, ec)) {
    throw Error(ErrorCode::kIo, "prediction directory " + a.pred_dir + " not found");
  }
  std::vector<fs::path> frames;
  for (const auto& item : fs::directory_iterator(a.gt_dir)) {
    if (item.path().extension() == ".txt") frames.push_back(item.path().filename());
  }
  std::sort(frames.begin(), frames.end());

  const EvalConfig config;
  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const int frame = static_cast<int>(f);
    CameraCalib calib = KittiReferenceCalib();
    if (!a.calib_dir.empty()) {
      const fs::path path = fs::path(a.calib_dir) / frames[f];
      calib = ParseCalib(ReadFile(path));
    }
    auto parse = [](const fs::path& path) {
      try {
        return ParseLabels(ReadFile(path));
      } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
      }
    };
    for (const LabelRecord& r : parse(fs::path(a.gt_dir) / frames[f])) {
      if (!config.iou_thresholds.contains(r.label)) continue;
      if (difficulty &&
          !PassesDifficulty({r.bbox2d.v2 - r.bbox2d.v1, r.occlusion, r.truncation},
                            *difficulty)) {
        continue;
      }
      gts.push_back({CameraBoxToLidar(r, calib), r.label, frame});
    }
    const fs::path pred_path = fs::path(a.pred_dir) / frames[f];
    if (!fs::exists(pred_path)) continue;
    for (const LabelRecord& r : parse(pred_path)) {
      if (!config.iou_thresholds.contains(r.label)) continue;
      dets.push_back({CameraBoxToLidar(r, calib), r.score.value_or(1.0), r.label, frame});
    }
  }

  std::set<std::string> labels;
  for (const GroundTruth& gt : gts) labels.insert(gt.label);
  for (const Detection& det : dets) labels.insert(det.label);

  json report = json::object();
  for (const std::string& label : labels) {
    const auto bins_3d = RangeBinnedAp(dets, gts, label, config, IouKind::k3d);
    const auto bins_bev = RangeBinnedAp(dets, gts, label, config, IouKind::kBev);
    json per_bin = json::array();
    for (std::size_t b = 0; b < bins_3d.size(); ++b) {
      json entry = BinJson(bins_3d[b].bin);
      entry["ap_3d"] = bins_3d[b].ap;
      entry["ap_bev"] = bins_bev[b].ap;
      entry["num_gt"] = bins_3d[b].num_gt;
      entry["num_det"] = bins_3d[b].num_det;
      entry["empty"] = bins_3d[b].empty;
      per_bin.push_back(std::move(entry));
    }
    const auto count = [&](const auto& items) {
      return std::count_if(items.begin(), items.end(),
                           [&](const auto& item) { return item.label == label; });
    };
    report[label] = {
        {"ap_3d", ApR40(dets, gts, label, config, IouKind::k3d)},
        {"ap_bev", ApR40(dets, gts, label, config, IouKind::kBev)},
        {"iou_threshold", config.iou_thresholds.at(label)},
        {"per_bin", per_bin},
        {"counts", {{"gt", count(gts)}, {"det", count(dets)}, {"frames", frames.size()}}}};
  }
  const std::string text = report.dump(2) + "\n";
  if (!a.out.empty()) {
    fs::create_directories(a.out, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + a.out);
    WriteFile(fs::path(a.out) / "eval.json", text);
  }
  out << text;
  return kExitOk;
}

struct SynthArgs {
  std::string synthetic;
  std::string out;
  std::string frame = "000000";
  std::string image_size = "1242,375";
  int db_size = 0;
};

int CmdSynth(const SynthArgs& a, std::ostream& out) {
  const SyntheticSpec spec = ParseSynthetic(a.synthetic);
  const auto [width, height] = ParseImageSize(a.image_size);
  SyntheticOptions options;
  options.seed = spec.seed;
  options.n_objects = spec.n_objects;
  options.calib.image_width = width;
  options.calib.image_height = height;
  const Scene scene = SyntheticScene(options);

  const fs::path root(a.out);
  for (const char* sub : {"velodyne", "calib", "label_2"}) {
    std::error_code ec;
    fs::create_directories(root / sub, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + (root / sub).string());
  }
  WriteFile(root / "velodyne" / (a.frame + ".bin"), EncodeVelodyne(scene.points));
  WriteFile(root / "calib" / (a.frame + ".txt"), FormatCalib(scene.calib));
  std::vector<LabelRecord> records;
  for (std::size_t n = 0; n < scene.gt_boxes.size(); ++n) {
    records.push_back(LidarBoxToCamera(scene.gt_boxes[n], scene.gt_classes[n], scene.calib));
  }
  WriteFile(root / "label_2" / (a.frame + ".txt"), FormatLabels(records));
  if (a.db_size > 0) {
    SaveSampleDB(SyntheticSampleDB(RandomStream(spec.seed).Split("sample_db").seed(), a.db_size),
                 root / "sample_db");
  }
  out << fmt::format("wrote {} points and {} boxes to {}\n", scene.points.size(),
                     scene.gt_boxes.size(), root.string());
  return kExitOk;
}

std::string OneLine(std::string message) {
  std::replace(message.begin(), message.end(), '\n', ' ');
  return message;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dense voxel fusion toolkit"};
  app.require_subcommand(1);

  FuseArgs fuse_args;
  CLI::App* fuse = app.add_subcommand("fuse", "Voxelize, build the foreground mask and fuse");
  AddFuseOptions(fuse, fuse_args);

  FuseArgs sweep_args;
  std::string sweep_var;
  std::string sweep_values;
  CLI::App* sweep = app.add_subcommand("sweep", "Repeat fuse over a parameter sweep");
  AddFuseOptions(sweep, sweep_args);
  sweep->add_option("--sweep-var", sweep_var, "min_confidence | p_drop | point_drop")
      ->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values in [0, 1]")
      ->required();

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "AP|R40 evaluation of KITTI label files");
  eval->add_option("--pred-dir", eval_args.pred_dir, "Prediction label directory")
      ->required();
  eval->add_option("--gt-dir", eval_args.gt_dir, "Ground-truth label directory")->required();
  eval->add_option("--calib-dir", eval_args.calib_dir, "Calibration directory");
  eval->add_option("--difficulty", eval_args.difficulty, "easy | moderate | hard");
  eval->add_option("--out", eval_args.out, "Output directory for eval.json");

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic scene as KITTI files");
  synth->add_option("--synthetic", synth_args.synthetic, "'seed,n_objects'")->required();
  synth->add_option("--out", synth_args.out, "Output root directory")->required();
  synth->add_option("--frame", synth_args.frame, "Frame name");
  synth->add_option("--image-size", synth_args.image_size, "Image size 'W,H'");
  synth->add_option("--db-size", synth_args.db_size, "Sample database entries to write");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto parsed = app.get_subcommands();
    out << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << OneLine(e.what()) << "\n";
    return kExitInputError;
  }

  try {
    if (fuse->parsed()) return CmdFuse(fuse_args, out);
    if (sweep->parsed()) return CmdSweep(sweep_args, sweep_var, sweep_values, out);
    if (eval->parsed()) return CmdEval(eval_args, out);
    if (synth->parsed()) return CmdSynth(synth_args, out);
  } catch (const UsageError& e) {
    err << "error: " << OneLine(e.what()) << "\n";
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << OneLine(e.what()) << "\n";
    switch (e.code()) {
      case ErrorCode::kInvalidConfig:
      case ErrorCode::kInvalidRange:
      case ErrorCode::kGridTooSmall:
        return kExitConfigError;
      default:
        return kExitInputError;
    }
  } catch (const std::exception& e) {
    err << "error: " << OneLine(e.what()) << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

}  // namespace dvf
