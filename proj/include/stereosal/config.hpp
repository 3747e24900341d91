#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stereosal/features.hpp"
#include "stereosal/forest.hpp"

namespace stereosal {

namespace fs = std::filesystem;

struct TrainingParams {
  int frames_per_video = 22;
  int pixels_per_frame = 1000;
};

struct EvaluationParams {
  int emd_grid = 32;
  bool human_baselines = true;
  bool postprocess = true;
};

/// Run configuration (JSON). Every key is optional; see data/config.example.json.
struct PipelineConfig {
  ViewingGeometry geometry;  ///< the physical display and its native grid
  double work_scale = 1.0;   ///< features are computed on round(res * work_scale)
  std::optional<fs::path> density_profile;
  std::optional<fs::path> spectral_table;
  std::optional<fs::path> empirical_table;
  SegmentationParams segmentation;
  VarianceMode variance_mode = VarianceMode::CenterDeviation;
  int histogram_bins = 8;
  GaborParams gabor;
  MotionParams motion;
  AbruptnessParams abruptness;
  ShapingConfig shaping;
  ShapingConfig high_level_shaping = stereosal::high_level_shaping();
  ForestParams forest;
  TrainingParams training;
  EvaluationParams evaluation;

  Dims working_dims() const;
  ViewingGeometry working_geometry() const;
  /// Loads the referenced tables and builds the extractor configuration.
  FeatureConfig feature_config(const FeatureMask& enabled = all_features()) const;
};

PipelineConfig config_from_json(const std::string& text, const fs::path& base_dir = {});
PipelineConfig load_config(const fs::path& path);
std::string config_to_json(const PipelineConfig& cfg);

struct VideoEntry {
  std::string name;
  fs::path frames;
  std::optional<fs::path> disparity;
  double disparity_scale = 1.0;
  double disparity_offset = 0.0;
  std::optional<fs::path> flow;  ///< empty selects built-in block matching
  std::optional<fs::path> detections;
  std::optional<fs::path> fixations;
  std::optional<fs::path> labels;
};

struct RunManifest {
  fs::path root;
  std::vector<VideoEntry> videos;
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::optional<fs::path> config;
  fs::path output_dir = "out";
  std::uint64_t seed = 1;

  const VideoEntry& video(const std::string& name) const;
};

/// Paths are resolved against `root` (default: the manifest's directory).
/// Throws on unknown split names or overlapping splits.
RunManifest manifest_from_json(const std::string& text, const fs::path& manifest_dir);
RunManifest load_manifest(const fs::path& path);

/// Inputs of a video that do not exist on disk.
std::vector<std::string> missing_inputs(const VideoEntry& v);

}  // namespace stereosal
