#pragma once

#include <array>
#include <bitset>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stereosal/color_tables.hpp"
#include "stereosal/depth.hpp"
#include "stereosal/geometry.hpp"
#include "stereosal/highlevel.hpp"
#include "stereosal/motion.hpp"
#include "stereosal/photometric.hpp"
#include "stereosal/raster.hpp"
#include "stereosal/segmentation.hpp"
#include "stereosal/shaping.hpp"
#include "stereosal/texture.hpp"

namespace stereosal {

inline constexpr std::size_t kFeatureCount = 24;

enum class FeatureId : int {
  BrightnessVarContrast,
  BrightnessContrast,
  ColorHistogram,
  ColorWarmth,
  ColorSaturation,
  ColorHvsSensitivity,
  ColorEmpirical,
  ColorContrastB,
  ColorContrastA,
  Texture,
  MotionDx,
  MotionDy,
  MotionDz,
  MotionVelocity,
  MotionZEmphasis,
  MotionAcceleration,
  MotionSurprise,
  Depth,
  Face,
  Person,
  Vehicle,
  Animal,
  Text,
  Horizon,
};

/// Canonical machine names, in stack order.
const std::array<std::string, kFeatureCount>& feature_names();
/// Human-readable labels used in importance reports.
const std::array<std::string, kFeatureCount>& feature_labels();

std::string feature_name(FeatureId id);
std::string feature_label(FeatureId id);
/// Accepts a machine name or a display label (case-insensitive).
std::optional<FeatureId> parse_feature(const std::string& token);
FeatureId detection_feature(DetectionClass c);

using FeatureMask = std::bitset<kFeatureCount>;
FeatureMask all_features();
/// Comma-separated list of names or labels; throws on unknown entries.
FeatureMask parse_feature_list(const std::string& list);

/// 24 maps in canonical order on one grid.
struct FeatureStack {
  Dims dims;
  int frame = 0;
  std::array<RasterMap, kFeatureCount> maps;

  const RasterMap& operator[](FeatureId id) const { return maps[static_cast<std::size_t>(id)]; }
  RasterMap& operator[](FeatureId id) { return maps[static_cast<std::size_t>(id)]; }
};

/// Builds a canonical stack; missing maps become zero maps. Throws on a
/// dimension mismatch.
FeatureStack assemble_stack(Dims dims, int frame, const std::map<FeatureId, RasterMap>& maps);

struct FeatureConfig {
  ViewingGeometry geometry;  ///< already rescaled to the working grid
  DensityProfile density_profile = default_density_profile();
  SegmentationParams segmentation;
  VarianceMode variance_mode = VarianceMode::CenterDeviation;
  int histogram_bins = 8;
  SpectralTable spectral_table = default_spectral_table();
  EmpiricalTable empirical_table = default_empirical_table();
  GaborParams gabor;
  MotionParams motion;
  AbruptnessParams abruptness;
  ShapingConfig shaping;
  ShapingConfig high_level_shaping = stereosal::high_level_shaping();
  FeatureMask enabled = all_features();
};

struct FrameInput {
  int index = 0;
  const ColorFrame* frame = nullptr;           ///< RGB, working grid
  const RasterMap* disparity_px = nullptr;     ///< working grid, working-pixel units
  const FlowField* flow = nullptr;             ///< previous -> current; null selects block matching
  const std::vector<Detection>* detections = nullptr;  ///< working-grid coordinates
  const SegmentLabeling* labels = nullptr;     ///< null runs the built-in segmenter
};

/// Seconds spent per feature group, accumulated over processed frames.
using Timings = std::map<std::string, double>;

/// Stateful per-sequence extractor: keeps the previous frame's luminance,
/// depth and velocity for the motion features.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureConfig cfg);

  FeatureStack process(const FrameInput& in);
  /// Forget the previous frame (start of a new shot).
  void reset();

  const Timings& timings() const { return timings_; }
  const FoveaMask& fovea() const { return fovea_; }
  const FeatureConfig& config() const { return cfg_; }

 private:
  FeatureConfig cfg_;
  FoveaMask fovea_;
  std::optional<RasterMap> prev_luma_;
  std::optional<RasterMap> prev_depth_;
  std::optional<RasterMap> prev_velocity_;
  Timings timings_;
};

}  // namespace stereosal
