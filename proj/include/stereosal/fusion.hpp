#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stereosal/features.hpp"
#include "stereosal/forest.hpp"
#include "stereosal/raster.hpp"

namespace stereosal {

/// Per-pixel forest mean, normalized to [0,1]. Model features are looked up in
/// the stack by name; unknown names throw.
RasterMap predict(const ForestModel& model, const FeatureStack& stack);
/// Unnormalized per-pixel forest mean.
RasterMap predict_raw(const ForestModel& model, const FeatureStack& stack);

enum class FusionScheme { Forest, Average, Multiplication, Maximum, SpP, Gnlns, Lmswa, Sdw };

std::string to_string(FusionScheme s);
FusionScheme parse_fusion_scheme(const std::string& name);
/// The seven non-learned comparison schemes plus LMSWA, in report order.
const std::vector<FusionScheme>& baseline_schemes();

/// Mean of strict 8-neighborhood local maxima other than the global maximum
/// (0 when there are none).
double mean_local_maxima(const RasterMap& m);
/// (M - mean local maxima)^2 for GNLNS.
double gnlns_weight(const RasterMap& m);

/// Non-negative least squares min ||A w - b|| from the normal equations
/// (gram = A^T A, rhs = A^T b), Lawson-Hanson active set.
std::vector<double> nnls(const std::vector<double>& gram, const std::vector<double>& rhs, std::size_t n);

/// Fits LMSWA weights over pixels of paired (maps, target) frames.
std::vector<double> fit_lmswa_weights(const std::vector<std::vector<RasterMap>>& frames,
                                      const std::vector<RasterMap>& targets);

/// Fuses feature maps. Lmswa requires `weights` (from fit_lmswa_weights).
RasterMap fuse_baseline(const std::vector<RasterMap>& maps, FusionScheme scheme,
                        const std::vector<double>* weights = nullptr);

/// Source of training frames for one video.
struct VideoFrames {
  std::string name;
  int frame_count = 0;
  std::function<FeatureStack(int)> features;
  std::function<RasterMap(int)> target;  ///< fixation density for that frame
};

struct SampleProvenance {
  std::string video;
  int frame;
  int x;
  int y;
};

struct SampledTraining {
  TrainingSet set;
  std::vector<SampleProvenance> provenance;
};

/// For the first `frames_per_video` frames of each video draws
/// `pixels_per_frame` pixels: half from the top decile of the target, half
/// uniformly. Targets are rescaled to [0,1] per frame. Deterministic per seed.
SampledTraining sample_training(const std::vector<VideoFrames>& videos, int frames_per_video, int pixels_per_frame,
                                std::uint64_t seed, const FeatureMask& features = all_features());

}  // namespace stereosal
