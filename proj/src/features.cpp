#include "stereosal/features.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <sstream>

#include "stereosal/imaging.hpp"

namespace stereosal {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

class Stopwatch {
 public:
  Stopwatch(Timings& t, const char* key) : t_(t), key_(key), start_(std::chrono::steady_clock::now()) {}
  ~Stopwatch() { t_[key_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  Timings& t_;
  const char* key_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names{
      "brightness_var_contrast", "brightness_contrast", "color_histogram",     "color_warmth",
      "color_saturation",        "color_hvs_sensitivity", "color_empirical",   "color_contrast_b",
      "color_contrast_a",        "texture",             "motion_dx",           "motion_dy",
      "motion_dz",               "motion_velocity",     "motion_z_emphasis",   "motion_acceleration",
      "motion_surprise",         "depth",               "face",                "person",
      "vehicle",                 "animal",              "text",                "horizon"};
  return names;
}

const std::array<std::string, kFeatureCount>& feature_labels() {
  static const std::array<std::string, kFeatureCount> labels{
      "Brightness Var. Contrast", "Brightness Contrast",      "Color1 (histogram)",   "Color2 (Warmth)",
      "Color3 (Saturation)",      "Color4 (HVS sensitivity)", "Color5 (Empirical)",   "Color6 (Contrast-b')",
      "Color7 (Contrast-a')",     "Texture",                  "Motion1 (Dx)",         "Motion2 (Dy)",
      "Motion3 (Dz)",             "Motion4 (V)",              "Motion5 (Z-emphasis)", "Motion6 (A)",
      "Motion7 (Surprise element)", "Depth",                  "Face",                 "Person",
      "Vehicle",                  "Animals",                  "Text",                 "Horizon"};
  return labels;
}

std::string feature_name(FeatureId id) { return feature_names()[static_cast<std::size_t>(id)]; }
std::string feature_label(FeatureId id) { return feature_labels()[static_cast<std::size_t>(id)]; }

std::optional<FeatureId> parse_feature(const std::string& token) {
  const std::string t = lower(trim(token));
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (t == feature_names()[i] || t == lower(feature_labels()[i])) return static_cast<FeatureId>(i);
  }
  return std::nullopt;
}

FeatureId detection_feature(DetectionClass c) {
  return static_cast<FeatureId>(static_cast<int>(FeatureId::Face) + static_cast<int>(c));
}

FeatureMask all_features() { return FeatureMask{}.set(); }

FeatureMask parse_feature_list(const std::string& list) {
  FeatureMask mask;
  std::istringstream in(list);
  for (std::string tok; std::getline(in, tok, ',');) {
    if (trim(tok).empty()) continue;
    const auto id = parse_feature(tok);
    if (!id) throw Error("unknown feature '" + trim(tok) + "'");
    mask.set(static_cast<std::size_t>(*id));
  }
  if (mask.none()) throw Error("feature list selects no features");
  return mask;
}

FeatureStack assemble_stack(Dims dims, int frame, const std::map<FeatureId, RasterMap>& maps) {
  FeatureStack stack{dims, frame, {}};
  for (auto& m : stack.maps) m = RasterMap(dims, 0.0);
  for (const auto& [id, m] : maps) {
    require_same_dims(m.dims(), dims, ("feature " + feature_name(id)).c_str());
    stack[id] = m;
  }
  return stack;
}

FeatureExtractor::FeatureExtractor(FeatureConfig cfg)
    : cfg_(std::move(cfg)), fovea_(build_fovea_mask(cfg_.geometry, cfg_.density_profile)) {}

void FeatureExtractor::reset() {
  prev_luma_.reset();
  prev_depth_.reset();
  prev_velocity_.reset();
}

FeatureStack FeatureExtractor::process(const FrameInput& in) {
  if (!in.frame || !in.disparity_px) throw Error("feature extraction needs a frame and a disparity map");
  const ColorFrame& frame = *in.frame;
  const Dims dims = frame.dims();
  require_same_dims(in.disparity_px->dims(), dims, "disparity");
  if (dims.width != cfg_.geometry.res_w || dims.height != cfg_.geometry.res_h) {
    throw Error("frame size does not match the working geometry");
  }
  const auto on = [this](FeatureId id) { return cfg_.enabled.test(static_cast<std::size_t>(id)); };
  const auto any_on = [&](std::initializer_list<FeatureId> ids) {
    return std::any_of(ids.begin(), ids.end(), on);
  };
  std::map<FeatureId, RasterMap> raw;

  std::optional<SegmentLabeling> own;
  {
    Stopwatch sw(timings_, "segmentation");
    if (!in.labels) own.emplace(segment(frame, cfg_.segmentation));
  }
  const SegmentLabeling& labels = in.labels ? *in.labels : *own;
  require_same_dims(labels.dims(), dims, "segment labels");
  const auto stats = segment_stats(labels);
  const RasterMap compact = compactness_map(labels, stats);
  const RasterMap size_mask = size_filter(labels, stats, cfg_.geometry);
  const RasterMap luma = convert_color(frame, ColorSpace::Yuv).channel(0);

  if (any_on({FeatureId::BrightnessVarContrast, FeatureId::BrightnessContrast})) {
    Stopwatch sw(timings_, "brightness");
    auto b = brightness_maps(frame, fovea_, labels, cfg_.variance_mode);
    raw[FeatureId::BrightnessVarContrast] = std::move(b.variance_contrast);
    raw[FeatureId::BrightnessContrast] = std::move(b.contrast);
  }
  {
    Stopwatch sw(timings_, "color");
    if (on(FeatureId::ColorHistogram)) raw[FeatureId::ColorHistogram] = color_histogram_map(frame, cfg_.histogram_bins);
    if (on(FeatureId::ColorWarmth)) raw[FeatureId::ColorWarmth] = warmth_map(frame);
    if (on(FeatureId::ColorSaturation)) raw[FeatureId::ColorSaturation] = saturation_map(frame);
    if (on(FeatureId::ColorHvsSensitivity)) {
      raw[FeatureId::ColorHvsSensitivity] = hvs_sensitivity_map(frame, cfg_.spectral_table);
    }
    if (on(FeatureId::ColorEmpirical)) raw[FeatureId::ColorEmpirical] = empirical_color_map(frame, cfg_.empirical_table);
    if (any_on({FeatureId::ColorContrastA, FeatureId::ColorContrastB})) {
      auto c = color_variance_contrast(frame, fovea_, labels, cfg_.variance_mode);
      raw[FeatureId::ColorContrastA] = std::move(c.a_map);
      raw[FeatureId::ColorContrastB] = std::move(c.b_map);
    }
  }
  if (on(FeatureId::Texture)) {
    Stopwatch sw(timings_, "texture");
    raw[FeatureId::Texture] = texture_map(luma, fovea_, labels, cfg_.gabor);
  }

  const RasterMap depth = disparity_to_depth(*in.disparity_px, cfg_.geometry);
  {
    Stopwatch sw(timings_, "motion");
    MotionMaps m = zero_motion_maps(dims);
    if (prev_luma_ && prev_depth_) {
      FlowField flow = in.flow ? *in.flow : block_matching_flow(*prev_luma_, luma, cfg_.motion.block_match);
      m = motion_maps(flow, *prev_depth_, depth, cfg_.geometry, labels, prev_velocity_ ? &*prev_velocity_ : nullptr,
                      cfg_.motion);
      prev_velocity_ = m.raw_velocity;
    }
    raw[FeatureId::MotionDx] = std::move(m.dx);
    raw[FeatureId::MotionDy] = std::move(m.dy);
    raw[FeatureId::MotionDz] = std::move(m.dz);
    raw[FeatureId::MotionVelocity] = std::move(m.velocity);
    raw[FeatureId::MotionZEmphasis] = std::move(m.z_emphasis);
    raw[FeatureId::MotionAcceleration] = std::move(m.acceleration);
    raw[FeatureId::MotionSurprise] = std::move(m.surprise);
    prev_luma_ = luma;
    prev_depth_ = depth;
  }
  if (on(FeatureId::Depth)) {
    Stopwatch sw(timings_, "depth");
    const RasterMap discomfort = segment_discomfort(*in.disparity_px, labels, cfg_.geometry);
    raw[FeatureId::Depth] = depth_feature(depth, labels, stats, discomfort, cfg_.abruptness);
  }
  {
    Stopwatch sw(timings_, "highlevel");
    static const std::vector<Detection> kNone;
    const auto& dets = in.detections ? *in.detections : kNone;
    for (auto c : kDetectionClasses) {
      if (on(detection_feature(c))) raw[detection_feature(c)] = class_map(dets, c, dims);
    }
  }

  Stopwatch sw(timings_, "shaping");
  std::map<FeatureId, RasterMap> shaped;
  for (const auto& [id, m] : raw) {
    if (!on(id)) continue;
    const bool high_level = static_cast<int>(id) >= static_cast<int>(FeatureId::Face);
    shaped[id] = shape_feature(m, compact, size_mask, high_level ? cfg_.high_level_shaping : cfg_.shaping);
  }
  return assemble_stack(dims, in.index, shaped);
}

}  // namespace stereosal
