#include "stereosal/config.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace stereosal {

using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void take_path(const json& j, const char* key, const fs::path& base, std::optional<fs::path>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = resolve(base, j.at(key).get<std::string>());
}

ShapingConfig shaping_from(const json& j, ShapingConfig s) {
  take(j, "compactness", s.apply_compactness);
  take(j, "size_filter", s.apply_size_filter);
  take(j, "sparsity", s.apply_sparsity);
  return s;
}

json shaping_to(const ShapingConfig& s) {
  return {{"compactness", s.apply_compactness}, {"size_filter", s.apply_size_filter}, {"sparsity", s.apply_sparsity}};
}

void check_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) spdlog::warn("{}: unknown key '{}' ignored", where, k);
  }
}

}  // namespace

Dims PipelineConfig::working_dims() const {
  if (!(work_scale > 0.0 && work_scale <= 1.0)) throw Error("config: work_scale must lie in (0,1]");
  return {std::max(1, static_cast<int>(std::lround(geometry.res_w * work_scale))),
          std::max(1, static_cast<int>(std::lround(geometry.res_h * work_scale)))};
}

ViewingGeometry PipelineConfig::working_geometry() const { return geometry.rescaled(working_dims()); }

FeatureConfig PipelineConfig::feature_config(const FeatureMask& enabled) const {
  FeatureConfig fc;
  fc.geometry = working_geometry();
  if (density_profile) fc.density_profile = load_density_profile(*density_profile);
  if (spectral_table) fc.spectral_table = load_spectral_table(*spectral_table);
  if (empirical_table) fc.empirical_table = load_empirical_table(*empirical_table);
  fc.segmentation = segmentation;
  fc.variance_mode = variance_mode;
  fc.histogram_bins = histogram_bins;
  fc.gabor = gabor;
  fc.motion = motion;
  fc.abruptness = abruptness;
  fc.shaping = shaping;
  fc.high_level_shaping = high_level_shaping;
  fc.enabled = enabled;
  return fc;
}

PipelineConfig config_from_json(const std::string& text, const fs::path& base_dir) {
  PipelineConfig c;
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  check_keys(j, {"geometry", "work_scale", "tables", "segmentation", "features", "motion", "depth", "shaping", "forest",
                 "training", "evaluation"},
             "config");
  try {
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      take(g, "z_observer_cm", c.geometry.z_observer_cm);
      take(g, "l_eyes_cm", c.geometry.l_eyes_cm);
      take(g, "screen_w_cm", c.geometry.screen_w_cm);
      take(g, "screen_h_cm", c.geometry.screen_h_cm);
      take(g, "res_w", c.geometry.res_w);
      take(g, "res_h", c.geometry.res_h);
      take(g, "alpha_deg", c.geometry.alpha_deg);
      take(g, "frame_rate", c.geometry.frame_rate);
    }
    take(j, "work_scale", c.work_scale);
    if (j.contains("tables")) {
      const auto& t = j.at("tables");
      take_path(t, "density_profile", base_dir, c.density_profile);
      take_path(t, "spectral", base_dir, c.spectral_table);
      take_path(t, "empirical", base_dir, c.empirical_table);
    }
    if (j.contains("segmentation")) {
      const auto& s = j.at("segmentation");
      take(s, "spatial_radius", c.segmentation.spatial_radius);
      take(s, "range_radius", c.segmentation.range_radius);
      take(s, "min_region", c.segmentation.min_region);
      take(s, "max_iterations", c.segmentation.max_iterations);
    }
    if (j.contains("features")) {
      const auto& f = j.at("features");
      if (f.contains("variance_mode")) {
        const auto m = f.at("variance_mode").get<std::string>();
        if (m == "center") c.variance_mode = VarianceMode::CenterDeviation;
        else if (m == "classical") c.variance_mode = VarianceMode::Classical;
        else throw Error("config: variance_mode must be 'center' or 'classical'");
      }
      take(f, "histogram_bins", c.histogram_bins);
      take(f, "gabor_wavelengths", c.gabor.wavelengths);
      take(f, "gabor_orientations", c.gabor.orientations);
      take(f, "gabor_bandwidth", c.gabor.bandwidth_octaves);
    }
    if (j.contains("motion")) {
      const auto& m = j.at("motion");
      take(m, "block", c.motion.block_match.block);
      take(m, "search", c.motion.block_match.search);
      take(m, "surprise_bins", c.motion.surprise_bins);
      if (m.contains("scaling")) {
        const auto s = m.at("scaling").get<std::string>();
        if (s == "minmax") c.motion.scaling = MotionScaling::MinMax;
        else if (s == "standardize") c.motion.scaling = MotionScaling::Standardize;
        else throw Error("config: motion.scaling must be 'minmax' or 'standardize'");
      }
      if (m.contains("reducer")) {
        const auto r = m.at("reducer").get<std::string>();
        if (r == "mean") c.motion.reducer = Reducer::Mean;
        else if (r == "median") c.motion.reducer = Reducer::Median;
        else throw Error("config: motion.reducer must be 'mean' or 'median'");
      }
    }
    if (j.contains("depth")) {
      const auto& d = j.at("depth");
      take(d, "margin_fraction", c.abruptness.margin_fraction);
      take(d, "sub_point_spacing", c.abruptness.sub_point_spacing);
      take(d, "smoothing_sigma", c.abruptness.smoothing_sigma);
    }
    if (j.contains("shaping")) {
      const auto& s = j.at("shaping");
      if (s.contains("low_level")) c.shaping = shaping_from(s.at("low_level"), c.shaping);
      if (s.contains("high_level")) c.high_level_shaping = shaping_from(s.at("high_level"), c.high_level_shaping);
    }
    if (j.contains("forest")) {
      const auto& f = j.at("forest");
      take(f, "n_trees", c.forest.n_trees);
      take(f, "min_leaf", c.forest.min_leaf);
      take(f, "bootstrap_ratio", c.forest.bootstrap_ratio);
      take(f, "mtry", c.forest.mtry);
    }
    if (j.contains("training")) {
      take(j.at("training"), "frames_per_video", c.training.frames_per_video);
      take(j.at("training"), "pixels_per_frame", c.training.pixels_per_frame);
    }
    if (j.contains("evaluation")) {
      take(j.at("evaluation"), "emd_grid", c.evaluation.emd_grid);
      take(j.at("evaluation"), "human_baselines", c.evaluation.human_baselines);
      take(j.at("evaluation"), "postprocess", c.evaluation.postprocess);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.geometry.validate();
  c.working_dims();
  if (c.histogram_bins < 1) throw Error("config: histogram_bins must be positive");
  if (c.training.frames_per_video < 0 || c.training.pixels_per_frame < 0) throw Error("config: training counts must be non-negative");
  return c;
}

PipelineConfig load_config(const fs::path& path) { return config_from_json(read_text(path), path.parent_path()); }

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["geometry"] = {{"z_observer_cm", c.geometry.z_observer_cm}, {"l_eyes_cm", c.geometry.l_eyes_cm},
                   {"screen_w_cm", c.geometry.screen_w_cm},     {"screen_h_cm", c.geometry.screen_h_cm},
                   {"res_w", c.geometry.res_w},                 {"res_h", c.geometry.res_h},
                   {"alpha_deg", c.geometry.alpha_deg},         {"frame_rate", c.geometry.frame_rate}};
  j["work_scale"] = c.work_scale;
  json tables = json::object();
  if (c.density_profile) tables["density_profile"] = c.density_profile->string();
  if (c.spectral_table) tables["spectral"] = c.spectral_table->string();
  if (c.empirical_table) tables["empirical"] = c.empirical_table->string();
  j["tables"] = tables;
  j["segmentation"] = {{"spatial_radius", c.segmentation.spatial_radius},
                       {"range_radius", c.segmentation.range_radius},
                       {"min_region", c.segmentation.min_region},
                       {"max_iterations", c.segmentation.max_iterations}};
  j["features"] = {{"variance_mode", c.variance_mode == VarianceMode::CenterDeviation ? "center" : "classical"},
                   {"histogram_bins", c.histogram_bins},
                   {"gabor_wavelengths", c.gabor.wavelengths},
                   {"gabor_orientations", c.gabor.orientations},
                   {"gabor_bandwidth", c.gabor.bandwidth_octaves}};
  j["motion"] = {{"block", c.motion.block_match.block},
                 {"search", c.motion.block_match.search},
                 {"surprise_bins", c.motion.surprise_bins},
                 {"scaling", c.motion.scaling == MotionScaling::MinMax ? "minmax" : "standardize"},
                 {"reducer", c.motion.reducer == Reducer::Median ? "median" : "mean"}};
  j["depth"] = {{"margin_fraction", c.abruptness.margin_fraction},
                {"sub_point_spacing", c.abruptness.sub_point_spacing},
                {"smoothing_sigma", c.abruptness.smoothing_sigma}};
  j["shaping"] = {{"low_level", shaping_to(c.shaping)}, {"high_level", shaping_to(c.high_level_shaping)}};
  j["forest"] = {{"n_trees", c.forest.n_trees},
                 {"min_leaf", c.forest.min_leaf},
                 {"bootstrap_ratio", c.forest.bootstrap_ratio},
                 {"mtry", c.forest.mtry}};
  j["training"] = {{"frames_per_video", c.training.frames_per_video}, {"pixels_per_frame", c.training.pixels_per_frame}};
  j["evaluation"] = {{"emd_grid", c.evaluation.emd_grid},
                     {"human_baselines", c.evaluation.human_baselines},
                     {"postprocess", c.evaluation.postprocess}};
  return j.dump(2) + "\n";
}

const VideoEntry& RunManifest::video(const std::string& name) const {
  for (const auto& v : videos) {
    if (v.name == name) return v;
  }
  throw Error("manifest: unknown video '" + name + "'");
}

RunManifest manifest_from_json(const std::string& text, const fs::path& manifest_dir) {
  RunManifest m;
  try {
    const json j = json::parse(text, nullptr, true, true);
    check_keys(j, {"root", "videos", "split", "config", "output_dir", "seed"}, "manifest");
    m.root = j.contains("root") ? resolve(manifest_dir, j.at("root").get<std::string>()) : manifest_dir;
    std::set<std::string> names;
    for (const auto& e : j.at("videos")) {
      VideoEntry v;
      v.name = e.at("name").get<std::string>();
      if (v.name.empty() || v.name.find('/') != std::string::npos) throw Error("manifest: invalid video name '" + v.name + "'");
      if (!names.insert(v.name).second) throw Error("manifest: duplicate video '" + v.name + "'");
      v.frames = resolve(m.root, e.at("frames").get<std::string>());
      take_path(e, "disparity", m.root, v.disparity);
      take(e, "disparity_scale", v.disparity_scale);
      take(e, "disparity_offset", v.disparity_offset);
      if (e.contains("flow") && e.at("flow").is_string() && e.at("flow").get<std::string>() != "builtin") {
        v.flow = resolve(m.root, e.at("flow").get<std::string>());
      }
      take_path(e, "detections", m.root, v.detections);
      take_path(e, "fixations", m.root, v.fixations);
      take_path(e, "labels", m.root, v.labels);
      m.videos.push_back(std::move(v));
    }
    if (j.contains("split")) {
      take(j.at("split"), "train", m.train);
      take(j.at("split"), "validation", m.validation);
    }
    take_path(j, "config", manifest_dir, m.config);
    if (j.contains("output_dir")) m.output_dir = resolve(manifest_dir, j.at("output_dir").get<std::string>());
    else m.output_dir = manifest_dir / "out";
    take(j, "seed", m.seed);
  } catch (const json::exception& e) {
    throw Error(std::string("manifest: ") + e.what());
  }
  std::set<std::string> train(m.train.begin(), m.train.end());
  for (const auto& n : m.train) m.video(n);
  for (const auto& n : m.validation) {
    m.video(n);
    if (train.count(n)) throw Error("manifest: video '" + n + "' is in both train and validation splits");
  }
  return m;
}

RunManifest load_manifest(const fs::path& path) {
  return manifest_from_json(read_text(path), fs::absolute(path).parent_path());
}

std::vector<std::string> missing_inputs(const VideoEntry& v) {
  std::vector<std::string> missing;
  auto check = [&](const std::optional<fs::path>& p, const char* what) {
    if (p && !fs::exists(*p)) missing.push_back(std::string(what) + " " + p->string());
  };
  if (!fs::is_directory(v.frames)) missing.push_back("frames " + v.frames.string());
  check(v.disparity, "disparity");
  check(v.flow, "flow");
  check(v.detections, "detections");
  check(v.fixations, "fixations");
  check(v.labels, "labels");
  return missing;
}

}  // namespace stereosal
