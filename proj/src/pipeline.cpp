#include "stereosal/pipeline.hpp"

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "stereosal/image_io.hpp"
#include "stereosal/imaging.hpp"
#include "stereosal/stats.hpp"

namespace stereosal {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr char kStackMagic[4] = {'S', 'S', 'T', 'K'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("stack: truncated header");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

std::string frame_stem(int f) { return fmt::format("frame_{:05d}", f); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string mask_names(const FeatureMask& mask) {
  std::string s;
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    if (!mask.test(k)) continue;
    if (!s.empty()) s += ',';
    s += feature_names()[k];
  }
  return s;
}

struct StackIndex {
  Dims dims;
  Dims native;
  int frames = 0;
  FeatureMask enabled;
};

fs::path index_path(const RunContext& run, const std::string& video) { return run.stack_dir(video) / "index.json"; }

StackIndex read_index(const RunContext& run, const std::string& video) {
  const fs::path p = index_path(run, video);
  if (!fs::exists(p)) throw Error("no feature stacks for '" + video + "' (run extract first)");
  json j;
  try {
    j = json::parse(read_text(p));
  } catch (const json::exception& e) {
    throw Error(p.string() + ": " + e.what());
  }
  if (j.value("format", "") != kStackFormat) throw Error(p.string() + ": not a feature stack index");
  const int version = j.value("version", 0);
  if (version != kStackVersion) {
    throw Error(fmt::format("{}: stack version {} but this build reads version {}; rerun extract", p.string(), version,
                            kStackVersion));
  }
  if (!j.value("complete", false)) throw Error(p.string() + ": extraction incomplete; rerun extract");
  StackIndex idx;
  idx.dims = {j.at("dims").at(0).get<int>(), j.at("dims").at(1).get<int>()};
  idx.native = {j.at("native_dims").at(0).get<int>(), j.at("native_dims").at(1).get<int>()};
  idx.frames = j.at("frames").get<int>();
  idx.enabled = parse_feature_list(j.at("enabled").get<std::string>());
  if (j.at("feature_names").get<std::vector<std::string>>() !=
      std::vector<std::string>(feature_names().begin(), feature_names().end())) {
    throw Error(p.string() + ": feature order differs from this build; rerun extract");
  }
  if (!(idx.dims == run.config.working_dims())) {
    throw Error(fmt::format("{}: stacks are {}x{} but the working grid is {}x{}; rerun extract", p.string(),
                            idx.dims.width, idx.dims.height, run.config.working_dims().width,
                            run.config.working_dims().height));
  }
  return idx;
}

fs::path stack_file(const RunContext& run, const std::string& video, int f) {
  return run.stack_dir(video) / (frame_stem(f) + ".stack");
}

// Fixations in working-grid coordinates.
FixationSet working_fixations(const RunContext& run, const VideoEntry& v, Dims native) {
  if (!v.fixations) throw Error("video '" + v.name + "' has no fixations");
  const Dims wd = run.config.working_dims();
  return load_fixations(*v.fixations)
      .clipped(native)
      .scaled(static_cast<double>(wd.width) / native.width, static_cast<double>(wd.height) / native.height);
}

RasterMap density_target(const RunContext& run, const FixationSet& fx, int frame) {
  return fixation_density(fx.points(frame), run.config.working_dims(), run.config.working_geometry().pixels_per_degree());
}

std::vector<fs::path> list_inputs(const fs::path& dir) {
  if (fs::is_regular_file(dir)) return {dir};
  return io::list_frame_files(dir);
}

std::vector<fs::path> list_flow_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".flo" || ext == ".fmap")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void resample_nearest_labels(const io::LabelImage& li, Dims target, std::vector<std::int32_t>& out) {
  out.resize(target.area());
  for (int y = 0; y < target.height; ++y) {
    const int sy = std::min(li.dims.height - 1, static_cast<int>((y + 0.5) * li.dims.height / target.height));
    for (int x = 0; x < target.width; ++x) {
      const int sx = std::min(li.dims.width - 1, static_cast<int>((x + 0.5) * li.dims.width / target.width));
      out[static_cast<std::size_t>(y) * static_cast<std::size_t>(target.width) + static_cast<std::size_t>(x)] =
          li.labels[static_cast<std::size_t>(sy) * static_cast<std::size_t>(li.dims.width) + static_cast<std::size_t>(sx)];
    }
  }
}

struct VideoTimings {
  std::string video;
  int frames = 0;
  Timings timings;
};

// Extracts one video; returns false when it was already up to date.
bool extract_video(const RunContext& run, const FeatureConfig& fc, const VideoEntry& v, VideoTimings& timing) {
  const Dims wd = run.config.working_dims();
  const fs::path dir = run.stack_dir(v.name);
  const std::string enabled = mask_names(run.options.features);
  if (fs::exists(index_path(run, v.name))) {
    try {
      const auto idx = read_index(run, v.name);
      bool all_present = true;
      for (int f = 0; f < idx.frames; ++f) all_present = all_present && fs::exists(stack_file(run, v.name, f));
      if (all_present && mask_names(idx.enabled) == enabled) return false;
    } catch (const Error& e) {
      spdlog::info("{}: recomputing ({})", v.name, e.what());
    }
  }
  const auto missing = missing_inputs(v);
  if (!missing.empty()) {
    std::string msg = "missing input:";
    for (const auto& m : missing) msg += " " + m;
    throw Error(msg);
  }
  const auto frames = list_inputs(v.frames);
  if (frames.empty()) throw Error("no frames in " + v.frames.string());
  const int n = static_cast<int>(frames.size());
  std::vector<fs::path> disparity;
  if (v.disparity) {
    disparity = list_inputs(*v.disparity);
    if (static_cast<int>(disparity.size()) != n) {
      throw Error(fmt::format("{} disparity maps for {} frames", disparity.size(), n));
    }
  } else {
    spdlog::warn("{}: no disparity given, depth is taken as the screen plane", v.name);
  }
  std::vector<fs::path> flow;
  int flow_offset = 0;
  if (v.flow) {
    flow = list_flow_files(*v.flow);
    if (static_cast<int>(flow.size()) == n - 1) {
      flow_offset = 1;
    } else if (static_cast<int>(flow.size()) != n) {
      throw Error(fmt::format("{} flow fields for {} frames", flow.size(), n));
    }
  }
  std::vector<fs::path> labels;
  if (v.labels) {
    labels = list_inputs(*v.labels);
    if (static_cast<int>(labels.size()) != n) throw Error(fmt::format("{} label maps for {} frames", labels.size(), n));
  }

  fs::remove(index_path(run, v.name));
  fs::create_directories(dir);
  FeatureExtractor extractor(fc);
  Dims native{};
  DetectionSet detections;
  for (int f = 0; f < n; ++f) {
    const ColorFrame raw = io::read_color_frame(frames[static_cast<std::size_t>(f)]);
    if (f == 0) {
      native = raw.dims();
      if (v.detections) detections = ingest_detections(*v.detections, native);
    } else if (!(raw.dims() == native)) {
      throw Error(frames[static_cast<std::size_t>(f)].string() + ": frame size differs from the first frame");
    }
    const ColorFrame frame = raw.dims() == wd ? raw : resize_frame(raw, wd);
    const double sx = static_cast<double>(wd.width) / native.width;
    const double sy = static_cast<double>(wd.height) / native.height;

    RasterMap disp(wd, 0.0);
    if (!disparity.empty()) {
      const RasterMap d = io::read_scalar_map(disparity[static_cast<std::size_t>(f)], v.disparity_scale, v.disparity_offset);
      require_finite(d, "disparity");
      // Disparities are horizontal pixel offsets on the map's own grid.
      const double unit = static_cast<double>(wd.width) / d.width();
      disp = d.dims() == wd ? d : resize_bilinear(d, wd);
      for (double& x : disp.values()) x *= unit;
    }

    std::optional<FlowField> flow_field;
    const int flow_idx = f - flow_offset;
    if (!flow.empty() && f > 0 && flow_idx >= 0) {
      auto fp = io::read_flow(flow[static_cast<std::size_t>(flow_idx)]);
      const double ux = static_cast<double>(wd.width) / fp.dx.width();
      const double uy = static_cast<double>(wd.height) / fp.dy.height();
      FlowField ff{fp.dx.dims() == wd ? fp.dx : resize_bilinear(fp.dx, wd),
                   fp.dy.dims() == wd ? fp.dy : resize_bilinear(fp.dy, wd), FlowSource::External};
      for (double& x : ff.dx.values()) x *= ux;
      for (double& y : ff.dy.values()) y *= uy;
      flow_field = std::move(ff);
    }

    std::vector<Detection> dets;
    for (const auto& d : detections.frame(f)) dets.push_back(d.scaled(sx, sy));

    std::optional<SegmentLabeling> seg;
    if (!labels.empty()) {
      const auto li = io::read_label_image(labels[static_cast<std::size_t>(f)]);
      std::vector<std::int32_t> resampled;
      if (li.dims == wd) {
        resampled = li.labels;
      } else {
        resample_nearest_labels(li, wd, resampled);
      }
      seg = SegmentLabeling::canonical(wd, resampled);
    }

    FrameInput in;
    in.index = f;
    in.frame = &frame;
    in.disparity_px = &disp;
    in.flow = flow_field ? &*flow_field : nullptr;
    in.detections = &dets;
    in.labels = seg ? &*seg : nullptr;
    write_stack(stack_file(run, v.name, f), extractor.process(in));
  }
  json idx = {{"format", kStackFormat},
              {"version", kStackVersion},
              {"video", v.name},
              {"dims", {wd.width, wd.height}},
              {"native_dims", {native.width, native.height}},
              {"frames", n},
              {"feature_names", feature_names()},
              {"enabled", enabled},
              {"complete", true}};
  write_text(index_path(run, v.name), idx.dump(1) + "\n");
  timing = {v.name, n, extractor.timings()};
  return true;
}

std::vector<RasterMap> selected_maps(const FeatureStack& stack, const FeatureMask& mask, bool drop_empty) {
  std::vector<RasterMap> maps;
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    if (!mask.test(k)) continue;
    const auto& m = stack.maps[k];
    if (drop_empty && std::all_of(m.values().begin(), m.values().end(), [](double v) { return v == 0.0; })) continue;
    maps.push_back(m);
  }
  return maps;
}

struct Fuser {
  FusionScheme scheme;
  FeatureMask mask;
  std::optional<ForestModel> model;
  std::vector<double> weights;

  RasterMap operator()(const FeatureStack& stack) const {
    if (scheme == FusionScheme::Forest) return predict(*model, stack);
    // Absent detector maps are identically zero; they would annihilate products.
    const bool drop_empty = scheme != FusionScheme::Lmswa;
    auto maps = selected_maps(stack, mask, drop_empty);
    if (maps.empty()) return RasterMap(stack.dims, 0.0);
    return normalize01(fuse_baseline(maps, scheme, scheme == FusionScheme::Lmswa ? &weights : nullptr));
  }
};

std::vector<double> fit_lmswa(const RunContext& run, const FeatureMask& mask) {
  std::vector<std::vector<RasterMap>> frames;
  std::vector<RasterMap> targets;
  for (const auto& name : run.manifest.train) {
    try {
      const auto idx = read_index(run, name);
      const auto fx = working_fixations(run, run.manifest.video(name), idx.native);
      const int n = std::min(idx.frames, run.config.training.frames_per_video);
      for (int f = 0; f < n; ++f) {
        if (fx.points(f).empty()) continue;
        frames.push_back(selected_maps(read_stack(stack_file(run, name, f)), mask, false));
        targets.push_back(normalize01(density_target(run, fx, f)));
      }
    } catch (const Error& e) {
      spdlog::warn("lmswa: skipping training video {}: {}", name, e.what());
    }
  }
  if (frames.empty()) throw Error("lmswa needs training videos with stacks and fixations");
  return fit_lmswa_weights(frames, targets);
}

Fuser make_fuser(const RunContext& run, FusionScheme scheme) {
  Fuser fuser{scheme, run.options.features, std::nullopt, {}};
  if (scheme == FusionScheme::Forest) {
    if (!fs::exists(run.model_path())) throw Error("no model at " + run.model_path().string() + " (run train first)");
    fuser.model = load_model(run.model_path());
  } else if (scheme == FusionScheme::Lmswa) {
    fuser.weights = fit_lmswa(run, run.options.features);
  }
  return fuser;
}

std::uint64_t frame_seed(std::uint64_t seed, std::size_t video, int frame) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(video) * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(frame)));
}

std::string metric_cell(double v) { return std::isnan(v) ? "n/a" : fmt::format("{:.4f}", v); }

// Per-rank mean of the sorted [0,1]-scaled training densities: a typical
// fixation-map value distribution on the working grid.
std::optional<RasterMap> reference_histogram(const RunContext& run) {
  const Dims wd = run.config.working_dims();
  std::vector<double> acc(wd.area(), 0.0);
  int count = 0;
  for (const auto& name : run.manifest.train) {
    try {
      const auto idx = read_index(run, name);
      const auto fx = working_fixations(run, run.manifest.video(name), idx.native);
      for (int f = 0; f < idx.frames; ++f) {
        if (fx.points(f).empty()) continue;
        const RasterMap d = normalize01(density_target(run, fx, f));
        std::vector<double> v(d.values().begin(), d.values().end());
        std::sort(v.begin(), v.end());
        for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
        ++count;
      }
    } catch (const Error& e) {
      spdlog::warn("histogram reference: skipping {}: {}", name, e.what());
    }
  }
  if (count == 0) return std::nullopt;
  RasterMap ref(wd);
  for (std::size_t i = 0; i < acc.size(); ++i) ref[i] = acc[i] / count;
  return ref;
}

std::optional<PostprocessChoice> tune_on_training(const RunContext& run, FusionScheme scheme) {
  std::vector<RasterMap> sal;
  std::vector<std::vector<Point>> fix;
  for (const auto& name : run.manifest.train) {
    try {
      const auto idx = read_index(run, name);
      const auto fx = working_fixations(run, run.manifest.video(name), idx.native);
      for (int f = 0; f < idx.frames; ++f) {
        auto pts = fx.points(f);
        if (pts.empty()) continue;
        sal.push_back(io::read_raw_map(run.prediction_dir(scheme, name) / (frame_stem(f) + ".fmap")));
        fix.push_back(std::move(pts));
      }
    } catch (const Error& e) {
      spdlog::warn("post-processing tuning: skipping {}: {}", name, e.what());
    }
  }
  if (sal.empty()) return std::nullopt;
  std::vector<TuningFrame> frames;
  for (std::size_t i = 0; i < sal.size(); ++i) frames.push_back({&sal[i], &fix[i]});
  return tune_postprocess(frames, run.config.working_geometry());
}

struct EvalVideo {
  std::string name;
  StackIndex index;
  FixationSet fixations;
};

// Shuffle pools: every fixation of the other evaluated videos.
std::vector<std::vector<Point>> shuffle_pools(const std::vector<EvalVideo>& videos) {
  std::vector<std::vector<Point>> pools(videos.size());
  for (std::size_t i = 0; i < videos.size(); ++i) {
    for (std::size_t j = 0; j < videos.size(); ++j) {
      if (i == j) continue;
      for (const auto& r : videos[j].fixations.records()) pools[i].push_back({r.x, r.y});
    }
  }
  return pools;
}

MetricValues mean_over_frames(const std::vector<MetricValues>& frames) {
  MetricValues out;
  for (std::size_t m = 0; m < out.size(); ++m) {
    double s = 0.0;
    int n = 0;
    for (const auto& f : frames) {
      if (std::isnan(f[m])) continue;
      s += f[m];
      ++n;
    }
    out[m] = n ? s / n : kNaN;
  }
  return out;
}

std::vector<EvalVideo> open_eval_videos(const RunContext& run, bool& failed) {
  std::vector<EvalVideo> out;
  for (const auto& name : run.evaluation_videos()) {
    try {
      const auto idx = read_index(run, name);
      out.push_back({name, idx, working_fixations(run, run.manifest.video(name), idx.native)});
    } catch (const Error& e) {
      spdlog::error("{}: {}", name, e.what());
      failed = true;
    }
  }
  return out;
}

std::string report_csv(const EvaluationReport& r) {
  std::string s = "model,video";
  for (Metric m : kMetrics) s += "," + to_string(m);
  s += "\n";
  for (const auto& row : r.rows) {
    for (std::size_t v = 0; v < row.per_video.size(); ++v) {
      s += row.name + "," + r.videos[v];
      for (double x : row.per_video[v]) s += "," + (std::isnan(x) ? std::string() : fmt::format("{:.6g}", x));
      s += "\n";
    }
  }
  return s;
}

}  // namespace

void write_stack(const fs::path& path, const FeatureStack& stack) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(kStackMagic, 4);
    put_u32(out, kStackVersion);
    put_u32(out, static_cast<std::uint32_t>(kFeatureCount));
    for (const auto& m : stack.maps) io::write_raw_map(out, m.empty() ? RasterMap(stack.dims, 0.0) : m);
    if (!out) throw Error("write failed: " + path.string());
  }
  fs::rename(tmp, path);
}

FeatureStack read_stack(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open stack " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kStackMagic, 4) != 0) throw Error(path.string() + ": not a feature stack");
  const auto version = get_u32(in);
  if (version != static_cast<std::uint32_t>(kStackVersion)) {
    throw Error(fmt::format("{}: stack version {} but this build reads version {}; rerun extract", path.string(), version,
                            kStackVersion));
  }
  const auto count = get_u32(in);
  if (count != kFeatureCount) throw Error(fmt::format("{}: {} maps, expected {}", path.string(), count, kFeatureCount));
  FeatureStack s;
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    s.maps[k] = io::read_raw_map(in);
    if (k == 0) s.dims = s.maps[0].dims();
    require_same_dims(s.dims, s.maps[k].dims(), "stack");
  }
  return s;
}

std::vector<std::string> RunContext::evaluation_videos() const {
  if (!manifest.validation.empty()) return manifest.validation;
  std::vector<std::string> all;
  for (const auto& v : manifest.videos) all.push_back(v.name);
  return all;
}

RunContext open_run(const RunOptions& options) {
  RunContext run;
  run.options = options;
  run.manifest = load_manifest(options.manifest);
  if (options.config) {
    run.config = load_config(*options.config);
  } else if (run.manifest.config) {
    run.config = load_config(*run.manifest.config);
  }
  run.output_dir = run.manifest.output_dir;
  if (const char* env = std::getenv("STEREOSAL_OUTPUT_DIR"); env && *env) run.output_dir = env;
  if (options.output_dir) run.output_dir = *options.output_dir;
  run.seed = options.seed.value_or(run.manifest.seed);
  if (options.features.none()) throw Error("feature selection is empty");
  return run;
}

const ModelSummary* EvaluationReport::find(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

void summarize(EvaluationReport& report) {
  for (auto& row : report.rows) {
    for (std::size_t m = 0; m < kMetrics.size(); ++m) {
      std::vector<double> vals;
      for (const auto& v : row.per_video) vals.push_back(v[m]);
      const auto ci = mean_ci(vals);
      row.mean[m] = ci.mean;
      row.half_width[m] = ci.half_width;
    }
  }
  for (auto& row : report.rows) {
    for (std::size_t m = 0; m < kMetrics.size(); ++m) {
      std::vector<double> a;
      std::vector<double> b;
      for (const auto& v : row.per_video) a.push_back(v[m]);
      for (const auto& v : report.rows.front().per_video) b.push_back(v[m]);
      row.p_vs_first[m] = two_sample_t(a, b).p;
    }
  }
  std::vector<std::size_t> ranked;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (report.rows[i].ranked) ranked.push_back(i);
  }
  for (auto& row : report.rows) row.average_rank = kNaN;
  if (ranked.empty()) return;
  std::vector<double> total(ranked.size(), 0.0);
  for (Metric m : {Metric::Sauc, Metric::Kld, Metric::Nss}) {
    std::vector<double> scores;
    for (auto i : ranked) scores.push_back(get(report.rows[i].mean, m));
    const auto r = average_ranks(scores, higher_is_better(m));
    for (std::size_t k = 0; k < ranked.size(); ++k) total[k] += r[k];
  }
  for (std::size_t k = 0; k < ranked.size(); ++k) report.rows[ranked[k]].average_rank = total[k] / 3.0;
}

std::string format_report(const EvaluationReport& r, const std::string& title) {
  std::string s = "# " + title + "\n\n";
  s += fmt::format("Videos: {}\n\n", r.videos.size());
  if (r.postprocess) {
    s += fmt::format("Post-processing (tuned on the training split): center weight {:.1f}, blur sigma {:.2f} px, mean AUC {:.4f}\n\n",
                     r.postprocess->center_weight, r.postprocess->blur_sigma_px, r.postprocess->mean_auc);
  }
  auto header = [&](const std::string& last) {
    std::string h = "| Model |";
    std::string sep = "|---|";
    for (Metric m : kMetrics) {
      h += " " + to_string(m) + " |";
      sep += "---|";
    }
    if (!last.empty()) {
      h += " " + last + " |";
      sep += "---|";
    }
    return h + "\n" + sep + "\n";
  };
  s += header("Avg. rank");
  for (const auto& row : r.rows) {
    s += "| " + row.name + " |";
    for (double v : row.mean) s += " " + metric_cell(v) + " |";
    s += " " + (std::isnan(row.average_rank) ? std::string("-") : fmt::format("{:.2f}", row.average_rank)) + " |\n";
  }
  s += "\n## 95% confidence half-widths\n\n" + header("");
  for (const auto& row : r.rows) {
    s += "| " + row.name + " |";
    for (double v : row.half_width) s += " " + metric_cell(v) + " |";
    s += "\n";
  }
  if (!r.rows.empty()) {
    s += "\n## p-values against " + r.rows.front().name + " (two-sample t-test over videos)\n\n" + header("");
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
      s += "| " + r.rows[i].name + " |";
      for (double v : r.rows[i].p_vs_first) s += " " + metric_cell(v) + " |";
      s += "\n";
    }
  }
  s += "\nRanking uses sAUC, KLD and NSS; KLD and EMD are lower-is-better.\n";
  return s;
}

int cmd_extract(const RunContext& run) {
  const FeatureConfig fc = run.config.feature_config(run.options.features);
  const auto& videos = run.manifest.videos;
  std::vector<VideoTimings> timings(videos.size());
  std::vector<int> status(videos.size(), 0);  // 0 skipped, 1 extracted, 2 failed
  parallel_for(videos.size(), run.options.workers, [&](std::size_t i) {
    try {
      const bool done = extract_video(run, fc, videos[i], timings[i]);
      status[i] = done ? 1 : 0;
      spdlog::info("{}: {}", videos[i].name, done ? fmt::format("{} frames extracted", timings[i].frames) : "up to date");
    } catch (const std::exception& e) {
      status[i] = 2;
      spdlog::error("{}: extraction failed: {}", videos[i].name, e.what());
    }
  });
  bool any = false;
  std::string csv = "video,frames,group,seconds,seconds_per_frame\n";
  for (const auto& t : timings) {
    if (t.frames == 0) continue;
    any = true;
    for (const auto& [group, sec] : t.timings) {
      csv += fmt::format("{},{},{},{:.6f},{:.6f}\n", t.video, t.frames, group, sec, sec / t.frames);
    }
  }
  if (any) write_text(run.output_dir / "timings.csv", csv);
  return std::count(status.begin(), status.end(), 2) ? 1 : 0;
}

int cmd_train(const RunContext& run) {
  if (run.manifest.train.empty()) throw Error("manifest has no training videos");
  bool failed = false;
  std::vector<VideoFrames> videos;
  std::vector<std::shared_ptr<FixationSet>> fixations;
  for (const auto& name : run.manifest.train) {
    try {
      const auto idx = read_index(run, name);
      auto fx = std::make_shared<FixationSet>(working_fixations(run, run.manifest.video(name), idx.native));
      fixations.push_back(fx);
      VideoFrames vf;
      vf.name = name;
      vf.frame_count = idx.frames;
      vf.features = [&run, name](int f) { return read_stack(stack_file(run, name, f)); };
      vf.target = [&run, fx](int f) { return density_target(run, *fx, f); };
      videos.push_back(std::move(vf));
    } catch (const Error& e) {
      spdlog::error("{}: {}", name, e.what());
      failed = true;
    }
  }
  if (videos.empty()) throw Error("no usable training videos");
  const auto sampled = sample_training(videos, run.config.training.frames_per_video, run.config.training.pixels_per_frame,
                                       run.seed, run.options.features);
  ForestParams params = run.config.forest;
  params.seed = run.seed;
  const ForestModel model = train_forest(sampled.set, params);
  save_model(run.model_path(), model);

  std::string log = fmt::format("n_trees {}\nmin_leaf {}\nbootstrap_ratio {}\nmtry {}\nseed {}\n", params.n_trees,
                                params.min_leaf, params.bootstrap_ratio, params.mtry, params.seed);
  log += fmt::format("videos {}\nframes_per_video {}\npixels_per_frame {}\nsamples {}\nfeatures {}\noob_mse {:.6g}\n",
                     videos.size(), run.config.training.frames_per_video, run.config.training.pixels_per_frame,
                     sampled.set.rows(), sampled.set.cols(), model.oob_mse);
  for (const auto& v : videos) log += fmt::format("video {} frames {}\n", v.name, std::min(v.frame_count, run.config.training.frames_per_video));
  write_text(run.output_dir / "training_log.txt", log);
  spdlog::info("trained {} trees on {} samples (OOB MSE {:.5f})", params.n_trees, sampled.set.rows(), model.oob_mse);
  return failed ? 1 : 0;
}

int cmd_predict(const RunContext& run) {
  const Fuser fuser = make_fuser(run, run.options.fusion);
  if (fuser.scheme == FusionScheme::Lmswa) {
    write_text(run.output_dir / "lmswa_weights.json", json{{"features", mask_names(fuser.mask)}, {"weights", fuser.weights}}.dump(1) + "\n");
  }
  const auto& videos = run.manifest.videos;
  std::vector<int> failed(videos.size(), 0);
  parallel_for(videos.size(), run.options.workers, [&](std::size_t i) {
    const auto& name = videos[i].name;
    try {
      const auto idx = read_index(run, name);
      const fs::path dir = run.prediction_dir(fuser.scheme, name);
      fs::create_directories(dir);
      for (int f = 0; f < idx.frames; ++f) {
        const RasterMap sal = fuser(read_stack(stack_file(run, name, f)));
        if (!is_normalized(sal)) throw Error("prediction left [0,1]");
        io::write_normalized_image(dir / (frame_stem(f) + ".png"), sal);
        io::write_raw_map(dir / (frame_stem(f) + ".fmap"), sal);
      }
      spdlog::info("{}: {} saliency maps ({})", name, idx.frames, to_string(fuser.scheme));
    } catch (const std::exception& e) {
      failed[i] = 1;
      spdlog::error("{}: prediction failed: {}", name, e.what());
    }
  });
  return std::count(failed.begin(), failed.end(), 1) ? 1 : 0;
}

int cmd_importance(const RunContext& run) {
  const ForestModel model = load_model(run.model_path());
  std::vector<std::size_t> order(model.feature_names.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return model.importance[a] > model.importance[b]; });
  std::string csv = "rank,feature,label,importance,raw\n";
  int rank = 1;
  for (auto i : order) {
    const auto id = parse_feature(model.feature_names[i]);
    csv += fmt::format("{},{},{},{:.6f},{:.6g}\n", rank++, model.feature_names[i], id ? feature_label(*id) : model.feature_names[i],
                       model.importance[i], model.importance_raw[i]);
  }
  write_text(run.output_dir / "importance.csv", csv);
  return 0;
}

EvaluationReport evaluate_run(const RunContext& run, bool& failed) {
  const Dims wd = run.config.working_dims();
  const ViewingGeometry g = run.config.working_geometry();
  const auto& ev = run.config.evaluation;
  const FusionScheme scheme = run.options.fusion;
  const auto videos = open_eval_videos(run, failed);
  if (videos.empty()) throw Error("no videos to evaluate");
  const auto pools = shuffle_pools(videos);

  EvaluationReport report;
  std::optional<RasterMap> reference;
  if (ev.postprocess) {
    report.postprocess = tune_on_training(run, scheme);
    reference = reference_histogram(run);
    if (!report.postprocess || !reference) {
      spdlog::warn("no training predictions with fixations; skipping the post-processed row");
      report.postprocess.reset();
    }
  }
  const std::string model_name = to_string(scheme);
  std::vector<std::string> names{model_name};
  if (report.postprocess) names.push_back(model_name + " (post-processed)");
  names.insert(names.end(), {"chance", "center"});
  if (ev.human_baselines) names.insert(names.end(), {"one human", "infinite humans"});

  const RasterMap center = center_map(wd);
  std::vector<std::vector<MetricValues>> per_video(videos.size(), std::vector<MetricValues>(names.size()));
  std::vector<int> ok(videos.size(), 0);
  parallel_for(videos.size(), run.options.workers, [&](std::size_t vi) {
    const auto& v = videos[vi];
    try {
      std::vector<std::vector<MetricValues>> frames(names.size());
      for (int f = 0; f < v.index.frames; ++f) {
        const auto pts = v.fixations.points(f);
        if (pts.empty()) continue;
        const FrameTruth truth{density_target(run, v.fixations, f), pts, pools[vi]};
        const std::uint64_t s = frame_seed(run.seed, vi, f);
        const RasterMap sal = io::read_raw_map(run.prediction_dir(scheme, v.name) / (frame_stem(f) + ".fmap"));
        require_same_dims(sal.dims(), wd, "prediction");
        std::size_t k = 0;
        frames[k++].push_back(score_frame(sal, truth, s, ev.emd_grid));
        if (report.postprocess) {
          const RasterMap post = histogram_match(
              postprocess(sal, report.postprocess->center_weight, report.postprocess->blur_sigma_px), *reference);
          frames[k++].push_back(score_frame(post, truth, s, ev.emd_grid));
        }
        frames[k++].push_back(score_frame(chance_map(wd, s), truth, s, ev.emd_grid));
        frames[k++].push_back(score_frame(center, truth, s, ev.emd_grid));
        if (ev.human_baselines) {
          const auto h = human_baselines(v.fixations, f, wd, g, pools[vi], s, ev.emd_grid);
          if (h.available) {
            frames[k].push_back(h.one_human);
            frames[k + 1].push_back(h.infinite_humans);
          }
          k += 2;
        }
      }
      for (std::size_t k = 0; k < names.size(); ++k) per_video[vi][k] = mean_over_frames(frames[k]);
      ok[vi] = 1;
      spdlog::info("{}: evaluated", v.name);
    } catch (const std::exception& e) {
      spdlog::error("{}: evaluation failed: {}", v.name, e.what());
    }
  });
  for (std::size_t k = 0; k < names.size(); ++k) {
    ModelSummary row;
    row.name = names[k];
    row.ranked = names[k] != "one human" && names[k] != "infinite humans";
    report.rows.push_back(row);
  }
  for (std::size_t vi = 0; vi < videos.size(); ++vi) {
    if (!ok[vi]) {
      failed = true;
      continue;
    }
    report.videos.push_back(videos[vi].name);
    for (std::size_t k = 0; k < names.size(); ++k) report.rows[k].per_video.push_back(per_video[vi][k]);
  }
  summarize(report);
  return report;
}

int cmd_evaluate(const RunContext& run) {
  bool failed = false;
  const auto report = evaluate_run(run, failed);
  write_text(run.output_dir / "evaluation.csv", report_csv(report));
  write_text(run.output_dir / "evaluation_report.md", format_report(report, "Saliency evaluation"));
  return failed ? 1 : 0;
}

int cmd_compare_fusion(const RunContext& run) {
  bool failed = false;
  const auto videos = open_eval_videos(run, failed);
  if (videos.empty()) throw Error("no videos to evaluate");
  const auto pools = shuffle_pools(videos);
  std::vector<FusionScheme> schemes{FusionScheme::Forest};
  for (auto s : baseline_schemes()) schemes.push_back(s);

  EvaluationReport report;
  for (const auto& v : videos) report.videos.push_back(v.name);
  for (auto scheme : schemes) {
    ModelSummary row;
    row.name = to_string(scheme);
    std::optional<Fuser> fuser;
    try {
      fuser = make_fuser(run, scheme);
    } catch (const Error& e) {
      spdlog::error("{}: unavailable: {}", row.name, e.what());
      failed = true;
    }
    row.per_video.assign(videos.size(), MetricValues{});
    for (auto& pv : row.per_video) pv.fill(kNaN);
    if (fuser) {
      std::vector<int> bad(videos.size(), 0);
      parallel_for(videos.size(), run.options.workers, [&](std::size_t vi) {
        const auto& v = videos[vi];
        try {
          std::vector<MetricValues> frames;
          for (int f = 0; f < v.index.frames; ++f) {
            const auto pts = v.fixations.points(f);
            if (pts.empty()) continue;
            const FrameTruth truth{density_target(run, v.fixations, f), pts, pools[vi]};
            const RasterMap sal = (*fuser)(read_stack(stack_file(run, v.name, f)));
            frames.push_back(score_frame(sal, truth, frame_seed(run.seed, vi, f), run.config.evaluation.emd_grid));
          }
          row.per_video[vi] = mean_over_frames(frames);
        } catch (const std::exception& e) {
          bad[vi] = 1;
          spdlog::error("{} / {}: {}", row.name, v.name, e.what());
        }
      });
      if (std::count(bad.begin(), bad.end(), 1)) failed = true;
    }
    report.rows.push_back(std::move(row));
  }
  ModelSummary svr;
  svr.name = "svr (unavailable)";
  svr.ranked = false;
  svr.per_video.assign(videos.size(), MetricValues{});
  for (auto& pv : svr.per_video) pv.fill(kNaN);
  report.rows.push_back(svr);
  summarize(report);
  write_text(run.output_dir / "fusion.csv", report_csv(report));
  write_text(run.output_dir / "fusion_report.md", format_report(report, "Fusion scheme comparison"));
  return failed ? 1 : 0;
}

}  // namespace stereosal
