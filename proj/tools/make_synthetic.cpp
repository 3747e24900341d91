// Generates a small synthetic stereo dataset: frames, disparity, detections,
// fixations, optional external flow, plus a manifest and config.
#include <CLI11.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <array>
#include <cmath>
#include <fstream>
#include <random>

#include "stereosal/evaluation.hpp"
#include "stereosal/image_io.hpp"

namespace {

using namespace stereosal;
namespace fs = std::filesystem;

constexpr double kDispOffset = -10.0;  // 16-bit disparity: value / 1000 - 10 px
constexpr double kDispScale = 0.001;

struct Scene {
  std::array<double, 3> background;
  std::array<double, 3> object;
  double x0, y0, vx, vy;
  double radius;
  double disparity;
  std::string box_class;  // detection class attached to the object, or empty
};

std::array<Scene, 4> scenes() {
  return {{
      {{96, 110, 96}, {230, 30, 30}, 30, 40, 2.5, 0.5, 11, 3.0, "face"},
      {{100, 100, 120}, {240, 220, 20}, 120, 30, -2.0, 1.0, 10, 2.5, "person"},
      {{120, 105, 90}, {30, 60, 230}, 40, 60, 2.0, -1.0, 12, 3.5, "face"},
      {{90, 110, 115}, {220, 40, 200}, 110, 55, -3.0, -0.5, 10, 2.0, ""},
  }};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic stereo saliency dataset"};
  fs::path out = "data/synthetic";
  int width = 160;
  int height = 90;
  int frames = 10;
  int subjects = 6;
  std::uint64_t seed = 7;
  app.add_option("--out", out, "Output directory");
  app.add_option("--width", width);
  app.add_option("--height", height);
  app.add_option("--frames", frames);
  app.add_option("--subjects", subjects);
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  try {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto sc = scenes();
    const double sx = width / 160.0;
    const double sy = height / 90.0;
    for (std::size_t v = 0; v < sc.size(); ++v) {
      const Scene& s = sc[v];
      const std::string name = fmt::format("clip{}", v);
      const fs::path dir = out / name;
      fs::create_directories(dir / "frames");
      fs::create_directories(dir / "disparity");
      const bool external_flow = v == 3;
      if (external_flow) fs::create_directories(dir / "flow");
      std::ofstream det(dir / "detections.txt");
      det << "# frame class x y w h score\n";
      std::vector<Fixation> fix;
      // Static distractor: a dull rectangle at a fixed place.
      const int rx = static_cast<int>((v % 2 ? 20 : 115) * sx);
      const int ry = static_cast<int>(15 * sy);
      const int rw = static_cast<int>(22 * sx);
      const int rh = static_cast<int>(14 * sy);
      for (int f = 0; f < frames; ++f) {
        const double cx = (s.x0 + s.vx * f) * sx;
        const double cy = (s.y0 + s.vy * f) * sy;
        const double r = s.radius * std::min(sx, sy);
        ColorFrame img(width, height, ColorSpace::Rgb8);
        RasterMap disp(width, height);
        for (int y = 0; y < height; ++y) {
          for (int x = 0; x < width; ++x) {
            std::array<double, 3> px;
            const double shade = 12.0 * std::sin(x * 0.05 + v) * std::cos(y * 0.07);
            for (int c = 0; c < 3; ++c) px[static_cast<std::size_t>(c)] = s.background[static_cast<std::size_t>(c)] + shade + 3.0 * noise(rng);
            double d = 0.8 * y / height;  // ground plane receding upward
            if (x >= rx && x < rx + rw && y >= ry && y < ry + rh) {
              px = {140, 140, 130};
              d = 0.5;
            }
            if (std::hypot(x - cx, y - cy) <= r) {
              px = s.object;
              for (auto& p : px) p += 2.0 * noise(rng);
              d = s.disparity * sx;
            }
            for (auto& p : px) p = std::clamp(std::round(p), 0.0, 255.0);
            img.set_pixel(x, y, px);
            disp.at(x, y) = std::round((d - kDispOffset) / kDispScale);
          }
        }
        io::write_color_frame(dir / "frames" / fmt::format("{:04d}.png", f), img);
        io::write_uint16_image(dir / "disparity" / fmt::format("{:04d}.png", f), disp);
        if (external_flow && f > 0) {
          // Forward flow from the previous frame: object pixels move by (vx, vy).
          const double pcx = (s.x0 + s.vx * (f - 1)) * sx;
          const double pcy = (s.y0 + s.vy * (f - 1)) * sy;
          io::FlowPair fl{RasterMap(width, height), RasterMap(width, height)};
          for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
              if (std::hypot(x - pcx, y - pcy) <= r) {
                fl.dx.at(x, y) = s.vx * sx;
                fl.dy.at(x, y) = s.vy * sy;
              }
            }
          }
          io::write_flo(dir / "flow" / fmt::format("{:04d}.flo", f), fl);
        }
        if (!s.box_class.empty()) {
          det << fmt::format("{} {} {:.1f} {:.1f} {:.1f} {:.1f} {:.2f}\n", f, s.box_class, cx - r, cy - r, 2 * r, 2 * r, 0.9);
        }
        if (v == 2) det << fmt::format("{} text {} {} {} {} 0.8\n", f, rx, ry, rw, rh);
        if (v == 1) det << fmt::format("{} horizon 0 {} {} {} 0.7\n", f, static_cast<int>(30 * sy), width, static_cast<int>(6 * sy));
        for (int subj = 0; subj < subjects; ++subj) {
          for (int k = 0; k < 2; ++k) {
            double fx;
            double fy;
            const double u = unit(rng);
            if (u < 0.8) {
              fx = cx + 3.0 * sx * noise(rng);
              fy = cy + 3.0 * sy * noise(rng);
            } else if (u < 0.9) {
              fx = rx + rw / 2.0 + 3.0 * noise(rng);
              fy = ry + rh / 2.0 + 3.0 * noise(rng);
            } else {
              fx = width / 2.0 + width / 6.0 * noise(rng);
              fy = height / 2.0 + height / 6.0 * noise(rng);
            }
            fx = std::clamp(fx, 0.0, width - 1.0);
            fy = std::clamp(fy, 0.0, height - 1.0);
            fix.push_back({fmt::format("s{}", subj + 1), f, std::round(fx * 10) / 10, std::round(fy * 10) / 10,
                           std::round((f + 0.25 + 0.5 * k) * 1000.0 / 30.0)});
          }
        }
      }
      save_fixations(dir / "fixations.csv", FixationSet(std::move(fix)));
    }

    std::ofstream cfg(out / "config.json");
    cfg << fmt::format(R"({{
  "geometry": {{"res_w": {}, "res_h": {}, "screen_w_cm": 101.8, "screen_h_cm": 57.25,
               "z_observer_cm": 183.0, "l_eyes_cm": 6.3, "alpha_deg": 1.0, "frame_rate": 30.0}},
  "work_scale": 1.0,
  "segmentation": {{"min_region": 20}},
  "motion": {{"block": 8, "search": 8}},
  "forest": {{"n_trees": 40, "min_leaf": 10, "bootstrap_ratio": 0.3333333333333333}},
  "training": {{"frames_per_video": 10, "pixels_per_frame": 400}},
  "evaluation": {{"emd_grid": 32, "human_baselines": true, "postprocess": true}}
}}
)",
                       width, height);
    std::ofstream man(out / "manifest.json");
    man << R"({
  "videos": [
    {"name": "clip0", "frames": "clip0/frames", "disparity": "clip0/disparity", "disparity_scale": 0.001,
     "disparity_offset": -10.0, "flow": "builtin", "detections": "clip0/detections.txt", "fixations": "clip0/fixations.csv"},
    {"name": "clip1", "frames": "clip1/frames", "disparity": "clip1/disparity", "disparity_scale": 0.001,
     "disparity_offset": -10.0, "flow": "builtin", "detections": "clip1/detections.txt", "fixations": "clip1/fixations.csv"},
    {"name": "clip2", "frames": "clip2/frames", "disparity": "clip2/disparity", "disparity_scale": 0.001,
     "disparity_offset": -10.0, "flow": "builtin", "detections": "clip2/detections.txt", "fixations": "clip2/fixations.csv"},
    {"name": "clip3", "frames": "clip3/frames", "disparity": "clip3/disparity", "disparity_scale": 0.001,
     "disparity_offset": -10.0, "flow": "clip3/flow", "detections": "clip3/detections.txt", "fixations": "clip3/fixations.csv"}
  ],
  "split": {"train": ["clip0", "clip1"], "validation": ["clip2", "clip3"]},
  "config": "config.json",
  "output_dir": "out",
  "seed": 1
}
)";
    spdlog::info("wrote {} clips to {}", sc.size(), out.string());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
