#include "stereosal/depth.hpp"

#include <algorithm>
#include <cmath>

#include "stereosal/imaging.hpp"

namespace stereosal {

RasterMap depth_base(const RasterMap& depth_cm) {
  RasterMap inv(depth_cm.dims());
  for (std::size_t i = 0; i < inv.size(); ++i) {
    if (!(depth_cm[i] > 0.0) || !std::isfinite(depth_cm[i])) throw Error("depth_base: depth must be positive and finite");
    inv[i] = 1.0 / depth_cm[i];
  }
  return normalize01(inv);
}

std::vector<AbruptnessProbe> abruptness_probes(const RasterMap& depth, const SegmentLabeling& s,
                                               const std::vector<SegmentStats>& stats, const AbruptnessParams& p) {
  require_same_dims(depth.dims(), s.dims(), "abruptness_probes");
  if (stats.size() != static_cast<std::size_t>(s.segment_count())) throw Error("abruptness_probes: stats do not match labeling");
  const double w = depth.width();
  const double h = depth.height();
  const double mx = p.margin_fraction * w;
  const double my = p.margin_fraction * h;
  auto clamp_pt = [&](double x, double y) { return std::pair{std::clamp(x, 0.0, w - 1), std::clamp(y, 0.0, h - 1)}; };

  std::vector<AbruptnessProbe> probes(stats.size());
  for (std::size_t k = 0; k < stats.size(); ++k) {
    const auto& st = stats[k];
    auto& pr = probes[k];
    const double reach[4] = {st.d_up + my, st.d_right + mx, st.d_down + my, st.d_left + mx};
    const double ux[4] = {0, 1, 0, -1};
    const double uy[4] = {-1, 0, 1, 0};
    const double center = depth.bilinear(st.cx, st.cy);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t d = 0; d < 4; ++d) {
      const double ax = st.cx + ux[d] * reach[d];
      const double ay = st.cy + uy[d] * reach[d];
      pr.anchors[d] = {ax, ay, reach[d]};
      std::array<double, 3> readings{};
      for (int t = -1; t <= 1; ++t) {
        const auto pt = clamp_pt(ax + ux[d] * t * p.sub_point_spacing, ay + uy[d] * t * p.sub_point_spacing);
        pr.sub_points[d][static_cast<std::size_t>(t + 1)] = pt;
        readings[static_cast<std::size_t>(t + 1)] = depth.bilinear(pt.first, pt.second);
      }
      std::sort(readings.begin(), readings.end());
      const double wt = 1.0 / reach[d];
      num += wt * std::abs(readings[1] - center);
      den += wt;
    }
    pr.diff = num / den;
  }
  return probes;
}

std::vector<double> abruptness_values(const std::vector<double>& diffs) {
  if (diffs.empty()) return {};
  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(diffs.size());
  const double peak = *std::max_element(diffs.begin(), diffs.end());
  std::vector<double> out(diffs.size());
  for (std::size_t k = 0; k < diffs.size(); ++k) out[k] = diffs[k] > mean ? peak : diffs[k];
  return out;
}

RasterMap abruptness_mask(const RasterMap& depth_cm, const SegmentLabeling& s, const std::vector<SegmentStats>& stats,
                          const AbruptnessParams& params) {
  require_finite(depth_cm, "abruptness_mask");
  const RasterMap smoothed = gaussian_blur(depth_cm, params.smoothing_sigma);
  const auto probes = abruptness_probes(smoothed, s, stats, params);
  std::vector<double> diffs(probes.size());
  for (std::size_t k = 0; k < probes.size(); ++k) diffs[k] = probes[k].diff;
  return normalize01(paint_segments(s, abruptness_values(diffs)));
}

RasterMap depth_feature_raw(const RasterMap& depth_cm, const SegmentLabeling& s, const std::vector<SegmentStats>& stats,
                            const RasterMap& discomfort, const AbruptnessParams& params) {
  require_same_dims(discomfort.dims(), s.dims(), "depth_feature");
  const RasterMap base = segment_reduce(depth_base(depth_cm), s, Reducer::Mean);
  return multiply(multiply(base, abruptness_mask(depth_cm, s, stats, params)), discomfort);
}

RasterMap depth_feature(const RasterMap& depth_cm, const SegmentLabeling& s, const std::vector<SegmentStats>& stats,
                        const RasterMap& discomfort, const AbruptnessParams& params) {
  return normalize01(depth_feature_raw(depth_cm, s, stats, discomfort, params));
}

RasterMap segment_discomfort(const RasterMap& disparity_px, const SegmentLabeling& s, const ViewingGeometry& g) {
  return discomfort_mask(segment_reduce(disparity_px, s, Reducer::Mean), g);
}

}  // namespace stereosal
