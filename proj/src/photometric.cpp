#include "stereosal/photometric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "stereosal/imaging.hpp"

namespace stereosal {

namespace {

const ColorFrame& as_rgb(const ColorFrame& frame, const char* what) {
  if (frame.space() != ColorSpace::Rgb8) throw Error(std::string(what) + ": expected an RGB frame");
  return frame;
}

// Accumulates f(center, neighbor, weight) over every non-center fovea offset
// with edge-replicated neighbors. Loops offsets outermost for locality.
template <typename F>
RasterMap accumulate_offsets(const RasterMap& m, const FoveaMask& fovea, F&& f) {
  const int w = m.width();
  const int h = m.height();
  RasterMap acc(m.dims(), 0.0);
  std::vector<int> xs(static_cast<std::size_t>(w));
  for (const auto& o : fovea.offsets()) {
    if (o.dx == 0 && o.dy == 0) continue;
    for (int x = 0; x < w; ++x) xs[static_cast<std::size_t>(x)] = std::clamp(x + o.dx, 0, w - 1);
    for (int y = 0; y < h; ++y) {
      const int ny = std::clamp(y + o.dy, 0, h - 1);
      const double* src = &m.values()[static_cast<std::size_t>(y) * w];
      const double* nbr = &m.values()[static_cast<std::size_t>(ny) * w];
      double* dst = &acc.values()[static_cast<std::size_t>(y) * w];
      for (int x = 0; x < w; ++x) dst[x] += f(src[x], nbr[xs[static_cast<std::size_t>(x)]], o.weight);
    }
  }
  return acc;
}

std::size_t nearest_rgb(const std::array<double, 3>& px, const auto& table) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < table.size(); ++k) {
    double d = 0.0;
    for (std::size_t c = 0; c < 3; ++c) d += (px[c] - table[k].rgb[c]) * (px[c] - table[k].rgb[c]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

}  // namespace

RasterMap local_variance_raw(const RasterMap& y, const FoveaMask& fovea, VarianceMode mode) {
  require_finite(y, "local_variance");
  const double n = static_cast<double>(fovea.size()) - 1.0;  // disk without the center
  if (n < 2.0) throw Error("local_variance: neighborhood must contain at least two pixels");
  if (mode == VarianceMode::CenterDeviation) {
    RasterMap acc = accumulate_offsets(y, fovea, [](double c, double v, double) { return (c - v) * (c - v); });
    for (double& v : acc.values()) v /= n - 1.0;
    return acc;
  }
  // Classical: sum and sum of squares over the full disk, center included.
  RasterMap sum = accumulate_offsets(y, fovea, [](double, double v, double) { return v; });
  RasterMap sq = accumulate_offsets(y, fovea, [](double, double v, double) { return v * v; });
  const double total = n + 1.0;
  RasterMap out(y.dims());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s = sum[i] + y[i];
    const double s2 = sq[i] + y[i] * y[i];
    out[i] = std::max(0.0, (s2 - s * s / total) / (total - 1.0));
  }
  return out;
}

RasterMap local_variance(const RasterMap& y, const FoveaMask& fovea, VarianceMode mode) {
  return normalize01(local_variance_raw(y, fovea, mode));
}

RasterMap surround_difference(const RasterMap& base, const FoveaMask& fovea) {
  require_finite(base, "center_surround");
  return accumulate_offsets(base, fovea, [](double c, double v, double wgt) { return std::abs(c - v) * wgt; });
}

RasterMap center_surround_raw(const CenterSurroundRequest& req) {
  require_same_dims(req.base_map.dims(), req.labeling.dims(), "center_surround");
  return segment_reduce(surround_difference(req.base_map, req.fovea), req.labeling, Reducer::Mean);
}

RasterMap center_surround(const CenterSurroundRequest& req) { return normalize01(center_surround_raw(req)); }

BrightnessMaps brightness_maps(const ColorFrame& frame, const FoveaMask& fovea, const SegmentLabeling& labeling,
                               VarianceMode mode) {
  const RasterMap y = convert_color(as_rgb(frame, "brightness_maps"), ColorSpace::Yuv).channel(0);
  const RasterMap var = local_variance(y, fovea, mode);
  return {center_surround({var, fovea, labeling}), center_surround({y, fovea, labeling})};
}

ColorContrastMaps color_variance_contrast(const ColorFrame& frame, const FoveaMask& fovea,
                                          const SegmentLabeling& labeling, VarianceMode mode) {
  const ColorFrame lab = convert_color(as_rgb(frame, "color_variance_contrast"), ColorSpace::Lab);
  const RasterMap va = local_variance(lab.channel(1), fovea, mode);
  const RasterMap vb = local_variance(lab.channel(2), fovea, mode);
  return {center_surround({va, fovea, labeling}), center_surround({vb, fovea, labeling})};
}

RasterMap color_histogram_map(const ColorFrame& frame, int bins) {
  as_rgb(frame, "color_histogram_map");
  if (bins < 1 || bins > 256) throw Error("color_histogram_map: bins per channel must be in [1,256]");
  auto quantize = [bins](double v) { return std::clamp(static_cast<int>(v * bins / 256.0), 0, bins - 1); };
  std::vector<std::size_t> bin_of(frame.pixel_count());
  std::unordered_map<std::size_t, std::size_t> counts;
  for (std::size_t i = 0; i < frame.pixel_count(); ++i) {
    const auto p = frame.pixel(i);
    const auto b = static_cast<std::size_t>((quantize(p[0]) * bins + quantize(p[1])) * bins + quantize(p[2]));
    bin_of[i] = b;
    ++counts[b];
  }
  const double n = static_cast<double>(frame.pixel_count());
  const double mean_p = 1.0 / static_cast<double>(counts.size());
  RasterMap out(frame.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(-(counts[bin_of[i]] / n) / mean_p);
  return out;
}

double mccamy_cct(double x, double y) {
  constexpr double kEpicenterX = 0.3320;
  constexpr double kEpicenterY = 0.1858;
  if (!(y > kEpicenterY)) return kCctMax;
  // Turning point of the cubic; beyond it the temperature would rise again.
  static const double n_turn = (7050.0 - std::sqrt(7050.0 * 7050.0 - 4.0 * 1347.0 * 6823.3)) / (2.0 * 1347.0);
  const double n = std::min((x - kEpicenterX) / (y - kEpicenterY), n_turn);
  const double cct = -449.0 * n * n * n + 3525.0 * n * n - 6823.3 * n + 5520.33;
  return std::clamp(cct, kCctMin, kCctMax);
}

double pixel_cct(const std::array<double, 3>& rgb) {
  const auto xyz = rgb_to_xyz(rgb);
  const double s = xyz[0] + xyz[1] + xyz[2];
  if (!(s > 0.0)) return mccamy_cct(0.31271, 0.32902);  // black: D65 white point
  return mccamy_cct(xyz[0] / s, xyz[1] / s);
}

RasterMap warmth_map(const ColorFrame& frame) {
  as_rgb(frame, "warmth_map");
  RasterMap inv(frame.dims());
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / pixel_cct(frame.pixel(i));
  return normalize01(inv);
}

double lab_saturation(double l, double a, double b) {
  const double c = std::hypot(a, b);
  const double denom = std::hypot(c, l);
  return denom > 0.0 ? c / denom : 0.0;
}

RasterMap saturation_map(const ColorFrame& frame) {
  const ColorFrame lab = convert_color(as_rgb(frame, "saturation_map"), ColorSpace::Lab);
  RasterMap out(frame.dims());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto p = lab.pixel(i);
    out[i] = lab_saturation(p[0], p[1], p[2]);
  }
  return out;
}

RasterMap hvs_sensitivity_map(const ColorFrame& frame, const SpectralTable& table) {
  as_rgb(frame, "hvs_sensitivity_map");
  if (table.empty()) throw Error("hvs_sensitivity_map: spectral table is empty");
  SpectralTable sorted = table;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SpectralEntry& a, const SpectralEntry& b) { return a.wavelength_nm < b.wavelength_nm; });
  RasterMap out(frame.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sorted[nearest_rgb(frame.pixel(i), sorted)].sensitivity;
  return out;
}

RasterMap empirical_color_map(const ColorFrame& frame, const EmpiricalTable& table) {
  as_rgb(frame, "empirical_color_map");
  if (table.empty()) throw Error("empirical_color_map: color table is empty");
  RasterMap out(frame.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = table[nearest_rgb(frame.pixel(i), table)].probability;
  return out;
}

}  // namespace stereosal
