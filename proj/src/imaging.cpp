#include "stereosal/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stereosal {

void require_finite(const RasterMap& m, const char* what) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m[i])) {
      const int x = static_cast<int>(i % static_cast<std::size_t>(m.width()));
      const int y = static_cast<int>(i / static_cast<std::size_t>(m.width()));
      throw Error(std::string(what) + ": non-finite value at (" + std::to_string(x) + "," + std::to_string(y) + ")");
    }
  }
}

RasterMap normalize01(const RasterMap& m) {
  require_finite(m, "normalize01");
  if (m.empty()) return m;
  const auto [lo_it, hi_it] = std::minmax_element(m.values().begin(), m.values().end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  RasterMap out(m.dims(), 0.0);
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  if (hi - lo <= 1e-12 * scale) return out;
  const double inv = 1.0 / (hi - lo);
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = (m[i] - lo) * inv;
  // Pin the extremes so the range is exactly [0,1].
  out[static_cast<std::size_t>(lo_it - m.values().begin())] = 0.0;
  out[static_cast<std::size_t>(hi_it - m.values().begin())] = 1.0;
  return out;
}

bool is_normalized(const RasterMap& m, double slack) {
  return std::all_of(m.values().begin(), m.values().end(),
                     [slack](double v) { return std::isfinite(v) && v >= -slack && v <= 1.0 + slack; });
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma >= 0.0)) throw Error("gaussian kernel sigma must be non-negative");
  if (sigma == 0.0) return {1.0};
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

RasterMap gaussian_blur(const RasterMap& m, double sigma) {
  if (!(sigma >= 0.0)) throw Error("gaussian_blur: sigma must be non-negative");
  if (sigma == 0.0 || m.empty()) return m;
  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const int w = m.width();
  const int h = m.height();
  RasterMap tmp(m.dims());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[static_cast<std::size_t>(i + radius)] * m.clamped(x + i, y);
      tmp.at(x, y) = acc;
    }
  }
  RasterMap out(m.dims());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[static_cast<std::size_t>(i + radius)] * tmp.clamped(x, y + i);
      out.at(x, y) = acc;
    }
  }
  return out;
}

std::array<double, 3> rgb_to_yuv(std::array<double, 3> rgb) {
  const auto [r, g, b] = rgb;
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  const double u = 0.492 * (b - y);
  const double v = 0.877 * (r - y);
  return {y, u, v};
}

namespace {

double srgb_to_linear(double c8) {
  const double c = c8 / 255.0;
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

std::array<double, 3> rgb_to_xyz(std::array<double, 3> rgb) {
  const double r = srgb_to_linear(rgb[0]);
  const double g = srgb_to_linear(rgb[1]);
  const double b = srgb_to_linear(rgb[2]);
  return {0.4124564 * r + 0.3575761 * g + 0.1804375 * b,
          0.2126729 * r + 0.7151522 * g + 0.0721750 * b,
          0.0193339 * r + 0.1191920 * g + 0.9503041 * b};
}

std::array<double, 3> rgb_to_lab(std::array<double, 3> rgb) {
  constexpr double xn = 0.95047;
  constexpr double yn = 1.0;
  constexpr double zn = 1.08883;
  const auto [x, y, z] = rgb_to_xyz(rgb);
  const double fx = lab_f(x / xn);
  const double fy = lab_f(y / yn);
  const double fz = lab_f(z / zn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

ColorFrame convert_color(const ColorFrame& frame, ColorSpace target) {
  if (frame.space() != ColorSpace::Rgb8) {
    throw Error("convert_color: unsupported conversion " + to_string(frame.space()) + " -> " + to_string(target));
  }
  if (target == ColorSpace::Rgb8) return frame;
  ColorFrame out(frame.width(), frame.height(), target);
  for (std::size_t i = 0; i < frame.pixel_count(); ++i) {
    const auto px = frame.pixel(i);
    out.set_pixel(i, target == ColorSpace::Yuv ? rgb_to_yuv(px) : rgb_to_lab(px));
  }
  return out;
}

RasterMap sparsity_project(const RasterMap& f) {
  require_finite(f, "sparsity_project");
  if (!is_normalized(f)) throw Error("sparsity_project: input must be normalized to [0,1]");
  double mean = 0.0;
  for (double v : f.values()) mean += v;
  mean /= static_cast<double>(f.size());
  RasterMap phi(f.dims());
  for (std::size_t i = 0; i < f.size(); ++i) phi[i] = std::exp(f[i]) - mean;
  const auto [lo, hi] = std::minmax_element(phi.values().begin(), phi.values().end());
  RasterMap out(f.dims(), 0.0);
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = (phi[i] - *lo) / range;
  return out;
}

MapStats map_stats(const RasterMap& m) {
  MapStats s;
  if (m.empty()) return s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -s.min;
  double sum = 0.0;
  for (double v : m.values()) {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    sum += v;
  }
  s.mean = sum / static_cast<double>(m.size());
  double ss = 0.0;
  for (double v : m.values()) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(m.size()));
  return s;
}

RasterMap multiply(const RasterMap& a, const RasterMap& b) {
  require_same_dims(a.dims(), b.dims(), "multiply");
  RasterMap out(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

RasterMap absolute(const RasterMap& m) {
  RasterMap out(m.dims());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = std::abs(m[i]);
  return out;
}

RasterMap resize_bilinear(const RasterMap& m, Dims target) {
  if (m.dims() == target) return m;
  RasterMap out(target);
  const double sx = static_cast<double>(m.width()) / target.width;
  const double sy = static_cast<double>(m.height()) / target.height;
  for (int y = 0; y < target.height; ++y) {
    for (int x = 0; x < target.width; ++x) {
      out.at(x, y) = m.bilinear((x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
    }
  }
  return out;
}

RasterMap resize_area(const RasterMap& m, Dims target) {
  if (m.dims() == target) return m;
  if (target.width > m.width() || target.height > m.height()) return resize_bilinear(m, target);
  RasterMap sum(target, 0.0);
  RasterMap count(target, 0.0);
  for (int y = 0; y < m.height(); ++y) {
    const int ty = static_cast<int>(static_cast<long long>(y) * target.height / m.height());
    for (int x = 0; x < m.width(); ++x) {
      const int tx = static_cast<int>(static_cast<long long>(x) * target.width / m.width());
      sum.at(tx, ty) += m.at(x, y);
      count.at(tx, ty) += 1.0;
    }
  }
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] /= count[i];
  return sum;
}

ColorFrame resize_frame(const ColorFrame& frame, Dims target) {
  if (frame.dims() == target) return frame;
  ColorFrame out(target.width, target.height, frame.space());
  std::array<RasterMap, 3> channels;
  for (int c = 0; c < 3; ++c) channels[static_cast<std::size_t>(c)] = resize_area(frame.channel(c), target);
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    out.set_pixel(i, {channels[0][i], channels[1][i], channels[2][i]});
  }
  return out;
}

}  // namespace stereosal
