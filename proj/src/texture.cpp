#include "stereosal/texture.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "stereosal/imaging.hpp"

namespace stereosal {

namespace {

using cd = std::complex<double>;

// 1-D convolution of complex rows/columns with a complex kernel, edge replicated.
std::vector<cd> convolve_rows(const std::vector<cd>& src, int w, int h, const std::vector<cd>& k) {
  const int r = static_cast<int>(k.size() / 2);
  std::vector<cd> out(src.size());
  for (int y = 0; y < h; ++y) {
    const cd* row = &src[static_cast<std::size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      cd acc = 0.0;
      for (int t = -r; t <= r; ++t) acc += k[static_cast<std::size_t>(t + r)] * row[std::clamp(x - t, 0, w - 1)];
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

std::vector<cd> convolve_cols(const std::vector<cd>& src, int w, int h, const std::vector<cd>& k) {
  const int r = static_cast<int>(k.size() / 2);
  std::vector<cd> out(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      cd acc = 0.0;
      for (int t = -r; t <= r; ++t) {
        acc += k[static_cast<std::size_t>(t + r)] * src[static_cast<std::size_t>(std::clamp(y - t, 0, h - 1)) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

}  // namespace

double gabor_sigma(double wavelength, double b) {
  const double p = std::pow(2.0, b);
  return wavelength / std::numbers::pi * std::sqrt(std::log(2.0) / 2.0) * (p + 1.0) / (p - 1.0);
}

std::vector<GaborFilter> gabor_bank(const GaborParams& params) {
  if (params.wavelengths.empty() || params.orientations < 1 || !(params.bandwidth_octaves > 0)) {
    throw Error("gabor_bank: invalid parameters");
  }
  std::vector<GaborFilter> bank;
  for (double lambda : params.wavelengths) {
    if (!(lambda >= 2.0)) throw Error("gabor_bank: wavelength must be at least 2 px");
    for (int o = 0; o < params.orientations; ++o) {
      bank.push_back({lambda, o * std::numbers::pi / params.orientations, gabor_sigma(lambda, params.bandwidth_octaves)});
    }
  }
  return bank;
}

// The isotropic envelope makes the kernel separable:
//   g(x,y) = e(x) e(y) exp(i k (x cos t + y sin t)).
// Subtracting K * e(x) e(y) removes the DC response; K is the carrier's
// envelope-weighted mean so the discrete kernel sums to exactly zero.
RasterMap gabor_magnitude(const RasterMap& y, const GaborFilter& f) {
  const int w = y.width();
  const int h = y.height();
  const int r = static_cast<int>(std::ceil(3.0 * f.sigma));
  const double k = 2.0 * std::numbers::pi / f.wavelength;
  const double kx = k * std::cos(f.theta);
  const double ky = k * std::sin(f.theta);
  std::vector<cd> ex(static_cast<std::size_t>(2 * r + 1));
  std::vector<cd> ey(ex.size());
  std::vector<cd> env(ex.size());
  cd sx = 0.0, sy = 0.0;
  double se = 0.0;
  for (int t = -r; t <= r; ++t) {
    const double e = std::exp(-0.5 * t * t / (f.sigma * f.sigma));
    env[static_cast<std::size_t>(t + r)] = e;
    ex[static_cast<std::size_t>(t + r)] = e * std::polar(1.0, kx * t);
    ey[static_cast<std::size_t>(t + r)] = e * std::polar(1.0, ky * t);
    sx += ex[static_cast<std::size_t>(t + r)];
    sy += ey[static_cast<std::size_t>(t + r)];
    se += e;
  }
  const cd dc = sx * sy / (se * se);

  std::vector<cd> src(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) src[i] = y[i];
  const auto carrier = convolve_cols(convolve_rows(src, w, h, ex), w, h, ey);
  const auto smooth = convolve_cols(convolve_rows(src, w, h, env), w, h, env);
  RasterMap out(y.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(carrier[i] - dc * smooth[i]);
  return out;
}

RasterMap gabor_energy(const RasterMap& y, const GaborParams& params) {
  require_finite(y, "gabor_energy");
  RasterMap acc(y.dims(), 0.0);
  for (const auto& f : gabor_bank(params)) {
    const RasterMap m = gabor_magnitude(y, f);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += m[i] * m[i];
  }
  for (double& v : acc.values()) v = std::sqrt(v);
  return acc;
}

RasterMap fovea_convolve(const RasterMap& m, const FoveaMask& fovea) {
  const int w = m.width();
  const int h = m.height();
  RasterMap out(m.dims(), 0.0);
  for (const auto& o : fovea.offsets()) {
    for (int y = 0; y < h; ++y) {
      const double* src = &m.values()[static_cast<std::size_t>(std::clamp(y + o.dy, 0, h - 1)) * w];
      double* dst = &out.values()[static_cast<std::size_t>(y) * w];
      for (int x = 0; x < w; ++x) dst[x] += o.weight * src[std::clamp(x + o.dx, 0, w - 1)];
    }
  }
  return out;
}

RasterMap texture_map(const RasterMap& luminance, const FoveaMask& fovea, const SegmentLabeling& labeling,
                      const GaborParams& params) {
  require_same_dims(luminance.dims(), labeling.dims(), "texture_map");
  return normalize01(multiply(fovea_convolve(gabor_energy(luminance, params), fovea), edginess(labeling)));
}

RasterMap texture_map(const ColorFrame& frame, const FoveaMask& fovea, const SegmentLabeling& labeling,
                      const GaborParams& params) {
  if (frame.space() != ColorSpace::Rgb8) throw Error("texture_map: expected an RGB frame");
  return texture_map(convert_color(frame, ColorSpace::Yuv).channel(0), fovea, labeling, params);
}

}  // namespace stereosal
