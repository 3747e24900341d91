#pragma once

#include <vector>

#include "stereosal/raster.hpp"

namespace stereosal {

/// Linear rescale to [0,1]. A constant map (or one whose range is below
/// floating-point noise relative to its magnitude) becomes all zeros.
/// Throws on non-finite input.
RasterMap normalize01(const RasterMap& m);

/// True when every value lies in [0,1] (with a tolerance of `slack`).
bool is_normalized(const RasterMap& m, double slack = 1e-9);

/// Throws when any value is NaN or infinite.
void require_finite(const RasterMap& m, const char* what);

/// Sampled, unit-sum Gaussian kernel with radius ceil(4*sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian convolution with edge replication; sigma == 0 is identity.
RasterMap gaussian_blur(const RasterMap& m, double sigma);

/// BT.601 YUV or sRGB(D65) CIELAB from an RGB-8bit frame. Rgb8 -> Rgb8 is a copy.
ColorFrame convert_color(const ColorFrame& frame, ColorSpace target);

/// Single-pixel conversions used by convert_color (and by the color feature maps).
std::array<double, 3> rgb_to_yuv(std::array<double, 3> rgb);
std::array<double, 3> rgb_to_xyz(std::array<double, 3> rgb);
std::array<double, 3> rgb_to_lab(std::array<double, 3> rgb);

/// Local-maximum emphasis: phi = exp(f) - mean(f), then linearly rescaled to
/// [0,1]. Order preserving. Input must already be normalized.
RasterMap sparsity_project(const RasterMap& f);

struct MapStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};
MapStats map_stats(const RasterMap& m);

RasterMap multiply(const RasterMap& a, const RasterMap& b);
RasterMap absolute(const RasterMap& m);

/// Bilinear resampling onto a new grid (used to bring inputs to the working resolution).
RasterMap resize_bilinear(const RasterMap& m, Dims target);
/// Area-average downsampling when shrinking, bilinear when growing.
RasterMap resize_area(const RasterMap& m, Dims target);
ColorFrame resize_frame(const ColorFrame& frame, Dims target);

}  // namespace stereosal
