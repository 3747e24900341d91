#pragma once

#include "stereosal/color_tables.hpp"
#include "stereosal/geometry.hpp"
#include "stereosal/raster.hpp"
#include "stereosal/segmentation.hpp"

namespace stereosal {

enum class VarianceMode {
  CenterDeviation,  ///< squared deviations from the center pixel, disk without the center
  Classical,        ///< sample variance about the disk mean, center included
};

/// Unnormalized local variance over the fovea disk (unweighted).
RasterMap local_variance_raw(const RasterMap& y, const FoveaMask& fovea, VarianceMode mode = VarianceMode::CenterDeviation);
RasterMap local_variance(const RasterMap& y, const FoveaMask& fovea, VarianceMode mode = VarianceMode::CenterDeviation);

/// Per-pixel fovea-weighted absolute difference to the surround (edge replicated).
RasterMap surround_difference(const RasterMap& base, const FoveaMask& fovea);

struct CenterSurroundRequest {
  const RasterMap& base_map;
  const FoveaMask& fovea;
  const SegmentLabeling& labeling;
};

/// Segment mean of surround_difference, before normalization.
RasterMap center_surround_raw(const CenterSurroundRequest& req);
RasterMap center_surround(const CenterSurroundRequest& req);

struct BrightnessMaps {
  RasterMap variance_contrast;
  RasterMap contrast;
};
BrightnessMaps brightness_maps(const ColorFrame& frame, const FoveaMask& fovea, const SegmentLabeling& labeling,
                               VarianceMode mode = VarianceMode::CenterDeviation);

struct ColorContrastMaps {
  RasterMap a_map;
  RasterMap b_map;
};
ColorContrastMaps color_variance_contrast(const ColorFrame& frame, const FoveaMask& fovea,
                                          const SegmentLabeling& labeling,
                                          VarianceMode mode = VarianceMode::CenterDeviation);

/// exp(-P / mean occupied-bin probability) with a joint RGB histogram.
RasterMap color_histogram_map(const ColorFrame& frame, int bins_per_channel = 8);

/// McCamy correlated color temperature from CIE xy, clamped to [1000, 25000] K.
/// Chromaticities at or below the epicenter (y <= 0.1858) report the cold
/// limit; past the cubic's turning point the temperature is held at its minimum.
double mccamy_cct(double x, double y);
double pixel_cct(const std::array<double, 3>& rgb);
inline constexpr double kCctMin = 1000.0;
inline constexpr double kCctMax = 25000.0;

/// normalize01(1 / CCT).
RasterMap warmth_map(const ColorFrame& frame);

/// Chroma over hypotenuse of chroma and lightness; 0 for black.
double lab_saturation(double l, double a, double b);
RasterMap saturation_map(const ColorFrame& frame);

/// Sensitivity of the nearest spectral color (ties: lower wavelength).
RasterMap hvs_sensitivity_map(const ColorFrame& frame, const SpectralTable& table);

/// Probability of the nearest table color (ties: lower row index).
RasterMap empirical_color_map(const ColorFrame& frame, const EmpiricalTable& table);

}  // namespace stereosal
