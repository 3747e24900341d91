#pragma once

#include <vector>

#include "stereosal/geometry.hpp"
#include "stereosal/raster.hpp"
#include "stereosal/segmentation.hpp"

namespace stereosal {

struct GaborParams {
  std::vector<double> wavelengths{4.0, 8.0, 16.0, 32.0};  ///< pixels
  int orientations = 8;                                    ///< evenly spaced over 180 degrees
  double bandwidth_octaves = 1.0;
};

struct GaborFilter {
  double wavelength;
  double theta;  ///< radians; 0 tunes to intensity varying along x
  double sigma;
};

/// Envelope width for a given wavelength and octave bandwidth.
double gabor_sigma(double wavelength, double bandwidth_octaves);

std::vector<GaborFilter> gabor_bank(const GaborParams& params);

/// Complex response magnitude of one zero-mean Gabor filter (edge replicated).
RasterMap gabor_magnitude(const RasterMap& y, const GaborFilter& filter);

/// Root of summed squared magnitudes over the whole bank.
RasterMap gabor_energy(const RasterMap& y, const GaborParams& params = {});

/// Weighted average over the fovea disk (edge replicated).
RasterMap fovea_convolve(const RasterMap& m, const FoveaMask& fovea);

/// normalize01(fovea_convolve(gabor_energy(Y)) * edginess).
RasterMap texture_map(const RasterMap& luminance, const FoveaMask& fovea, const SegmentLabeling& labeling,
                      const GaborParams& params = {});
RasterMap texture_map(const ColorFrame& frame, const FoveaMask& fovea, const SegmentLabeling& labeling,
                      const GaborParams& params = {});

}  // namespace stereosal
