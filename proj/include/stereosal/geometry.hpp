#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "stereosal/raster.hpp"

namespace stereosal {

/// Physical viewing setup. Distances in cm, resolutions in pixels, angles in
/// degrees. Defaults describe a 46" HD display viewed from 183 cm.
struct ViewingGeometry {
  double z_observer_cm = 183.0;
  double l_eyes_cm = 6.3;
  double screen_w_cm = 101.8;
  double screen_h_cm = 57.25;
  int res_w = 1920;
  int res_h = 1080;
  double alpha_deg = 1.0;  ///< half-angle of highest acuity
  double frame_rate = 30.0;

  /// Relative tolerance on the horizontal/vertical pixels-per-cm agreement.
  static constexpr double kAspectTolerance = 0.05;

  /// Throws unless all fields are positive, 0.25 <= alpha <= 1 and pixel
  /// pitch agrees between the axes.
  void validate() const;

  /// Same physical display sampled on a different pixel grid.
  ViewingGeometry rescaled(Dims working) const;

  double pixels_per_cm_x() const { return res_w / screen_w_cm; }
  double pixels_per_cm_y() const { return res_h / screen_h_cm; }
  /// Pixels subtended by one degree of visual angle (vertical / horizontal axis).
  double pixels_per_degree() const;
  double pixels_per_degree_x() const;
};

/// Mask radius in pixels: z * tan(alpha) * res_h / screen_h, rounded, at least 1.
int fovea_radius(const ViewingGeometry& g);

/// (normalized eccentricity in [0,1] relative to the mask radius, relative density)
using DensityProfile = std::vector<std::pair<double, double>>;

/// Built-in photoreceptor density fall-off, 1.0 at the center to 0.1 at the rim.
const DensityProfile& default_density_profile();

/// Two-column whitespace-separated table; '#' starts a comment.
DensityProfile load_density_profile(const std::filesystem::path& path);

/// Throws unless non-empty, anchored at eccentricity 0, eccentricities strictly
/// increasing and densities non-increasing and non-negative.
void validate_density_profile(const DensityProfile& profile);

/// Linear interpolation, clamped to the end values outside the table.
double interpolate_profile(const DensityProfile& profile, double eccentricity);

struct FoveaOffset {
  int dx;
  int dy;
  double weight;
};

/// Circular weight disk. Offsets are listed in raster order; the center offset
/// is included with the largest weight. Weights sum to 1.
class FoveaMask {
 public:
  FoveaMask(int radius, std::vector<FoveaOffset> offsets);

  int radius() const { return radius_; }
  const std::vector<FoveaOffset>& offsets() const { return offsets_; }
  /// Weight at an offset; 0 outside the disk.
  double weight(int dx, int dy) const;
  double center_weight() const { return weight(0, 0); }
  std::size_t size() const { return offsets_.size(); }

 private:
  int radius_;
  std::vector<FoveaOffset> offsets_;
  std::vector<double> grid_;
};

FoveaMask build_fovea_mask(int radius, const DensityProfile& profile);
FoveaMask build_fovea_mask(const ViewingGeometry& g, const DensityProfile& profile = default_density_profile());

/// Floor applied to the disparity-to-depth denominator.
inline constexpr double kDepthDenominatorFloor = 1e-3;

double disparity_to_depth(double disparity_px, const ViewingGeometry& g);
/// depth = z / (1 + d * W / (L * R_W)) per pixel, in cm.
RasterMap disparity_to_depth(const RasterMap& disparity_px, const ViewingGeometry& g);

/// Penalty for a disparity magnitude expressed in minutes of arc:
/// 1 up to 60', then 1.36 - 0.006 d, floored at 0.
double discomfort_penalty(double disparity_arcmin);

double disparity_px_to_arcmin(double disparity_px, const ViewingGeometry& g);

/// Multiplicative penalty mask for a (segment-constant) disparity map in pixels.
RasterMap discomfort_mask(const RasterMap& segment_disparity_px, const ViewingGeometry& g);

}  // namespace stereosal
