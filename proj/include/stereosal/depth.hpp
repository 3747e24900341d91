#pragma once

#include <array>
#include <vector>

#include "stereosal/geometry.hpp"
#include "stereosal/raster.hpp"
#include "stereosal/segmentation.hpp"

namespace stereosal {

/// normalize01(1 / depth). Throws on non-positive depth.
RasterMap depth_base(const RasterMap& depth_cm);

struct ProbePoint {
  double x;
  double y;
  double distance;  ///< to the centroid, before clamping
};

/// Four probe anchors per segment (up, right, down, left) at the extent plus a
/// 1% frame margin from the centroid; each anchor carries three sub-points
/// spread along its probe axis.
struct AbruptnessProbe {
  std::array<ProbePoint, 4> anchors;
  std::array<std::array<std::pair<double, double>, 3>, 4> sub_points;  ///< clamped to the frame
  double diff = 0.0;
};

struct AbruptnessParams {
  double margin_fraction = 0.01;
  double sub_point_spacing = 2.0;
  double smoothing_sigma = 2.0;
};

std::vector<AbruptnessProbe> abruptness_probes(const RasterMap& smoothed_depth, const SegmentLabeling& s,
                                               const std::vector<SegmentStats>& stats,
                                               const AbruptnessParams& params = {});

/// Per-segment probe differences after the above-mean rule, before normalization.
std::vector<double> abruptness_values(const std::vector<double>& diffs);

/// Smooths the depth, probes each segment and returns the normalized,
/// segment-constant abruptness mask.
RasterMap abruptness_mask(const RasterMap& depth_cm, const SegmentLabeling& s, const std::vector<SegmentStats>& stats,
                          const AbruptnessParams& params = {});

/// segment_reduce(depth_base) * abruptness * discomfort, before normalization.
RasterMap depth_feature_raw(const RasterMap& depth_cm, const SegmentLabeling& s, const std::vector<SegmentStats>& stats,
                            const RasterMap& discomfort, const AbruptnessParams& params = {});
RasterMap depth_feature(const RasterMap& depth_cm, const SegmentLabeling& s, const std::vector<SegmentStats>& stats,
                        const RasterMap& discomfort, const AbruptnessParams& params = {});

/// Discomfort mask from the segment-mean disparity in pixels.
RasterMap segment_discomfort(const RasterMap& disparity_px, const SegmentLabeling& s, const ViewingGeometry& g);

}  // namespace stereosal
