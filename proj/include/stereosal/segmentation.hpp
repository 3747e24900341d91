#pragma once

#include <cstdint>
#include <vector>

#include "stereosal/geometry.hpp"
#include "stereosal/raster.hpp"

namespace stereosal {

/// Region partition of a frame. Ids are contiguous (0..k-1) and every id is
/// used. The edge map marks pixels with a 4-neighbor of a different label.
class SegmentLabeling {
 public:
  /// Validates and adopts an id-per-pixel image. Throws on out-of-range or
  /// non-contiguous ids (with the offending id in the message).
  SegmentLabeling(Dims dims, std::vector<std::int32_t> labels);

  Dims dims() const { return dims_; }
  int width() const { return dims_.width; }
  int height() const { return dims_.height; }
  int segment_count() const { return k_; }
  std::int32_t label(int x, int y) const { return labels_[static_cast<std::size_t>(y) * dims_.width + x]; }
  std::int32_t label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::int32_t>& labels() const { return labels_; }
  bool is_edge(std::size_t i) const { return edges_[i] != 0; }
  RasterMap edge_map() const;

  /// Renumbers segments in raster order of first appearance.
  static SegmentLabeling canonical(Dims dims, const std::vector<std::int32_t>& raw_labels);

 private:
  Dims dims_;
  int k_ = 0;
  std::vector<std::int32_t> labels_;
  std::vector<std::uint8_t> edges_;
};

struct SegmentStats {
  std::size_t n = 0;
  double cx = 0.0;
  double cy = 0.0;
  /// Largest extent from the centroid towards up, right, down, left.
  double d_up = 0.0;
  double d_right = 0.0;
  double d_down = 0.0;
  double d_left = 0.0;
  int min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  std::size_t edge_pixels = 0;
  /// Sum of squared distances of member pixels to the centroid.
  double second_moment = 0.0;
  /// n^2 / (2 pi second_moment), clamped to (0,1]; 1 for a disk.
  double compactness = 1.0;

  int bbox_width() const { return max_x - min_x + 1; }
  int bbox_height() const { return max_y - min_y + 1; }
};

std::vector<SegmentStats> segment_stats(const SegmentLabeling& s);

struct SegmentationParams {
  int spatial_radius = 6;
  double range_radius = 6.5;  ///< in CIELAB units
  int min_region = 20;        ///< pixels; smaller regions are merged into a neighbor
  int max_iterations = 5;
  double convergence = 0.1;
};

/// Mean-shift filtering in the joint (x, y, L*, a*, b*) domain followed by
/// connected-component grouping and minimum-region merging. Deterministic.
SegmentLabeling segment(const ColorFrame& frame, const SegmentationParams& params = {});

/// Adopts an externally produced label map (e.g. from a 16-bit PGM).
SegmentLabeling ingest_labels(Dims dims, std::vector<std::int32_t> labels);

enum class Reducer { Mean, Median, Min };

/// Replaces every pixel by the reducer applied over its segment.
RasterMap segment_reduce(const RasterMap& m, const SegmentLabeling& s, Reducer reducer = Reducer::Mean);

/// Per-segment value list -> segment-constant map.
RasterMap paint_segments(const SegmentLabeling& s, const std::vector<double>& per_segment);

/// Fraction of boundary pixels per segment, normalized to [0,1] over the frame.
RasterMap edginess(const SegmentLabeling& s);

/// Segment-constant compactness in (0,1].
RasterMap compactness_map(const SegmentLabeling& s, const std::vector<SegmentStats>& stats);
RasterMap compactness_map(const SegmentLabeling& s);

/// 0 on segments whose bounding box is below 1% of the resolution in both
/// directions, 1 elsewhere.
RasterMap size_filter(const SegmentLabeling& s, const std::vector<SegmentStats>& stats, const ViewingGeometry& g);
RasterMap size_filter(const SegmentLabeling& s, const ViewingGeometry& g);

}  // namespace stereosal
