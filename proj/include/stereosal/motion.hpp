#pragma once

#include <optional>

#include "stereosal/geometry.hpp"
#include "stereosal/raster.hpp"
#include "stereosal/segmentation.hpp"

namespace stereosal {

enum class FlowSource { External, BlockMatching };

/// Forward flow: prev(x, y) corresponds to cur(x + dx, y + dy). Pixels/frame.
struct FlowField {
  RasterMap dx;
  RasterMap dy;
  FlowSource source = FlowSource::External;
};

struct BlockMatchParams {
  int block = 16;
  int search = 24;
};

/// Exhaustive SAD block matching with edge-replicated reads. Among equal
/// costs the smallest |dx|+|dy| wins. Block-center vectors are bilinearly
/// interpolated to every pixel.
FlowField block_matching_flow(const RasterMap& prev, const RasterMap& cur, const BlockMatchParams& params = {});

/// prev_depth(x, y) - cur_depth(x + dx, y + dy), endpoints clamped, unnormalized.
RasterMap dz_map_raw(const RasterMap& prev_depth, const RasterMap& cur_depth, const FlowField& flow);
RasterMap dz_map(const RasterMap& prev_depth, const RasterMap& cur_depth, const FlowField& flow);

double velocity_component(double displacement, double frame_rate);
double velocity_magnitude(double vx, double vy, double vz);
double z_emphasis(double dz_normalized);
double acceleration_value(double v_cur, double v_prev, double frame_rate);

enum class MotionScaling { MinMax, Standardize };

struct MotionParams {
  BlockMatchParams block_match;
  int surprise_bins = 16;
  MotionScaling scaling = MotionScaling::MinMax;
  Reducer reducer = Reducer::Mean;
};

struct MotionMaps {
  RasterMap dx;           ///< reduced, normalized Vx
  RasterMap dy;           ///< reduced, normalized Vy
  RasterMap dz;           ///< reduced, normalized Vz
  RasterMap velocity;     ///< reduced, normalized V
  RasterMap z_emphasis;   ///< reduced, normalized V with exp(dz) - 1
  RasterMap acceleration; ///< reduced, normalized |A|
  RasterMap surprise;     ///< reduced exp(-p / mean p)
  RasterMap raw_velocity; ///< per-pixel V before reduction, feeds the next frame's acceleration
};

/// Zero maps (used for the first frame of a sequence).
MotionMaps zero_motion_maps(Dims dims);

/// Joint (dx, dy, dz) histogram rarity, bins over per-frame ranges; not normalized.
RasterMap surprise_pixels(const RasterMap& dx, const RasterMap& dy, const RasterMap& dz, int bins_per_axis);
RasterMap surprise_map(const FlowField& flow, const RasterMap& dz_raw, int bins_per_axis, const SegmentLabeling& labeling);

/// Per-frame scaling of a displacement map (min-max or z-score).
RasterMap scale_displacement(const RasterMap& m, MotionScaling scaling);

struct VelocityMaps {
  RasterMap vx, vy, vz, v;  ///< per pixel, unreduced
};
VelocityMaps velocity_pixels(const RasterMap& dx_n, const RasterMap& dy_n, const RasterMap& dz_n, double frame_rate);

/// Velocity magnitude with the z component replaced by exp(dz_n) - 1, reduced and normalized.
RasterMap z_emphasized_velocity(const RasterMap& dx_n, const RasterMap& dy_n, const RasterMap& dz_n, double frame_rate,
                                const SegmentLabeling& labeling, Reducer reducer = Reducer::Mean);

/// |(fr - 1)(V_cur - V_prev)| reduced over segments and normalized.
RasterMap acceleration_map(const RasterMap& v_cur, const RasterMap& v_prev, const ViewingGeometry& g,
                           const SegmentLabeling& labeling, Reducer reducer = Reducer::Mean);

/// All motion features for one frame pair. `prev_velocity` is the previous
/// frame's raw_velocity; without it the acceleration map is zero.
MotionMaps motion_maps(const FlowField& flow, const RasterMap& prev_depth, const RasterMap& cur_depth,
                       const ViewingGeometry& g, const SegmentLabeling& labeling, const RasterMap* prev_velocity,
                       const MotionParams& params = {});

}  // namespace stereosal
