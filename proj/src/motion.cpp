#include "stereosal/motion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <unordered_map>

#include "stereosal/imaging.hpp"

namespace stereosal {

namespace {

struct Candidate {
  int dx;
  int dy;
};

std::vector<Candidate> search_order(int search) {
  std::vector<Candidate> c;
  for (int dy = -search; dy <= search; ++dy) {
    for (int dx = -search; dx <= search; ++dx) c.push_back({dx, dy});
  }
  std::stable_sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
    return std::abs(a.dx) + std::abs(a.dy) < std::abs(b.dx) + std::abs(b.dy);
  });
  return c;
}

// Index of the lower bracketing block center and the interpolation weight.
struct Bracket {
  int lo;
  int hi;
  double t;
};

std::vector<Bracket> brackets(int length, const std::vector<double>& centers) {
  std::vector<Bracket> out(static_cast<std::size_t>(length));
  const int n = static_cast<int>(centers.size());
  for (int p = 0; p < length; ++p) {
    if (p <= centers.front()) {
      out[static_cast<std::size_t>(p)] = {0, 0, 0.0};
    } else if (p >= centers.back()) {
      out[static_cast<std::size_t>(p)] = {n - 1, n - 1, 0.0};
    } else {
      int k = 0;
      while (centers[static_cast<std::size_t>(k + 1)] < p) ++k;
      const double a = centers[static_cast<std::size_t>(k)];
      const double b = centers[static_cast<std::size_t>(k + 1)];
      out[static_cast<std::size_t>(p)] = {k, k + 1, (p - a) / (b - a)};
    }
  }
  return out;
}

}  // namespace

FlowField block_matching_flow(const RasterMap& prev, const RasterMap& cur, const BlockMatchParams& params) {
  require_same_dims(prev.dims(), cur.dims(), "block_matching_flow");
  if (params.block < 1 || params.search < 0) throw Error("block_matching_flow: block must be positive, search non-negative");
  const int w = prev.width();
  const int h = prev.height();
  const int b = params.block;
  const int nbx = (w + b - 1) / b;
  const int nby = (h + b - 1) / b;
  const auto order = search_order(params.search);

  std::vector<double> cx(static_cast<std::size_t>(nbx));
  std::vector<double> cy(static_cast<std::size_t>(nby));
  for (int i = 0; i < nbx; ++i) cx[static_cast<std::size_t>(i)] = i * b + (std::min(b, w - i * b) - 1) / 2.0;
  for (int j = 0; j < nby; ++j) cy[static_cast<std::size_t>(j)] = j * b + (std::min(b, h - j * b) - 1) / 2.0;

  RasterMap bdx(nbx, nby);
  RasterMap bdy(nbx, nby);
  for (int j = 0; j < nby; ++j) {
    for (int i = 0; i < nbx; ++i) {
      const int x0 = i * b;
      const int y0 = j * b;
      const int x1 = std::min(w, x0 + b);
      const int y1 = std::min(h, y0 + b);
      double best = std::numeric_limits<double>::infinity();
      Candidate best_c{0, 0};
      for (const auto& c : order) {
        double sad = 0.0;
        for (int y = y0; y < y1 && sad < best; ++y) {
          for (int x = x0; x < x1; ++x) sad += std::abs(prev.at(x, y) - cur.clamped(x + c.dx, y + c.dy));
        }
        if (sad < best) {
          best = sad;
          best_c = c;
        }
      }
      bdx.at(i, j) = best_c.dx;
      bdy.at(i, j) = best_c.dy;
    }
  }

  const auto bx = brackets(w, cx);
  const auto by = brackets(h, cy);
  FlowField flow{RasterMap(w, h), RasterMap(w, h), FlowSource::BlockMatching};
  for (int y = 0; y < h; ++y) {
    const auto& ry = by[static_cast<std::size_t>(y)];
    for (int x = 0; x < w; ++x) {
      const auto& rx = bx[static_cast<std::size_t>(x)];
      auto interp = [&](const RasterMap& m) {
        const double top = (1 - rx.t) * m.at(rx.lo, ry.lo) + rx.t * m.at(rx.hi, ry.lo);
        const double bottom = (1 - rx.t) * m.at(rx.lo, ry.hi) + rx.t * m.at(rx.hi, ry.hi);
        return (1 - ry.t) * top + ry.t * bottom;
      };
      flow.dx.at(x, y) = interp(bdx);
      flow.dy.at(x, y) = interp(bdy);
    }
  }
  return flow;
}

RasterMap dz_map_raw(const RasterMap& prev_depth, const RasterMap& cur_depth, const FlowField& flow) {
  require_same_dims(prev_depth.dims(), cur_depth.dims(), "dz_map");
  require_same_dims(prev_depth.dims(), flow.dx.dims(), "dz_map");
  require_same_dims(flow.dx.dims(), flow.dy.dims(), "dz_map");
  RasterMap dz(prev_depth.dims());
  for (int y = 0; y < dz.height(); ++y) {
    for (int x = 0; x < dz.width(); ++x) {
      dz.at(x, y) = prev_depth.at(x, y) - cur_depth.bilinear(x + flow.dx.at(x, y), y + flow.dy.at(x, y));
    }
  }
  return dz;
}

RasterMap dz_map(const RasterMap& prev_depth, const RasterMap& cur_depth, const FlowField& flow) {
  return normalize01(dz_map_raw(prev_depth, cur_depth, flow));
}

double velocity_component(double displacement, double frame_rate) {
  if (!(frame_rate > 1.0)) throw Error("frame rate must exceed 1");
  return (frame_rate - 1.0) * displacement;
}

double velocity_magnitude(double vx, double vy, double vz) { return std::sqrt(vx * vx + vy * vy + vz * vz); }

double z_emphasis(double dz_normalized) { return std::expm1(dz_normalized); }

double acceleration_value(double v_cur, double v_prev, double frame_rate) {
  return std::abs(velocity_component(v_cur - v_prev, frame_rate));
}

MotionMaps zero_motion_maps(Dims dims) {
  const RasterMap z(dims, 0.0);
  return {z, z, z, z, z, z, z, z};
}

RasterMap scale_displacement(const RasterMap& m, MotionScaling scaling) {
  if (scaling == MotionScaling::MinMax) return normalize01(m);
  const auto st = map_stats(m);
  RasterMap out(m.dims(), 0.0);
  if (!(st.stddev > 1e-12 * std::max(1.0, std::abs(st.mean)))) return out;
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = (m[i] - st.mean) / st.stddev;
  return out;
}

RasterMap surprise_pixels(const RasterMap& dx, const RasterMap& dy, const RasterMap& dz, int bins) {
  require_same_dims(dx.dims(), dy.dims(), "surprise");
  require_same_dims(dx.dims(), dz.dims(), "surprise");
  if (bins < 1) throw Error("surprise: bins per axis must be positive");
  auto quantizer = [bins](const RasterMap& m) {
    const auto st = map_stats(m);
    const double range = st.max - st.min;
    return [=](double v) {
      if (!(range > 0.0)) return 0;
      return std::clamp(static_cast<int>((v - st.min) / range * bins), 0, bins - 1);
    };
  };
  const auto qx = quantizer(dx);
  const auto qy = quantizer(dy);
  const auto qz = quantizer(dz);
  std::vector<long> bin_of(dx.size());
  std::unordered_map<long, std::size_t> counts;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const long key = (static_cast<long>(qx(dx[i])) * bins + qy(dy[i])) * bins + qz(dz[i]);
    bin_of[i] = key;
    ++counts[key];
  }
  const double n = static_cast<double>(dx.size());
  const double mean_p = 1.0 / static_cast<double>(counts.size());
  RasterMap out(dx.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(-(counts[bin_of[i]] / n) / mean_p);
  return out;
}

RasterMap surprise_map(const FlowField& flow, const RasterMap& dz_raw, int bins, const SegmentLabeling& labeling) {
  return segment_reduce(surprise_pixels(flow.dx, flow.dy, dz_raw, bins), labeling, Reducer::Mean);
}

VelocityMaps velocity_pixels(const RasterMap& dx_n, const RasterMap& dy_n, const RasterMap& dz_n, double fr) {
  require_same_dims(dx_n.dims(), dy_n.dims(), "velocity");
  require_same_dims(dx_n.dims(), dz_n.dims(), "velocity");
  VelocityMaps v{RasterMap(dx_n.dims()), RasterMap(dx_n.dims()), RasterMap(dx_n.dims()), RasterMap(dx_n.dims())};
  for (std::size_t i = 0; i < dx_n.size(); ++i) {
    v.vx[i] = velocity_component(dx_n[i], fr);
    v.vy[i] = velocity_component(dy_n[i], fr);
    v.vz[i] = velocity_component(dz_n[i], fr);
    v.v[i] = velocity_magnitude(v.vx[i], v.vy[i], v.vz[i]);
  }
  return v;
}

RasterMap z_emphasized_velocity(const RasterMap& dx_n, const RasterMap& dy_n, const RasterMap& dz_n, double fr,
                                const SegmentLabeling& labeling, Reducer reducer) {
  RasterMap dz1(dz_n.dims());
  for (std::size_t i = 0; i < dz1.size(); ++i) dz1[i] = z_emphasis(dz_n[i]);
  return normalize01(segment_reduce(velocity_pixels(dx_n, dy_n, dz1, fr).v, labeling, reducer));
}

RasterMap acceleration_map(const RasterMap& v_cur, const RasterMap& v_prev, const ViewingGeometry& g,
                           const SegmentLabeling& labeling, Reducer reducer) {
  require_same_dims(v_cur.dims(), v_prev.dims(), "acceleration_map");
  RasterMap a(v_cur.dims());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = acceleration_value(v_cur[i], v_prev[i], g.frame_rate);
  return normalize01(segment_reduce(a, labeling, reducer));
}

MotionMaps motion_maps(const FlowField& flow, const RasterMap& prev_depth, const RasterMap& cur_depth,
                       const ViewingGeometry& g, const SegmentLabeling& labeling, const RasterMap* prev_velocity,
                       const MotionParams& params) {
  require_finite(flow.dx, "flow dx");
  require_finite(flow.dy, "flow dy");
  require_same_dims(flow.dx.dims(), labeling.dims(), "motion_maps");
  const double fr = g.frame_rate;
  const RasterMap dz_raw = dz_map_raw(prev_depth, cur_depth, flow);
  const RasterMap dx_n = scale_displacement(flow.dx, params.scaling);
  const RasterMap dy_n = scale_displacement(flow.dy, params.scaling);
  const RasterMap dz_n = scale_displacement(dz_raw, params.scaling);
  const VelocityMaps v = velocity_pixels(dx_n, dy_n, dz_n, fr);
  auto reduce = [&](const RasterMap& m) { return normalize01(segment_reduce(m, labeling, params.reducer)); };

  MotionMaps out;
  out.dx = reduce(v.vx);
  out.dy = reduce(v.vy);
  out.dz = reduce(v.vz);
  out.velocity = reduce(v.v);
  out.z_emphasis = z_emphasized_velocity(dx_n, dy_n, dz_n, fr, labeling, params.reducer);
  out.acceleration = prev_velocity && prev_velocity->dims() == v.v.dims()
                         ? acceleration_map(v.v, *prev_velocity, g, labeling, params.reducer)
                         : RasterMap(labeling.dims(), 0.0);
  out.surprise = segment_reduce(surprise_pixels(flow.dx, flow.dy, dz_raw, params.surprise_bins), labeling, params.reducer);
  out.raw_velocity = v.v;
  return out;
}

}  // namespace stereosal
