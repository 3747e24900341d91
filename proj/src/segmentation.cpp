#include "stereosal/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include "stereosal/imaging.hpp"

namespace stereosal {

SegmentLabeling::SegmentLabeling(Dims dims, std::vector<std::int32_t> labels)
    : dims_(dims), labels_(std::move(labels)) {
  if (dims.width <= 0 || dims.height <= 0) throw Error("segment labeling: empty frame");
  if (labels_.size() != dims.area()) throw Error("segment labeling: label count does not match frame size");
  std::int32_t max_id = -1;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0) {
      throw Error("segment labeling: negative id at pixel " + std::to_string(i) + " (unlabeled hole)");
    }
    max_id = std::max(max_id, labels_[i]);
  }
  std::vector<std::uint8_t> used(static_cast<std::size_t>(max_id) + 1, 0);
  for (auto l : labels_) used[static_cast<std::size_t>(l)] = 1;
  for (std::size_t id = 0; id < used.size(); ++id) {
    if (!used[id]) {
      throw Error("segment labeling: ids are not contiguous, id " + std::to_string(id) + " is unused (max id " +
                  std::to_string(max_id) + ")");
    }
  }
  k_ = max_id + 1;

  edges_.assign(labels_.size(), 0);
  const int w = dims.width;
  const int h = dims.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto l = label(x, y);
      const bool edge = (x > 0 && label(x - 1, y) != l) || (x + 1 < w && label(x + 1, y) != l) ||
                        (y > 0 && label(x, y - 1) != l) || (y + 1 < h && label(x, y + 1) != l);
      edges_[static_cast<std::size_t>(y) * w + x] = edge ? 1 : 0;
    }
  }
}

RasterMap SegmentLabeling::edge_map() const {
  RasterMap out(dims_);
  for (std::size_t i = 0; i < edges_.size(); ++i) out[i] = edges_[i];
  return out;
}

SegmentLabeling SegmentLabeling::canonical(Dims dims, const std::vector<std::int32_t>& raw_labels) {
  std::unordered_map<std::int32_t, std::int32_t> remap;
  std::vector<std::int32_t> out(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(raw_labels[i], static_cast<std::int32_t>(remap.size()));
    out[i] = it->second;
  }
  return SegmentLabeling(dims, std::move(out));
}

SegmentLabeling ingest_labels(Dims dims, std::vector<std::int32_t> labels) {
  return SegmentLabeling(dims, std::move(labels));
}

std::vector<SegmentStats> segment_stats(const SegmentLabeling& s) {
  std::vector<SegmentStats> stats(static_cast<std::size_t>(s.segment_count()));
  for (auto& st : stats) {
    st.min_x = st.min_y = std::numeric_limits<int>::max();
    st.max_x = st.max_y = std::numeric_limits<int>::min();
  }
  std::vector<double> sum_x(stats.size(), 0.0);
  std::vector<double> sum_y(stats.size(), 0.0);
  for (int y = 0; y < s.height(); ++y) {
    for (int x = 0; x < s.width(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * s.width() + x;
      auto& st = stats[static_cast<std::size_t>(s.label(i))];
      ++st.n;
      sum_x[static_cast<std::size_t>(s.label(i))] += x;
      sum_y[static_cast<std::size_t>(s.label(i))] += y;
      st.min_x = std::min(st.min_x, x);
      st.max_x = std::max(st.max_x, x);
      st.min_y = std::min(st.min_y, y);
      st.max_y = std::max(st.max_y, y);
      if (s.is_edge(i)) ++st.edge_pixels;
    }
  }
  for (std::size_t k = 0; k < stats.size(); ++k) {
    auto& st = stats[k];
    st.cx = sum_x[k] / static_cast<double>(st.n);
    st.cy = sum_y[k] / static_cast<double>(st.n);
    st.d_up = st.cy - st.min_y;
    st.d_right = st.max_x - st.cx;
    st.d_down = st.max_y - st.cy;
    st.d_left = st.cx - st.min_x;
  }
  for (int y = 0; y < s.height(); ++y) {
    for (int x = 0; x < s.width(); ++x) {
      auto& st = stats[static_cast<std::size_t>(s.label(x, y))];
      st.second_moment += (x - st.cx) * (x - st.cx) + (y - st.cy) * (y - st.cy);
    }
  }
  for (auto& st : stats) {
    const double n = static_cast<double>(st.n);
    st.compactness = st.second_moment > 0.0 ? std::min(1.0, n * n / (2.0 * std::numbers::pi * st.second_moment)) : 1.0;
  }
  return stats;
}

namespace {

using Lab = std::array<double, 3>;

double dist2(const Lab& a, const Lab& b) {
  return (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]);
}

std::vector<Lab> mean_shift_filter(const ColorFrame& lab, const SegmentationParams& p) {
  const int w = lab.width();
  const int h = lab.height();
  const double hr2 = p.range_radius * p.range_radius;
  const double conv2 = p.convergence * p.convergence;
  std::vector<Lab> out(lab.pixel_count());
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      double cx = x0;
      double cy = y0;
      Lab c = lab.pixel(x0, y0);
      for (int it = 0; it < p.max_iterations; ++it) {
        const int ix = static_cast<int>(std::lround(cx));
        const int iy = static_cast<int>(std::lround(cy));
        double sx = 0.0, sy = 0.0;
        Lab sc{0.0, 0.0, 0.0};
        int count = 0;
        for (int y = std::max(0, iy - p.spatial_radius); y <= std::min(h - 1, iy + p.spatial_radius); ++y) {
          for (int x = std::max(0, ix - p.spatial_radius); x <= std::min(w - 1, ix + p.spatial_radius); ++x) {
            const Lab q = lab.pixel(x, y);
            if (dist2(q, c) > hr2) continue;
            sx += x;
            sy += y;
            for (int k = 0; k < 3; ++k) sc[static_cast<std::size_t>(k)] += q[static_cast<std::size_t>(k)];
            ++count;
          }
        }
        if (count == 0) break;
        const double nx = sx / count;
        const double ny = sy / count;
        const Lab nc{sc[0] / count, sc[1] / count, sc[2] / count};
        const double shift = (nx - cx) * (nx - cx) + (ny - cy) * (ny - cy) + dist2(nc, c);
        cx = nx;
        cy = ny;
        c = nc;
        if (shift < conv2) break;
      }
      out[static_cast<std::size_t>(y0) * w + x0] = c;
    }
  }
  return out;
}

struct RegionInfo {
  std::size_t n = 0;
  Lab sum{0.0, 0.0, 0.0};
  Lab mean() const { return {sum[0] / n, sum[1] / n, sum[2] / n}; }
};

std::int32_t find_root(std::vector<std::int32_t>& parent, std::int32_t a) {
  while (parent[static_cast<std::size_t>(a)] != a) {
    parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
    a = parent[static_cast<std::size_t>(a)];
  }
  return a;
}

}  // namespace

SegmentLabeling segment(const ColorFrame& frame, const SegmentationParams& params) {
  if (params.spatial_radius < 1 || !(params.range_radius > 0) || params.min_region < 0 || params.max_iterations < 1) {
    throw Error("segment: invalid segmentation parameters");
  }
  const ColorFrame lab = frame.space() == ColorSpace::Lab ? frame : convert_color(frame, ColorSpace::Lab);
  const int w = lab.width();
  const int h = lab.height();
  const std::vector<Lab> filtered = mean_shift_filter(lab, params);

  // Connected components over filtered colors.
  const double join2 = 0.25 * params.range_radius * params.range_radius;
  std::vector<std::int32_t> labels(filtered.size(), -1);
  std::int32_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < filtered.size(); ++seed) {
    if (labels[seed] >= 0) continue;
    labels[seed] = next;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(i % static_cast<std::size_t>(w));
      const int y = static_cast<int>(i / static_cast<std::size_t>(w));
      const std::array<std::pair<int, int>, 4> nbrs{{{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}}};
      for (auto [nx, ny] : nbrs) {
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (labels[j] >= 0 || dist2(filtered[i], filtered[j]) > join2) continue;
        labels[j] = next;
        stack.push_back(j);
      }
    }
    ++next;
  }

  // Merge undersized regions into the adjacent region of closest mean color.
  std::vector<std::int32_t> parent(static_cast<std::size_t>(next));
  std::iota(parent.begin(), parent.end(), 0);
  for (;;) {
    for (auto& l : labels) l = find_root(parent, l);
    std::unordered_map<std::int32_t, RegionInfo> info;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto& r = info[labels[i]];
      ++r.n;
      for (int k = 0; k < 3; ++k) r.sum[static_cast<std::size_t>(k)] += filtered[i][static_cast<std::size_t>(k)];
    }
    if (info.size() <= 1) break;
    // Adjacency of small regions.
    std::unordered_map<std::int32_t, std::vector<std::int32_t>> adjacent;
    auto link = [&](std::int32_t a, std::int32_t b) {
      if (a == b) return;
      if (info[a].n < static_cast<std::size_t>(params.min_region)) adjacent[a].push_back(b);
      if (info[b].n < static_cast<std::size_t>(params.min_region)) adjacent[b].push_back(a);
    };
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        if (x + 1 < w) link(labels[i], labels[i + 1]);
        if (y + 1 < h) link(labels[i], labels[i + static_cast<std::size_t>(w)]);
      }
    }
    if (adjacent.empty()) break;
    std::vector<std::int32_t> small;
    for (const auto& [id, nbrs] : adjacent) small.push_back(id);
    std::sort(small.begin(), small.end(), [&](std::int32_t a, std::int32_t b) {
      return info[a].n != info[b].n ? info[a].n < info[b].n : a < b;
    });
    bool merged = false;
    for (const auto id : small) {
      const auto root = find_root(parent, id);
      if (root != id) continue;  // already absorbed this pass
      const Lab mean = info[id].mean();
      std::int32_t best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      auto& nbrs = adjacent[id];
      std::sort(nbrs.begin(), nbrs.end());
      nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
      for (const auto nb : nbrs) {
        const auto nr = find_root(parent, nb);
        if (nr == id) continue;
        const double d = dist2(mean, info[nb].mean());
        if (d < best_d) {
          best_d = d;
          best = nr;
        }
      }
      if (best >= 0) {
        parent[static_cast<std::size_t>(id)] = best;
        merged = true;
      }
    }
    if (!merged) break;
  }
  for (auto& l : labels) l = find_root(parent, l);
  return SegmentLabeling::canonical({w, h}, labels);
}

RasterMap paint_segments(const SegmentLabeling& s, const std::vector<double>& per_segment) {
  if (per_segment.size() != static_cast<std::size_t>(s.segment_count())) {
    throw Error("paint_segments: value count does not match segment count");
  }
  RasterMap out(s.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = per_segment[static_cast<std::size_t>(s.label(i))];
  return out;
}

RasterMap segment_reduce(const RasterMap& m, const SegmentLabeling& s, Reducer reducer) {
  require_same_dims(m.dims(), s.dims(), "segment_reduce");
  const auto k = static_cast<std::size_t>(s.segment_count());
  std::vector<double> value(k, 0.0);
  if (reducer == Reducer::Mean) {
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
      value[static_cast<std::size_t>(s.label(i))] += m[i];
      count[static_cast<std::size_t>(s.label(i))] += 1.0;
    }
    for (std::size_t j = 0; j < k; ++j) value[j] /= count[j];
  } else {
    std::vector<std::vector<double>> members(k);
    for (std::size_t i = 0; i < m.size(); ++i) members[static_cast<std::size_t>(s.label(i))].push_back(m[i]);
    for (std::size_t j = 0; j < k; ++j) {
      auto& v = members[j];
      if (reducer == Reducer::Min) {
        value[j] = *std::min_element(v.begin(), v.end());
      } else {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        value[j] = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
      }
    }
  }
  return paint_segments(s, value);
}

RasterMap edginess(const SegmentLabeling& s) {
  const auto stats = segment_stats(s);
  std::vector<double> value(stats.size());
  for (std::size_t k = 0; k < stats.size(); ++k) {
    value[k] = static_cast<double>(stats[k].edge_pixels) / static_cast<double>(stats[k].n);
  }
  return normalize01(paint_segments(s, value));
}

RasterMap compactness_map(const SegmentLabeling& s, const std::vector<SegmentStats>& stats) {
  std::vector<double> value(stats.size());
  for (std::size_t k = 0; k < stats.size(); ++k) value[k] = stats[k].compactness;
  return paint_segments(s, value);
}

RasterMap compactness_map(const SegmentLabeling& s) { return compactness_map(s, segment_stats(s)); }

RasterMap size_filter(const SegmentLabeling& s, const std::vector<SegmentStats>& stats, const ViewingGeometry& g) {
  const double min_w = 0.01 * g.res_w;
  const double min_h = 0.01 * g.res_h;
  std::vector<double> value(stats.size());
  for (std::size_t k = 0; k < stats.size(); ++k) {
    const bool too_small = stats[k].bbox_width() < min_w && stats[k].bbox_height() < min_h;
    value[k] = too_small ? 0.0 : 1.0;
  }
  return paint_segments(s, value);
}

RasterMap size_filter(const SegmentLabeling& s, const ViewingGeometry& g) {
  return size_filter(s, segment_stats(s), g);
}

}  // namespace stereosal
