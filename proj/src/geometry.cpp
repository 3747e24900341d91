#include "stereosal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace stereosal {

namespace {

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

void ViewingGeometry::validate() const {
  const bool positive = z_observer_cm > 0 && l_eyes_cm > 0 && screen_w_cm > 0 && screen_h_cm > 0 && res_w > 0 &&
                        res_h > 0 && alpha_deg > 0 && frame_rate > 0;
  if (!positive) throw Error("viewing geometry: all fields must be positive");
  if (alpha_deg < 0.25 || alpha_deg > 1.0) {
    throw Error("viewing geometry: alpha must lie in [0.25, 1] degrees, got " + std::to_string(alpha_deg));
  }
  const double px = pixels_per_cm_x();
  const double py = pixels_per_cm_y();
  if (std::abs(px - py) > kAspectTolerance * std::max(px, py)) {
    std::ostringstream msg;
    msg << "viewing geometry: pixel pitch differs between axes (" << px << " vs " << py << " px/cm)";
    throw Error(msg.str());
  }
}

ViewingGeometry ViewingGeometry::rescaled(Dims working) const {
  ViewingGeometry g = *this;
  g.res_w = working.width;
  g.res_h = working.height;
  return g;
}

double ViewingGeometry::pixels_per_degree() const {
  return z_observer_cm * std::tan(deg_to_rad(1.0)) * pixels_per_cm_y();
}

double ViewingGeometry::pixels_per_degree_x() const {
  return z_observer_cm * std::tan(deg_to_rad(1.0)) * pixels_per_cm_x();
}

int fovea_radius(const ViewingGeometry& g) {
  if (!(g.z_observer_cm > 0 && g.screen_h_cm > 0 && g.res_h > 0 && g.alpha_deg >= 0)) {
    throw Error("fovea_radius: degenerate geometry");
  }
  const double r = g.z_observer_cm * std::tan(deg_to_rad(g.alpha_deg)) * g.res_h / g.screen_h_cm;
  return std::max(1, static_cast<int>(std::lround(r)));
}

const DensityProfile& default_density_profile() {
  static const DensityProfile profile{{0.0, 1.00}, {0.1, 0.75}, {0.2, 0.55}, {0.3, 0.42},
                                      {0.4, 0.33}, {0.5, 0.26}, {0.6, 0.21}, {0.7, 0.17},
                                      {0.8, 0.14}, {0.9, 0.12}, {1.0, 0.10}};
  return profile;
}

void validate_density_profile(const DensityProfile& profile) {
  if (profile.empty()) throw Error("density profile is empty");
  if (profile.front().first != 0.0) throw Error("density profile must start at eccentricity 0");
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (!std::isfinite(profile[i].first) || !std::isfinite(profile[i].second) || profile[i].second < 0.0) {
      throw Error("density profile row " + std::to_string(i) + " is invalid");
    }
    if (i > 0 && !(profile[i].first > profile[i - 1].first)) {
      throw Error("density profile eccentricities must be strictly increasing (row " + std::to_string(i) + ")");
    }
    if (i > 0 && profile[i].second > profile[i - 1].second) {
      throw Error("density profile must be non-increasing (row " + std::to_string(i) + ")");
    }
  }
}

DensityProfile load_density_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open density profile: " + path.string());
  DensityProfile profile;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double ecc = 0.0;
    double density = 0.0;
    if (!(row >> ecc)) continue;
    if (!(row >> density)) throw Error(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    profile.emplace_back(ecc, density);
  }
  validate_density_profile(profile);
  return profile;
}

double interpolate_profile(const DensityProfile& profile, double eccentricity) {
  if (eccentricity <= profile.front().first) return profile.front().second;
  if (eccentricity >= profile.back().first) return profile.back().second;
  const auto hi = std::upper_bound(profile.begin(), profile.end(), eccentricity,
                                   [](double e, const auto& row) { return e < row.first; });
  const auto lo = hi - 1;
  const double t = (eccentricity - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

FoveaMask::FoveaMask(int radius, std::vector<FoveaOffset> offsets)
    : radius_(radius), offsets_(std::move(offsets)), grid_(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)), 0.0) {
  for (const auto& o : offsets_) {
    grid_[static_cast<std::size_t>((o.dy + radius_) * (2 * radius_ + 1) + (o.dx + radius_))] = o.weight;
  }
}

double FoveaMask::weight(int dx, int dy) const {
  if (std::abs(dx) > radius_ || std::abs(dy) > radius_) return 0.0;
  return grid_[static_cast<std::size_t>((dy + radius_) * (2 * radius_ + 1) + (dx + radius_))];
}

FoveaMask build_fovea_mask(int radius, const DensityProfile& profile) {
  validate_density_profile(profile);
  if (radius < 1) throw Error("fovea mask radius must be at least 1");
  std::vector<FoveaOffset> offsets;
  double total = 0.0;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy > radius * radius) continue;
      const double ecc = std::sqrt(static_cast<double>(dx * dx + dy * dy)) / radius;
      const double w = interpolate_profile(profile, ecc);
      offsets.push_back({dx, dy, w});
      total += w;
    }
  }
  if (!(total > 0.0)) throw Error("density profile yields an all-zero fovea mask");
  for (auto& o : offsets) o.weight /= total;
  return FoveaMask(radius, std::move(offsets));
}

FoveaMask build_fovea_mask(const ViewingGeometry& g, const DensityProfile& profile) {
  return build_fovea_mask(fovea_radius(g), profile);
}

double disparity_to_depth(double disparity_px, const ViewingGeometry& g) {
  const double denom = 1.0 + disparity_px * g.screen_w_cm / (g.l_eyes_cm * g.res_w);
  return g.z_observer_cm / std::max(denom, kDepthDenominatorFloor);
}

RasterMap disparity_to_depth(const RasterMap& disparity_px, const ViewingGeometry& g) {
  if (!(g.z_observer_cm > 0 && g.l_eyes_cm > 0 && g.screen_w_cm > 0 && g.res_w > 0)) {
    throw Error("disparity_to_depth: degenerate geometry");
  }
  RasterMap depth(disparity_px.dims());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (!std::isfinite(disparity_px[i])) throw Error("disparity_to_depth: non-finite disparity");
    depth[i] = disparity_to_depth(disparity_px[i], g);
  }
  return depth;
}

double discomfort_penalty(double disparity_arcmin) {
  const double d = std::abs(disparity_arcmin);
  if (d <= 60.0) return 1.0;
  return std::max(0.0, 1.36 - 0.006 * d);
}

double disparity_px_to_arcmin(double disparity_px, const ViewingGeometry& g) {
  return disparity_px * 60.0 / g.pixels_per_degree_x();
}

RasterMap discomfort_mask(const RasterMap& segment_disparity_px, const ViewingGeometry& g) {
  RasterMap mask(segment_disparity_px.dims());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = discomfort_penalty(disparity_px_to_arcmin(segment_disparity_px[i], g));
  }
  return mask;
}

}  // namespace stereosal
