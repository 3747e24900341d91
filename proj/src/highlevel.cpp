#include "stereosal/highlevel.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stereosal {

std::string to_string(DetectionClass c) {
  switch (c) {
    case DetectionClass::Face: return "face";
    case DetectionClass::Person: return "person";
    case DetectionClass::Vehicle: return "vehicle";
    case DetectionClass::Animal: return "animal";
    case DetectionClass::Text: return "text";
    case DetectionClass::Horizon: return "horizon";
  }
  return "unknown";
}

std::optional<DetectionClass> parse_detection_class(const std::string& token) {
  for (auto c : kDetectionClasses) {
    if (to_string(c) == token) return c;
  }
  return std::nullopt;
}

Detection Detection::scaled(double sx, double sy) const {
  Detection d = *this;
  d.x *= sx;
  d.w *= sx;
  d.y *= sy;
  d.h *= sy;
  return d;
}

const std::vector<Detection>& DetectionSet::frame(int index) const {
  static const std::vector<Detection> kNone;
  const auto it = by_frame_.find(index);
  return it == by_frame_.end() ? kNone : it->second;
}

std::size_t DetectionSet::size() const {
  std::size_t n = 0;
  for (const auto& [f, dets] : by_frame_) n += dets.size();
  return n;
}

std::size_t DetectionSet::count(DetectionClass c) const {
  std::size_t n = 0;
  for (const auto& [f, dets] : by_frame_) {
    n += static_cast<std::size_t>(std::count_if(dets.begin(), dets.end(), [c](const Detection& d) { return d.cls == c; }));
  }
  return n;
}

DetectionSet parse_detections(std::istream& in, std::optional<Dims> frame_dims, const std::string& source) {
  DetectionSet set;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::vector<std::string> tok;
    for (std::string t; row >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (tok.size() != 6 && tok.size() != 7) throw Error(where + ": expected `frame class x y w h [score]`");
    Detection d;
    try {
      std::size_t used = 0;
      d.frame = std::stoi(tok[0], &used);
      if (used != tok[0].size() || d.frame < 0) throw Error("");
      double* fields[] = {&d.x, &d.y, &d.w, &d.h};
      for (std::size_t k = 0; k < 4; ++k) {
        *fields[k] = std::stod(tok[k + 2], &used);
        if (used != tok[k + 2].size()) throw Error("");
      }
      if (tok.size() == 7) {
        d.score = std::stod(tok[6], &used);
        if (used != tok[6].size()) throw Error("");
      }
    } catch (const std::exception&) {
      throw Error(where + ": malformed numeric field");
    }
    if (!std::isfinite(d.x) || !std::isfinite(d.y) || !(d.w > 0) || !(d.h > 0) || !std::isfinite(d.w) ||
        !std::isfinite(d.h)) {
      throw Error(where + ": box must be finite with positive size");
    }
    if (!std::isfinite(d.score) || d.score < 0.0 || d.score > 1.0) throw Error(where + ": score must lie in [0,1]");
    const auto cls = parse_detection_class(tok[1]);
    if (!cls) {
      spdlog::warn("{}: unknown detection class '{}' skipped", where, tok[1]);
      continue;
    }
    d.cls = *cls;
    if (frame_dims) {
      const bool outside = d.x + d.w <= 0 || d.y + d.h <= 0 || d.x >= frame_dims->width || d.y >= frame_dims->height;
      if (outside) {
        spdlog::warn("{}: box lies entirely outside the frame, record rejected", where);
        continue;
      }
    }
    set.add(d);
  }
  return set;
}

DetectionSet ingest_detections(const std::filesystem::path& path, std::optional<Dims> frame_dims) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open detections: " + path.string());
  return parse_detections(in, frame_dims, path.string());
}

double feather(double d) {
  if (d <= 0.0) return 1.0;
  if (d >= kFeatherWidth) return 0.0;
  const double sigma = kFeatherWidth / 3.0;
  auto e = [sigma](double t) { return std::exp(-0.5 * t * t / (sigma * sigma)); };
  return (e(d) - e(kFeatherWidth)) / (1.0 - e(kFeatherWidth));
}

RasterMap class_map(const std::vector<Detection>& dets, DetectionClass cls, Dims dims) {
  RasterMap out(dims, 0.0);
  for (const auto& d : dets) {
    if (d.cls != cls) continue;
    // Box covers pixel centers x in [x0, x1], y in [y0, y1].
    const bool horizon = cls == DetectionClass::Horizon;
    const double x0 = horizon ? 0.0 : d.x;
    const double x1 = horizon ? dims.width - 1.0 : d.x + d.w - 1.0;
    const double y0 = d.y;
    const double y1 = d.y + d.h - 1.0;
    const int px0 = std::max(0, static_cast<int>(std::floor(x0 - kFeatherWidth)));
    const int px1 = std::min(dims.width - 1, static_cast<int>(std::ceil(x1 + kFeatherWidth)));
    const int py0 = std::max(0, static_cast<int>(std::floor(y0 - kFeatherWidth)));
    const int py1 = std::min(dims.height - 1, static_cast<int>(std::ceil(y1 + kFeatherWidth)));
    for (int y = py0; y <= py1; ++y) {
      const double dy = std::max({0.0, y0 - y, y - y1});
      for (int x = px0; x <= px1; ++x) {
        const double dx = std::max({0.0, x0 - x, x - x1});
        const double v = d.score * feather(std::hypot(dx, dy));
        out.at(x, y) = std::max(out.at(x, y), v);
      }
    }
  }
  return out;
}

}  // namespace stereosal
