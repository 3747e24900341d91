#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stereosal/raster.hpp"

namespace stereosal {

enum class DetectionClass { Face, Person, Vehicle, Animal, Text, Horizon };

inline constexpr std::array<DetectionClass, 6> kDetectionClasses{DetectionClass::Face,   DetectionClass::Person,
                                                                  DetectionClass::Vehicle, DetectionClass::Animal,
                                                                  DetectionClass::Text,    DetectionClass::Horizon};

std::string to_string(DetectionClass c);
std::optional<DetectionClass> parse_detection_class(const std::string& token);

struct Detection {
  int frame = 0;
  DetectionClass cls = DetectionClass::Face;
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  double score = 1.0;

  Detection scaled(double sx, double sy) const;
};

/// Detections grouped by frame index.
class DetectionSet {
 public:
  void add(const Detection& d) { by_frame_[d.frame].push_back(d); }
  const std::vector<Detection>& frame(int index) const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  std::size_t count(DetectionClass c) const;

 private:
  std::map<int, std::vector<Detection>> by_frame_;
};

/// Sidecar records, one per line: `frame class x y w h [score]`, whitespace or
/// comma separated, '#' comments. Unknown classes are skipped with a warning;
/// boxes entirely outside `frame_dims` are dropped with a warning; any other
/// malformed line throws with its line number.
DetectionSet parse_detections(std::istream& in, std::optional<Dims> frame_dims = std::nullopt,
                              const std::string& source = "<stream>");
DetectionSet ingest_detections(const std::filesystem::path& path, std::optional<Dims> frame_dims = std::nullopt);

/// Width of the feathered rim outside each box, in pixels.
inline constexpr double kFeatherWidth = 5.0;

/// Falls from 1 at the box edge to 0 at kFeatherWidth.
double feather(double distance_outside);

/// Per-pixel max over boxes of the given class of score * feather.
RasterMap class_map(const std::vector<Detection>& dets, DetectionClass cls, Dims dims);

}  // namespace stereosal
