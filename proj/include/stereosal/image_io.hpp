#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "stereosal/raster.hpp"

namespace stereosal::io {

namespace fs = std::filesystem;

/// Any format OpenCV decodes (PNG, PPM, JPEG, ...), returned as RGB-8bit.
ColorFrame read_color_frame(const fs::path& path);
void write_color_frame(const fs::path& path, const ColorFrame& frame);

/// Scalar map from an 8/16-bit grayscale image or a raw float container
/// (".fmap"). Integer samples are mapped as value * scale + offset.
RasterMap read_scalar_map(const fs::path& path, double scale = 1.0, double offset = 0.0);

/// Writes a [0,1] map as 8- or 16-bit grayscale (format from the extension).
/// Values are clamped to [0,1] before quantization.
void write_normalized_image(const fs::path& path, const RasterMap& map, int bits = 8);

/// 16-bit grayscale with raw integer samples (values must lie in [0,65535]).
void write_uint16_image(const fs::path& path, const RasterMap& map);

// Raw float container: uint32 width, uint32 height (little-endian), then
// width*height little-endian IEEE-754 float32 values in row-major order.
void write_raw_map(std::ostream& out, const RasterMap& map);
RasterMap read_raw_map(std::istream& in);
void write_raw_map(const fs::path& path, const RasterMap& map);
RasterMap read_raw_map(const fs::path& path);

struct FlowPair {
  RasterMap dx;
  RasterMap dy;
};

/// Middlebury ".flo" (tag "PIEH") or a raw container holding dx then dy.
FlowPair read_flow(const fs::path& path);
void write_flo(const fs::path& path, const FlowPair& flow);

struct LabelImage {
  Dims dims;
  std::vector<std::int32_t> labels;
};
LabelImage read_label_image(const fs::path& path);
void write_label_image(const fs::path& path, const LabelImage& labels);

/// Regular files in `dir` with an image/raster extension, sorted by name.
std::vector<fs::path> list_frame_files(const fs::path& dir);

}  // namespace stereosal::io
