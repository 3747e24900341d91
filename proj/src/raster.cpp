#include "stereosal/raster.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stereosal {

RasterMap::RasterMap(int width, int height, double fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    std::ostringstream msg;
    msg << "raster dimensions must be positive, got " << width << "x" << height;
    throw Error(msg.str());
  }
  values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

RasterMap::RasterMap(int width, int height, std::vector<double> values) : RasterMap(width, height) {
  if (values.size() != values_.size()) {
    throw Error("raster value count does not match dimensions");
  }
  values_ = std::move(values);
}

double RasterMap::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return values_[index(x, y)];
}

double RasterMap::bilinear(double x, double y) const {
  x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * at(x0, y0) + fx * at(x1, y0);
  const double bottom = (1.0 - fx) * at(x0, y1) + fx * at(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

std::string to_string(ColorSpace space) {
  switch (space) {
    case ColorSpace::Rgb8: return "RGB-8bit";
    case ColorSpace::Yuv: return "YUV";
    case ColorSpace::Lab: return "CIELAB";
  }
  return "unknown";
}

ColorFrame::ColorFrame(int width, int height, ColorSpace space) : width_(width), height_(height), space_(space) {
  if (width <= 0 || height <= 0) {
    throw Error("frame dimensions must be positive");
  }
  data_.assign(3 * pixel_count(), 0.0);
}

std::array<double, 3> ColorFrame::pixel(int x, int y) const {
  return pixel(static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x));
}

void ColorFrame::set_pixel(int x, int y, std::array<double, 3> value) {
  set_pixel(static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x), value);
}

void ColorFrame::set_pixel(std::size_t i, std::array<double, 3> value) {
  data_[3 * i] = value[0];
  data_[3 * i + 1] = value[1];
  data_[3 * i + 2] = value[2];
}

RasterMap ColorFrame::channel(int c) const {
  if (c < 0 || c > 2) throw Error("channel index out of range");
  RasterMap out(width_, height_);
  for (std::size_t i = 0; i < pixel_count(); ++i) out[i] = data_[3 * i + static_cast<std::size_t>(c)];
  return out;
}

void require_same_dims(Dims a, Dims b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a.width << "x" << a.height << " vs " << b.width << "x" << b.height << ")";
    throw Error(msg.str());
  }
}

}  // namespace stereosal
