#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stereosal {

/// Raised for every contract violation (bad input, malformed file, dimension mismatch).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dims {
  int width = 0;
  int height = 0;

  std::size_t area() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Single-channel real-valued image stored row-major. All per-pixel maps
/// (feature maps, saliency maps, depth, flow components) use this type.
class RasterMap {
 public:
  RasterMap() = default;
  RasterMap(int width, int height, double fill = 0.0);
  RasterMap(Dims dims, double fill = 0.0) : RasterMap(dims.width, dims.height, fill) {}
  RasterMap(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  Dims dims() const { return {width_, height_}; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& at(int x, int y) { return values_[index(x, y)]; }
  double at(int x, int y) const { return values_[index(x, y)]; }

  /// Edge-replicated read: coordinates outside the grid are clamped to the border.
  double clamped(int x, int y) const;

  /// Bilinear sample at a real-valued position, clamped to the border.
  double bilinear(double x, double y) const;

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  friend bool operator==(const RasterMap&, const RasterMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

enum class ColorSpace { Rgb8, Yuv, Lab };

std::string to_string(ColorSpace space);

/// Three-channel frame. Rgb8 channels are in [0,255]; Yuv follows BT.601 with
/// Y in [0,255]; Lab is CIE L*a*b* (D65).
class ColorFrame {
 public:
  ColorFrame() = default;
  ColorFrame(int width, int height, ColorSpace space);

  int width() const { return width_; }
  int height() const { return height_; }
  Dims dims() const { return {width_, height_}; }
  ColorSpace space() const { return space_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }

  std::array<double, 3> pixel(int x, int y) const;
  std::array<double, 3> pixel(std::size_t i) const { return {data_[3 * i], data_[3 * i + 1], data_[3 * i + 2]}; }
  void set_pixel(int x, int y, std::array<double, 3> value);
  void set_pixel(std::size_t i, std::array<double, 3> value);

  RasterMap channel(int c) const;

 private:
  int width_ = 0;
  int height_ = 0;
  ColorSpace space_ = ColorSpace::Rgb8;
  std::vector<double> data_;
};

void require_same_dims(Dims a, Dims b, const char* what);

}  // namespace stereosal
