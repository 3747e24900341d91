#include "stereosal/image_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace stereosal::io {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (!in) throw Error("raw container: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }

cv::Mat read_unchanged(const fs::path& path) {
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (img.empty()) throw Error("cannot decode image: " + path.string());
  return img;
}

std::string lower_ext(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

void write_mat(const fs::path& path, const cv::Mat& mat) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), mat)) throw Error("cannot write image: " + path.string());
}

}  // namespace

ColorFrame read_color_frame(const fs::path& path) {
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (img.empty()) throw Error("cannot decode frame: " + path.string());
  ColorFrame frame(img.cols, img.rows, ColorSpace::Rgb8);
  for (int y = 0; y < img.rows; ++y) {
    const auto* row = img.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.cols; ++x) frame.set_pixel(x, y, {double(row[x][2]), double(row[x][1]), double(row[x][0])});
  }
  return frame;
}

void write_color_frame(const fs::path& path, const ColorFrame& frame) {
  if (frame.space() != ColorSpace::Rgb8) throw Error("write_color_frame: frame must be RGB-8bit");
  cv::Mat img(frame.height(), frame.width(), CV_8UC3);
  for (int y = 0; y < frame.height(); ++y) {
    auto* row = img.ptr<cv::Vec3b>(y);
    for (int x = 0; x < frame.width(); ++x) {
      const auto p = frame.pixel(x, y);
      for (int c = 0; c < 3; ++c) row[x][2 - c] = cv::saturate_cast<unsigned char>(std::lround(p[static_cast<std::size_t>(c)]));
    }
  }
  write_mat(path, img);
}

RasterMap read_scalar_map(const fs::path& path, double scale, double offset) {
  if (lower_ext(path) == ".fmap") return read_raw_map(path);
  cv::Mat img = read_unchanged(path);
  if (img.channels() != 1) throw Error("expected a single-channel image: " + path.string());
  RasterMap out(img.cols, img.rows);
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      double v = 0.0;
      switch (img.depth()) {
        case CV_8U: v = img.at<unsigned char>(y, x); break;
        case CV_16U: v = img.at<std::uint16_t>(y, x); break;
        case CV_32F: v = img.at<float>(y, x); break;
        default: throw Error("unsupported sample depth in " + path.string());
      }
      out.at(x, y) = v * scale + offset;
    }
  }
  return out;
}

void write_normalized_image(const fs::path& path, const RasterMap& map, int bits) {
  if (bits != 8 && bits != 16) throw Error("write_normalized_image: bits must be 8 or 16");
  const double full = bits == 8 ? 255.0 : 65535.0;
  cv::Mat img(map.height(), map.width(), bits == 8 ? CV_8UC1 : CV_16UC1);
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const double v = std::clamp(map.at(x, y), 0.0, 1.0) * full;
      if (bits == 8) {
        img.at<unsigned char>(y, x) = static_cast<unsigned char>(std::lround(v));
      } else {
        img.at<std::uint16_t>(y, x) = static_cast<std::uint16_t>(std::lround(v));
      }
    }
  }
  write_mat(path, img);
}

void write_uint16_image(const fs::path& path, const RasterMap& map) {
  cv::Mat img(map.height(), map.width(), CV_16UC1);
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const double v = std::round(map.at(x, y));
      if (v < 0.0 || v > 65535.0) throw Error("write_uint16_image: value out of 16-bit range");
      img.at<std::uint16_t>(y, x) = static_cast<std::uint16_t>(v);
    }
  }
  write_mat(path, img);
}

void write_raw_map(std::ostream& out, const RasterMap& map) {
  put_u32(out, static_cast<std::uint32_t>(map.width()));
  put_u32(out, static_cast<std::uint32_t>(map.height()));
  for (double v : map.values()) put_f32(out, static_cast<float>(v));
  if (!out) throw Error("raw container: write failed");
}

RasterMap read_raw_map(std::istream& in) {
  const std::uint32_t w = get_u32(in);
  const std::uint32_t h = get_u32(in);
  if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) throw Error("raw container: implausible dimensions");
  RasterMap map(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = get_f32(in);
  if (!in) throw Error("raw container: truncated payload");
  return map;
}

void write_raw_map(const fs::path& path, const RasterMap& map) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  write_raw_map(out, map);
}

RasterMap read_raw_map(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  return read_raw_map(in);
}

FlowPair read_flow(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open flow file: " + path.string());
  if (lower_ext(path) == ".flo") {
    const float tag = get_f32(in);
    if (tag != 202021.25f) throw Error("flow file lacks the PIEH tag: " + path.string());
    const auto w = static_cast<int>(get_u32(in));
    const auto h = static_cast<int>(get_u32(in));
    if (w <= 0 || h <= 0 || w > (1 << 16) || h > (1 << 16)) throw Error("flow file: implausible dimensions");
    FlowPair flow{RasterMap(w, h), RasterMap(w, h)};
    for (std::size_t i = 0; i < flow.dx.size(); ++i) {
      flow.dx[i] = get_f32(in);
      flow.dy[i] = get_f32(in);
    }
    if (!in) throw Error("flow file truncated: " + path.string());
    return flow;
  }
  FlowPair flow{read_raw_map(in), read_raw_map(in)};
  require_same_dims(flow.dx.dims(), flow.dy.dims(), "raw flow container");
  return flow;
}

void write_flo(const fs::path& path, const FlowPair& flow) {
  require_same_dims(flow.dx.dims(), flow.dy.dims(), "write_flo");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  put_f32(out, 202021.25f);
  put_u32(out, static_cast<std::uint32_t>(flow.dx.width()));
  put_u32(out, static_cast<std::uint32_t>(flow.dx.height()));
  for (std::size_t i = 0; i < flow.dx.size(); ++i) {
    put_f32(out, static_cast<float>(flow.dx[i]));
    put_f32(out, static_cast<float>(flow.dy[i]));
  }
}

LabelImage read_label_image(const fs::path& path) {
  cv::Mat img = read_unchanged(path);
  if (img.channels() != 1 || (img.depth() != CV_16U && img.depth() != CV_8U)) {
    throw Error("label map must be single-channel 8/16-bit: " + path.string());
  }
  LabelImage out{{img.cols, img.rows}, {}};
  out.labels.reserve(out.dims.area());
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      out.labels.push_back(img.depth() == CV_16U ? img.at<std::uint16_t>(y, x) : img.at<unsigned char>(y, x));
    }
  }
  return out;
}

void write_label_image(const fs::path& path, const LabelImage& labels) {
  cv::Mat img(labels.dims.height, labels.dims.width, CV_16UC1);
  for (int y = 0; y < labels.dims.height; ++y) {
    for (int x = 0; x < labels.dims.width; ++x) {
      const auto v = labels.labels[static_cast<std::size_t>(y * labels.dims.width + x)];
      if (v < 0 || v > 65535) throw Error("label id out of 16-bit range");
      img.at<std::uint16_t>(y, x) = static_cast<std::uint16_t>(v);
    }
  }
  write_mat(path, img);
}

std::vector<fs::path> list_frame_files(const fs::path& dir) {
  static const std::array<const char*, 9> kExt{".png", ".ppm", ".pgm", ".pnm", ".jpg", ".jpeg", ".bmp", ".fmap", ".flo"};
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower_ext(entry.path());
    if (std::find_if(kExt.begin(), kExt.end(), [&](const char* e) { return ext == e; }) != kExt.end()) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace stereosal::io
