#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stereosal/imaging.hpp"
#include "stereosal/segmentation.hpp"

using namespace stereosal;

namespace {

ColorFrame filled(int w, int h, std::array<double, 3> c) {
  ColorFrame f(w, h, ColorSpace::Rgb8);
  for (std::size_t i = 0; i < f.pixel_count(); ++i) f.set_pixel(i, c);
  return f;
}

SegmentLabeling from_fn(int w, int h, auto fn) {
  std::vector<std::int32_t> raw(static_cast<std::size_t>(w * h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) raw[static_cast<std::size_t>(y * w + x)] = fn(x, y);
  return SegmentLabeling::canonical({w, h}, raw);
}

}  // namespace

TEST_CASE("segment: uniform, two-tone and quadrant frames") {
  const auto one = segment(filled(24, 16, {90, 120, 60}));
  CHECK(one.segment_count() == 1);
  for (const auto tmp = one.edge_map(); double v : tmp.values()) CHECK(v == 0.0);

  ColorFrame two = filled(24, 16, {20, 20, 20});
  for (int y = 0; y < 16; ++y)
    for (int x = 12; x < 24; ++x) two.set_pixel(x, y, {230, 230, 230});
  const auto s2 = segment(two);
  REQUIRE(s2.segment_count() == 2);
  const auto e = s2.edge_map();
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 24; ++x) CHECK(e.at(x, y) == ((x == 11 || x == 12) ? 1.0 : 0.0));

  ColorFrame quad(32, 32, ColorSpace::Rgb8);
  const std::array<std::array<double, 3>, 4> colors{{{220, 30, 30}, {30, 200, 40}, {30, 40, 220}, {230, 230, 40}}};
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) quad.set_pixel(x, y, colors[static_cast<std::size_t>((y / 16) * 2 + x / 16)]);
  const auto s4 = segment(quad);
  REQUIRE(s4.segment_count() == 4);
  const auto st = segment_stats(s4);
  for (const auto& s : st) {
    const double qx = s.cx < 16 ? 7.5 : 23.5;
    const double qy = s.cy < 16 ? 7.5 : 23.5;
    CHECK(std::abs(s.cx - qx) <= 1.0);
    CHECK(std::abs(s.cy - qy) <= 1.0);
    CHECK(s.n == 256);
  }
}

TEST_CASE("segment merges regions below the minimum size and is deterministic") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> u(0, 255);
  ColorFrame f(30, 20, ColorSpace::Rgb8);
  for (std::size_t i = 0; i < f.pixel_count(); ++i) f.set_pixel(i, {double(u(rng)), double(u(rng)), double(u(rng))});
  SegmentationParams p;
  const auto a = segment(f, p);
  const auto b = segment(f, p);
  CHECK(a.labels() == b.labels());
  for (const auto& s : segment_stats(a)) CHECK(s.n >= static_cast<std::size_t>(p.min_region));
}

TEST_CASE("labeling validation and canonical relabel") {
  CHECK_THROWS_AS(SegmentLabeling({2, 2}, {0, 1, 3, 1}), Error);
  CHECK_THROWS_AS(SegmentLabeling({2, 2}, {0, -1, 0, 0}), Error);
  CHECK_THROWS_AS(SegmentLabeling({2, 2}, {0, 0, 0}), Error);
  const auto c = SegmentLabeling::canonical({3, 1}, {7, 2, 7});
  CHECK(c.labels() == std::vector<std::int32_t>{0, 1, 0});
  CHECK_NOTHROW(ingest_labels({2, 1}, {1, 0}));
}

TEST_CASE("segment_reduce") {
  std::mt19937_64 rng(8);
  const auto m = oracle::random_map(10, 10, rng);
  const auto one = from_fn(10, 10, [](int, int) { return 0; });
  const double mean = map_stats(m).mean;
  for (const auto tmp = segment_reduce(m, one); double v : tmp.values()) CHECK(v == doctest::Approx(mean));

  const auto checker = from_fn(10, 10, [](int x, int y) { return (x + y) % 2; });
  RasterMap alt(10, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) alt.at(x, y) = (x + y) % 2 ? 1.0 : 0.0;
  CHECK(segment_reduce(alt, checker) == alt);

  RasterMap vals(10, 10);
  double s0 = 0, s1 = 0;
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) {
      vals.at(x, y) = x * 0.1 + y;
      ((x + y) % 2 ? s1 : s0) += vals.at(x, y);
    }
  const auto red = segment_reduce(vals, checker);
  CHECK(red.at(0, 0) == doctest::Approx(s0 / 50));
  CHECK(red.at(1, 0) == doctest::Approx(s1 / 50));

  const auto regions = oracle::random_labels(10, 10, 6, rng);
  CHECK(map_stats(segment_reduce(m, regions)).mean == doctest::Approx(mean).epsilon(1e-12));
  const auto med = segment_reduce(m, regions, Reducer::Median);
  const auto mn = segment_reduce(m, regions, Reducer::Min);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(mn[i] <= med[i]);
}

TEST_CASE("edginess counts boundary pixels per segment") {
  const int n = 16;
  const auto halves = from_fn(n, n, [n](int x, int) { return x < n / 2 ? 0 : 1; });
  for (const auto& s : segment_stats(halves)) {
    CHECK(static_cast<double>(s.edge_pixels) / static_cast<double>(s.n) == doctest::Approx(2.0 / n));
  }
  const auto whole = from_fn(n, n, [](int, int) { return 0; });
  for (const auto tmp = edginess(whole); double v : tmp.values()) CHECK(v == 0.0);
  // Small blocks on the left, one large region on the right.
  const auto mixed = from_fn(n, n, [](int x, int y) { return x < 8 ? (y / 2) * 4 + x / 2 : 100; });
  const auto e = edginess(mixed);
  CHECK(e.at(1, 1) > e.at(12, 8));
  for (int y = 0; y < n; ++y) CHECK(e.at(12, y) == e.at(15, 0));
}

TEST_CASE("compactness") {
  const int r = 20;
  const auto disk = from_fn(61, 61, [r](int x, int y) { return (x - 30) * (x - 30) + (y - 30) * (y - 30) <= r * r ? 1 : 0; });
  const auto st = segment_stats(disk);
  const auto& d = st[static_cast<std::size_t>(disk.label(30, 30))];
  CHECK(d.compactness == doctest::Approx(1.0).epsilon(0.05));

  const int len = 40;
  const auto line = from_fn(len, 1, [](int, int) { return 0; });
  const double expect = std::min(1.0, 6.0 * len / (M_PI * (len * len - 1.0)));
  CHECK(segment_stats(line)[0].compactness == doctest::Approx(expect).epsilon(1e-9));

  const auto shapes = from_fn(64, 64, [](int x, int y) {
    if (x < 16 && y < 16) return 0;         // 16x16 square
    if (y >= 40 && y < 44) return 1;        // 64x4 ribbon
    return 2;
  });
  const auto c = compactness_map(shapes);
  CHECK(c.at(0, 0) > c.at(0, 41));
}

TEST_CASE("size filter uses 1% of each resolution axis") {
  ViewingGeometry g;
  auto labels_with_box = [](int bw, int bh) {
    return from_fn(1920, 1080, [bw, bh](int x, int y) { return (x >= 100 && x < 100 + bw && y >= 100 && y < 100 + bh) ? 1 : 0; });
  };
  const auto small = size_filter(labels_with_box(5, 5), g);
  CHECK(small.at(101, 101) == 0.0);
  CHECK(small.at(0, 0) == 1.0);
  const auto big = size_filter(labels_with_box(25, 25), g);
  CHECK(big.at(101, 101) == 1.0);
}
