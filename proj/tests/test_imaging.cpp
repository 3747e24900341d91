#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stereosal/imaging.hpp"

using namespace stereosal;

TEST_CASE("normalize01 rescales linearly and zeroes constant maps") {
  RasterMap m(3, 1, std::vector<double>{2, 4, 6});
  const auto n = normalize01(m);
  CHECK(n[0] == 0.0);
  CHECK(n[1] == doctest::Approx(0.5));
  CHECK(n[2] == 1.0);
  for (const auto tmp = normalize01(RasterMap(4, 4, 7.5)); double v : tmp.values()) CHECK(v == 0.0);
  RasterMap unit(2, 1, std::vector<double>{0, 1});
  CHECK(normalize01(unit) == unit);
  std::mt19937_64 rng(3);
  const auto r = oracle::random_map(9, 7, rng, -3, 5);
  CHECK(normalize01(normalize01(r)) == normalize01(r));
}

TEST_CASE("gaussian_blur: identity, DC preservation, impulse response") {
  std::mt19937_64 rng(1);
  const auto r = oracle::random_map(12, 9, rng);
  CHECK(gaussian_blur(r, 0.0) == r);
  for (const auto tmp = gaussian_blur(RasterMap(15, 11, 0.25), 3.0); double v : tmp.values()) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));

  const auto b = gaussian_blur(r, 1.5);
  const auto st = map_stats(r);
  for (double v : b.values()) {
    CHECK(v >= st.min - 1e-12);
    CHECK(v <= st.max + 1e-12);
  }

  // Impulse at the center of a 41x41 field: the separable sampled kernel with radius ceil(4 sigma).
  const double sigma = 2.0;
  RasterMap imp(41, 41, 0.0);
  imp.at(20, 20) = 1.0;
  const auto out = gaussian_blur(imp, sigma);
  double norm = 0.0;
  for (int k = -8; k <= 8; ++k) norm += std::exp(-k * k / (2 * sigma * sigma));
  for (int dy = -9; dy <= 9; ++dy) {
    for (int dx = -9; dx <= 9; ++dx) {
      const double expect = (std::abs(dx) > 8 || std::abs(dy) > 8)
                                ? 0.0
                                : std::exp(-(dx * dx) / (2 * sigma * sigma)) * std::exp(-(dy * dy) / (2 * sigma * sigma)) /
                                      (norm * norm);
      CHECK(out.at(20 + dx, 20 + dy) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

namespace {

// sRGB (D65) -> CIELAB from the published equations.
std::array<double, 3> lab_reference(double r8, double g8, double b8) {
  auto lin = [](double c) {
    c /= 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  const double r = lin(r8), g = lin(g8), b = lin(b8);
  const double X = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double Z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  auto f = [](double t) { return t > 216.0 / 24389.0 ? std::cbrt(t) : (24389.0 / 27.0 * t + 16.0) / 116.0; };
  const double fx = f(X / 0.95047), fy = f(Y / 1.0), fz = f(Z / 1.08883);
  return {116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)};
}

}  // namespace

TEST_CASE("convert_color matches the sRGB/CIELAB and BT.601 references") {
  const auto white = rgb_to_lab({255, 255, 255});
  CHECK(white[0] == doctest::Approx(100.0).epsilon(1e-4));
  const auto black = rgb_to_lab({0, 0, 0});
  CHECK(black[0] == doctest::Approx(0.0));
  CHECK(rgb_to_yuv({0, 0, 0})[0] == doctest::Approx(0.0));

  // Published value for sRGB red: L* 53.24, a* 80.09, b* 67.20.
  const auto red = rgb_to_lab({255, 0, 0});
  CHECK(red[0] == doctest::Approx(53.24).epsilon(0.001));
  CHECK(red[1] == doctest::Approx(80.09).epsilon(0.001));
  CHECK(red[2] == doctest::Approx(67.20).epsilon(0.001));

  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> u(0, 255);
  for (int i = 0; i < 200; ++i) {
    const double r = u(rng), g = u(rng), b = u(rng);
    const auto got = rgb_to_lab({r, g, b});
    const auto want = lab_reference(r, g, b);
    for (int c = 0; c < 3; ++c) CHECK(got[static_cast<std::size_t>(c)] == doctest::Approx(want[static_cast<std::size_t>(c)]).epsilon(1e-3).scale(1));
    const auto yuv = rgb_to_yuv({r, g, b});
    CHECK(yuv[0] == doctest::Approx(0.299 * r + 0.587 * g + 0.114 * b).epsilon(1e-9));
  }
  for (int v = 0; v <= 255; v += 5) {
    const auto gray = rgb_to_lab({double(v), double(v), double(v)});
    CHECK(std::abs(gray[1]) < 0.5);
    CHECK(std::abs(gray[2]) < 0.5);
  }
  ColorFrame f(2, 1, ColorSpace::Rgb8);
  f.set_pixel(0, 0, {255, 0, 0});
  f.set_pixel(1, 0, {0, 0, 255});
  const auto lab = convert_color(f, ColorSpace::Lab);
  CHECK(lab.space() == ColorSpace::Lab);
  CHECK(lab.pixel(0, 0)[1] == doctest::Approx(red[1]));
  CHECK_THROWS_AS(convert_color(lab, ColorSpace::Yuv), Error);
}

TEST_CASE("sparsity_project: two-pixel hand value, rank preservation, constant map") {
  RasterMap two(2, 1, std::vector<double>{0, 1});
  // phi = {1 - 0.5, e - 0.5}: rescaled to {0, 1}.
  const auto out = sparsity_project(two);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 1.0);
  CHECK(std::exp(1.0) - 0.5 == doctest::Approx(2.2183).epsilon(1e-4));
  for (const auto tmp = sparsity_project(RasterMap(3, 3, 0.4)); double v : tmp.values()) CHECK(v == 0.0);

  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto m = normalize01(oracle::random_map(8, 6, rng));
    const auto s = sparsity_project(m);
    std::vector<double> a(m.values().begin(), m.values().end());
    std::vector<double> b(s.values().begin(), s.values().end());
    CHECK(oracle::argsort(a) == oracle::argsort(b));
  }
  CHECK_THROWS_AS(sparsity_project(RasterMap(2, 1, std::vector<double>{0, 2})), Error);
}

TEST_CASE("resampling keeps constants and mass") {
  RasterMap c(20, 10, 0.3);
  for (const auto tmp = resize_bilinear(c, {7, 5}); double v : tmp.values()) CHECK(v == doctest::Approx(0.3));
  std::mt19937_64 rng(2);
  const auto r = oracle::random_map(16, 8, rng);
  const auto a = resize_area(r, {4, 2});
  CHECK(map_stats(a).mean == doctest::Approx(map_stats(r).mean).epsilon(1e-12));
  CHECK_THROWS_AS(RasterMap(0, 3), Error);
}
