#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>

#include "oracles.hpp"
#include "stereosal/color_tables.hpp"
#include "stereosal/imaging.hpp"
#include "stereosal/photometric.hpp"

using namespace stereosal;

namespace {

ColorFrame filled(int w, int h, std::array<double, 3> c) {
  ColorFrame f(w, h, ColorSpace::Rgb8);
  for (std::size_t i = 0; i < f.pixel_count(); ++i) f.set_pixel(i, c);
  return f;
}

SegmentLabeling single(int w, int h) { return SegmentLabeling({w, h}, std::vector<std::int32_t>(static_cast<std::size_t>(w * h), 0)); }

double max_abs_diff(const RasterMap& a, const RasterMap& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("local variance about the center pixel") {
  const auto fovea = build_fovea_mask(3, default_density_profile());
  for (const auto tmp = local_variance_raw(RasterMap(12, 12, 0.7), fovea); double v : tmp.values()) CHECK(v == 0.0);

  RasterMap spike(15, 15, 0.0);
  spike.at(7, 7) = 1.0;
  const double n = static_cast<double>(fovea.size()) - 1.0;
  CHECK(local_variance_raw(spike, fovea).at(7, 7) == doctest::Approx(n / (n - 1.0)));

  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    const auto y = oracle::random_map(9, 7, rng, 0, 255);
    const auto f = build_fovea_mask(1 + t % 3, default_density_profile());
    CHECK(max_abs_diff(local_variance_raw(y, f), oracle::local_variance(y, f)) < 1e-9);
  }
  CHECK_THROWS_AS(local_variance_raw(spike, FoveaMask(1, {{0, 0, 0.5}, {1, 0, 0.5}})), Error);
}

TEST_CASE("center-surround equals the brute-force double sum") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> dim(4, 32);
  std::uniform_int_distribution<int> rad(1, 5);
  std::uniform_int_distribution<int> segs(1, 8);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int w = dim(rng), h = dim(rng);
    const auto base = oracle::random_map(w, h, rng);
    const auto fovea = build_fovea_mask(rad(rng), default_density_profile());
    const auto labels = oracle::random_labels(w, h, segs(rng), rng);
    worst = std::max(worst, max_abs_diff(center_surround_raw({base, fovea, labels}), oracle::center_surround(base, fovea, labels)));
    worst = std::max(worst, max_abs_diff(center_surround({base, fovea, labels}),
                                         oracle::rescale(oracle::center_surround(base, fovea, labels))));
  }
  CHECK(worst < 1e-6);

  const auto fovea = build_fovea_mask(2, default_density_profile());
  for (const auto tmp = center_surround({RasterMap(10, 10, 0.3), fovea, single(10, 10)}); double v : tmp.values()) CHECK(v == 0.0);

  // 16x16: a thin 2-column stripe of ones (boundary heavy) vs a large zero region.
  RasterMap base(16, 16, 0.0);
  std::vector<std::int32_t> raw(256, 0);
  for (int y = 0; y < 16; ++y)
    for (int x = 7; x < 9; ++x) {
      base.at(x, y) = 1.0;
      raw[static_cast<std::size_t>(y * 16 + x)] = 1;
    }
  const SegmentLabeling lab = SegmentLabeling::canonical({16, 16}, raw);
  const auto cs = center_surround_raw({base, fovea, lab});
  CHECK(cs.at(7, 3) > cs.at(0, 0));
  CHECK(max_abs_diff(cs, oracle::center_surround(base, fovea, lab)) < 1e-9);
}

TEST_CASE("brightness maps") {
  const auto fovea = build_fovea_mask(2, default_density_profile());
  const auto flat = brightness_maps(filled(12, 12, {128, 128, 128}), fovea, single(12, 12));
  for (double v : flat.variance_contrast.values()) CHECK(v == 0.0);
  for (double v : flat.contrast.values()) CHECK(v == 0.0);

  ColorFrame disk = filled(32, 32, {10, 10, 10});
  std::vector<std::int32_t> raw(1024, 0);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      if ((x - 16) * (x - 16) + (y - 16) * (y - 16) <= 36) {
        disk.set_pixel(x, y, {240, 240, 240});
        raw[static_cast<std::size_t>(y * 32 + x)] = 1;
      }
  const auto lab = SegmentLabeling::canonical({32, 32}, raw);
  const auto maps = brightness_maps(disk, fovea, lab);
  CHECK(maps.contrast.at(16, 16) == 1.0);
  CHECK(maps.contrast.at(0, 0) == 0.0);
  CHECK(maps.variance_contrast.at(16, 16) == 1.0);
  const auto y = convert_color(disk, ColorSpace::Yuv).channel(0);
  CHECK(max_abs_diff(maps.contrast, oracle::rescale(oracle::center_surround(y, fovea, lab))) < 1e-9);
  CHECK(max_abs_diff(maps.variance_contrast,
                     oracle::rescale(oracle::center_surround(oracle::rescale(oracle::local_variance(y, fovea)), fovea, lab))) < 1e-9);

  // Horizontal ramp: local variance is uniform inside, while the raw luminance contrast is positive.
  ColorFrame ramp(40, 20, ColorSpace::Rgb8);
  for (int yy = 0; yy < 20; ++yy)
    for (int x = 0; x < 40; ++x) ramp.set_pixel(x, yy, {x * 6.0, x * 6.0, x * 6.0});
  const auto ry = convert_color(ramp, ColorSpace::Yuv).channel(0);
  const auto var = local_variance_raw(ry, fovea);
  CHECK(var.at(20, 10) == doctest::Approx(var.at(15, 10)).epsilon(1e-9));
  CHECK(surround_difference(ry, fovea).at(20, 10) > 0.0);
}

TEST_CASE("color variance contrast") {
  const auto fovea = build_fovea_mask(2, default_density_profile());
  const auto gray = color_variance_contrast(filled(10, 10, {90, 90, 90}), fovea, single(10, 10));
  for (double v : gray.a_map.values()) CHECK(v == 0.0);
  for (double v : gray.b_map.values()) CHECK(v == 0.0);

  ColorFrame f = filled(24, 24, {60, 160, 60});
  std::vector<std::int32_t> raw(576, 0);
  for (int y = 8; y < 14; ++y)
    for (int x = 8; x < 14; ++x) {
      f.set_pixel(x, y, {200, 40, 40});
      raw[static_cast<std::size_t>(y * 24 + x)] = 1;
    }
  const auto lab = SegmentLabeling::canonical({24, 24}, raw);
  const auto m = color_variance_contrast(f, fovea, lab);
  CHECK(m.a_map.at(10, 10) == 1.0);
  CHECK(m.a_map.at(0, 0) == 0.0);
  const auto labf = convert_color(f, ColorSpace::Lab);
  for (int c : {1, 2}) {
    const auto ch = labf.channel(c);
    const auto want = oracle::rescale(oracle::center_surround(oracle::rescale(oracle::local_variance(ch, fovea)), fovea, lab));
    CHECK(max_abs_diff(c == 1 ? m.a_map : m.b_map, want) < 1e-6);
  }
}

TEST_CASE("color histogram rarity") {
  for (const auto tmp = color_histogram_map(filled(10, 8, {30, 200, 90})); double v : tmp.values()) CHECK(v == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  const int n = 400;
  ColorFrame odd = filled(20, 20, {10, 10, 10});
  odd.set_pixel(5, 5, {250, 250, 250});
  const auto m = color_histogram_map(odd);
  // Two occupied bins, mean occupancy 0.5: the odd pixel gets exp(-(1/n)/0.5).
  CHECK(m.at(5, 5) == doctest::Approx(std::exp(-(1.0 / n) / 0.5)));
  CHECK(m.at(5, 5) > 0.99);
  ColorFrame halves = filled(10, 10, {10, 10, 10});
  for (int y = 0; y < 10; ++y)
    for (int x = 5; x < 10; ++x) halves.set_pixel(x, y, {200, 10, 10});
  for (const auto tmp = color_histogram_map(halves); double v : tmp.values()) CHECK(v == doctest::Approx(std::exp(-1.0)));

  // Spatial permutation invariance: same multiset of colors, values follow the pixels.
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> u(0, 255);
  ColorFrame a(12, 9, ColorSpace::Rgb8);
  for (std::size_t i = 0; i < a.pixel_count(); ++i) a.set_pixel(i, {double(u(rng)), double(u(rng) / 64 * 64), 0});
  std::vector<std::size_t> perm(a.pixel_count());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  ColorFrame b(12, 9, ColorSpace::Rgb8);
  for (std::size_t i = 0; i < perm.size(); ++i) b.set_pixel(perm[i], a.pixel(i));
  const auto ma = color_histogram_map(a);
  const auto mb = color_histogram_map(b);
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(mb[perm[i]] == ma[i]);
}

TEST_CASE("warmth via McCamy") {
  // McCamy's cubic in its usual form: n = (x - 0.3320) / (0.1858 - y).
  const double x = 0.31271, y = 0.32902;
  const double n = (x - 0.3320) / (0.1858 - y);
  const double cct = 449 * n * n * n + 3525 * n * n + 6823.3 * n + 5520.33;
  CHECK(cct == doctest::Approx(6504).epsilon(0.001));
  CHECK(mccamy_cct(x, y) == doctest::Approx(cct).epsilon(1e-12));
  CHECK(pixel_cct({255, 255, 255}) == doctest::Approx(6504).epsilon(0.002));
  CHECK(mccamy_cct(0.3, 0.1) == kCctMax);

  ColorFrame f(3, 1, ColorSpace::Rgb8);
  f.set_pixel(0, 0, {255, 0, 0});
  f.set_pixel(1, 0, {0, 0, 255});
  f.set_pixel(2, 0, {255, 255, 255});
  const auto w = warmth_map(f);
  CHECK(w[0] > w[1]);
  CHECK(w[2] > w[1]);
  CHECK(w[2] < w[0]);
  for (const auto tmp = warmth_map(filled(4, 4, {200, 120, 40})); double v : tmp.values()) CHECK(v == 0.0);
}

TEST_CASE("saturation") {
  CHECK(lab_saturation(50, 0, 0) == 0.0);
  CHECK(lab_saturation(0, 3, 4) == doctest::Approx(1.0));
  CHECK(lab_saturation(5, 3, 4) == doctest::Approx(5 / std::sqrt(50.0)));
  CHECK(lab_saturation(5, 3, 4) == doctest::Approx(0.7071).epsilon(1e-4));
  const auto s = saturation_map(filled(3, 3, {128, 128, 128}));
  for (double v : s.values()) CHECK(std::abs(v) < 1e-3);
  ColorFrame c(2, 1, ColorSpace::Rgb8);
  c.set_pixel(0, 0, {255, 0, 0});
  c.set_pixel(1, 0, {0, 0, 0});
  const auto sm = saturation_map(c);
  CHECK(sm[0] > 0.5);
  CHECK(sm[0] <= 1.0);
  CHECK(sm[1] == 0.0);
}

TEST_CASE("HVS sensitivity and empirical color maps") {
  const auto table = default_spectral_table();
  REQUIRE(table.size() == 31);
  double peak = 0.0;
  double peak_nm = 0.0;
  for (const auto& e : table) {
    if (e.sensitivity > peak) {
      peak = e.sensitivity;
      peak_nm = e.wavelength_nm;
    }
  }
  CHECK(peak == doctest::Approx(1.0));
  CHECK(std::abs(peak_nm - 555.0) <= 10.0);

  ColorFrame exact(table.size(), 1, ColorSpace::Rgb8);
  for (std::size_t i = 0; i < table.size(); ++i) exact.set_pixel(i, table[i].rgb);
  const auto h = hvs_sensitivity_map(exact, table);
  auto entry = [&](double nm) {
    for (const auto& e : table)
      if (e.wavelength_nm == nm) return e;
    FAIL("missing wavelength");
    return table.front();
  };
  // Entries with identical rendered colors resolve to the lower wavelength.
  for (std::size_t i = 0; i < table.size(); ++i) {
    double expect = table[i].sensitivity;
    for (const auto& e : table)
      if (e.rgb == table[i].rgb && e.wavelength_nm < table[i].wavelength_nm) {
        expect = e.sensitivity;
        break;
      }
    CHECK(h[i] == expect);
  }
  ColorFrame gb(2, 1, ColorSpace::Rgb8);
  gb.set_pixel(0, 0, entry(550).rgb);
  gb.set_pixel(1, 0, entry(450).rgb);
  const auto hv = hvs_sensitivity_map(gb, table);
  CHECK(hv[0] > hv[1]);

  const SpectralTable tie{{{0, 0, 0}, 600, 0.2}, {{10, 0, 0}, 500, 0.7}};
  ColorFrame mid(1, 1, ColorSpace::Rgb8);
  mid.set_pixel(0, 0, {5, 0, 0});
  CHECK(hvs_sensitivity_map(mid, tie)[0] == 0.7);

  const auto emp = default_empirical_table();
  REQUIRE(emp.size() == 12);
  ColorFrame top(1, 1, ColorSpace::Rgb8);
  top.set_pixel(0, 0, emp[0].rgb);
  double maxp = 0.0;
  for (const auto& e : emp) maxp = std::max(maxp, e.probability);
  CHECK(empirical_color_map(top, emp)[0] == maxp);
  const EmpiricalTable two{{{0, 0, 0}, 0.3}, {{10, 0, 0}, 0.9}};
  CHECK(empirical_color_map(mid, two)[0] == 0.3);
  const auto grey = empirical_color_map(filled(3, 2, {120, 120, 120}), emp);
  std::size_t best = 0;
  double best_d = 1e18;
  for (std::size_t k = 0; k < emp.size(); ++k) {
    double d = 0;
    for (int c = 0; c < 3; ++c) d += std::pow(120 - emp[k].rgb[static_cast<std::size_t>(c)], 2);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  for (double v : grey.values()) CHECK(v == emp[best].probability);
}

TEST_CASE("shipped tables load back identically") {
  const char* dir = std::getenv("STEREOSAL_TEST_DATA");
  if (!dir) return;
  const auto spectral = load_spectral_table(std::string(dir) + "/spectral_colors.csv");
  const auto def = default_spectral_table();
  REQUIRE(spectral.size() == def.size());
  for (std::size_t i = 0; i < def.size(); ++i) {
    CHECK(spectral[i].wavelength_nm == def[i].wavelength_nm);
    CHECK(spectral[i].sensitivity == doctest::Approx(def[i].sensitivity).epsilon(1e-5));
  }
  CHECK(load_empirical_table(std::string(dir) + "/empirical_colors.csv").size() == 12);
  const auto prof = load_density_profile(std::string(dir) + "/fovea_profile.txt");
  REQUIRE(prof.size() == default_density_profile().size());
  for (std::size_t i = 0; i < prof.size(); ++i) {
    CHECK(prof[i].first == doctest::Approx(default_density_profile()[i].first));
    CHECK(prof[i].second == doctest::Approx(default_density_profile()[i].second));
  }
}
