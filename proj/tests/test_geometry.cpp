#include <doctest.h>

#include <cmath>

#include "stereosal/geometry.hpp"

using namespace stereosal;

TEST_CASE("fovea radius from the viewing setup") {
  ViewingGeometry g;
  CHECK(std::abs(fovea_radius(g) - 60) <= 1);
  ViewingGeometry h;
  h.z_observer_cm = 100;
  h.screen_h_cm = 50;
  h.res_h = 1000;
  h.screen_w_cm = 50 * 16.0 / 9.0;
  h.res_w = 1778;
  CHECK(fovea_radius(h) == static_cast<int>(std::lround(100 * std::tan(M_PI / 180) * 20)));
  CHECK(fovea_radius(h) == 35);
  ViewingGeometry tiny;
  tiny.alpha_deg = 1e-9;
  CHECK(fovea_radius(tiny) == 1);
  ViewingGeometry bad;
  bad.alpha_deg = 2.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ViewingGeometry{};
  bad.res_w = 1000;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("fovea mask weights") {
  const DensityProfile flat{{0.0, 1.0}, {1.0, 1.0}};
  const auto m = build_fovea_mask(5, flat);
  double sum = 0.0;
  for (const auto& o : m.offsets()) {
    sum += o.weight;
    CHECK(o.weight == doctest::Approx(m.offsets().front().weight));
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  const auto d = build_fovea_mask(60, default_density_profile());
  double total = 0.0;
  for (const auto& o : d.offsets()) {
    total += o.weight;
    CHECK(o.weight <= d.center_weight());
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  // Interpolated shipped table: the half-radius weight lies strictly between center and rim.
  const double half = d.weight(30, 0);
  const double rim = d.weight(60, 0);
  CHECK(half < d.center_weight());
  CHECK(half > rim);
  const double expect_ratio = interpolate_profile(default_density_profile(), 0.5) / interpolate_profile(default_density_profile(), 0.0);
  CHECK(half / d.center_weight() == doctest::Approx(expect_ratio).epsilon(1e-9));
  CHECK(d.weight(61, 0) == 0.0);
  // Radial symmetry up to grid quantization.
  CHECK(d.weight(17, 4) == doctest::Approx(d.weight(-4, 17)));
  CHECK(d.weight(-17, -4) == doctest::Approx(d.weight(4, -17)));
  CHECK_THROWS_AS(validate_density_profile({{0.1, 1.0}, {1.0, 0.5}}), Error);
  CHECK_THROWS_AS(validate_density_profile({{0.0, 1.0}, {1.0, 1.5}}), Error);
}

TEST_CASE("disparity to depth") {
  ViewingGeometry g;
  CHECK(disparity_to_depth(0.0, g) == g.z_observer_cm);
  CHECK(disparity_to_depth(60.0, g) == doctest::Approx(183.0 / (1 + 60 * 101.8 / (6.3 * 1920))).epsilon(1e-12));
  CHECK(disparity_to_depth(60.0, g) == doctest::Approx(121.6).epsilon(0.001));
  CHECK(disparity_to_depth(-60.0, g) == doctest::Approx(369.7).epsilon(0.001));
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    const double d = -100.0 + 0.4 * i;
    const double z = disparity_to_depth(d, g);
    CHECK(z < prev);
    prev = z;
  }
  // Denominator floor for extreme negative disparity.
  CHECK(disparity_to_depth(-1e6, g) == doctest::Approx(g.z_observer_cm / kDepthDenominatorFloor));
}

TEST_CASE("discomfort penalty") {
  CHECK(discomfort_penalty(30) == 1.0);
  CHECK(discomfort_penalty(60) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(discomfort_penalty(100) == doctest::Approx(0.76).epsilon(1e-12));
  CHECK(discomfort_penalty(300) == 0.0);
  ViewingGeometry g;
  // 60 px at the reference setup is one degree.
  CHECK(disparity_px_to_arcmin(60.0, g) == doctest::Approx(60.0).epsilon(0.02));
  RasterMap d(2, 1, std::vector<double>{-30.0, 100.0 * 60.0 / disparity_px_to_arcmin(60.0, g)});
  const auto mask = discomfort_mask(d, g);
  CHECK(mask[0] == 1.0);
  CHECK(mask[1] == doctest::Approx(0.76).epsilon(1e-9));
}
