#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "stereosal/fusion.hpp"
#include "stereosal/imaging.hpp"

using namespace stereosal;

namespace {

// Exhaustive active-set NNLS: best feasible unconstrained solve over every support.
std::vector<double> nnls_brute(const std::vector<double>& g, const std::vector<double>& h, std::size_t n) {
  std::vector<double> best(n, 0.0);
  double best_obj = 0.0;  // objective 0.5 w'Gw - h'w at w = 0
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) s.push_back(i);
    const std::size_t k = s.size();
    std::vector<std::vector<double>> a(k, std::vector<double>(k + 1));
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < k; ++c) a[r][c] = g[s[r] * n + s[c]];
      a[r][k] = h[s[r]];
    }
    bool singular = false;
    for (std::size_t c = 0; c < k && !singular; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < k; ++r)
        if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
      if (std::abs(a[piv][c]) < 1e-12) {
        singular = true;
        break;
      }
      std::swap(a[c], a[piv]);
      for (std::size_t r = 0; r < k; ++r) {
        if (r == c) continue;
        const double f = a[r][c] / a[c][c];
        for (std::size_t cc = c; cc <= k; ++cc) a[r][cc] -= f * a[c][cc];
      }
    }
    if (singular) continue;
    std::vector<double> w(n, 0.0);
    bool feasible = true;
    for (std::size_t r = 0; r < k; ++r) {
      w[s[r]] = a[r][k] / a[r][r];
      if (w[s[r]] < 0.0) feasible = false;
    }
    if (!feasible) continue;
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      obj -= h[i] * w[i];
      for (std::size_t j = 0; j < n; ++j) obj += 0.5 * w[i] * g[i * n + j] * w[j];
    }
    if (obj < best_obj) {
      best_obj = obj;
      best = w;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("scheme names") {
  for (auto s : baseline_schemes()) CHECK(parse_fusion_scheme(to_string(s)) == s);
  CHECK(baseline_schemes().size() == 7);
  CHECK(parse_fusion_scheme("forest") == FusionScheme::Forest);
  CHECK_THROWS_AS(parse_fusion_scheme("svr"), Error);
}

TEST_CASE("elementwise baselines") {
  const RasterMap a(3, 1, std::vector<double>{0.2, 0.5, 1.0});
  const RasterMap b(3, 1, std::vector<double>{0.6, 0.5, 0.0});
  const std::vector<RasterMap> maps{a, b};
  const auto avg = fuse_baseline(maps, FusionScheme::Average);
  CHECK(avg[0] == doctest::Approx(0.4));
  const auto mul = fuse_baseline(maps, FusionScheme::Multiplication);
  CHECK(mul[0] == doctest::Approx(0.12));
  CHECK(mul[2] == 0.0);
  const auto mx = fuse_baseline(maps, FusionScheme::Maximum);
  CHECK(mx[0] == 0.6);
  CHECK(mx[2] == 1.0);
  const auto spp = fuse_baseline(maps, FusionScheme::SpP);
  // Sums plus products: 0.92, 1.25, 1.0 -> rescaled.
  CHECK(spp[0] == 0.0);
  CHECK(spp[1] == 1.0);
  CHECK(spp[2] == doctest::Approx(0.08 / 0.33));
  CHECK_THROWS_AS(fuse_baseline({}, FusionScheme::Average), Error);
  CHECK_THROWS_AS(fuse_baseline({a, RasterMap(2, 1)}, FusionScheme::Average), Error);
  CHECK_THROWS_AS(fuse_baseline(maps, FusionScheme::Lmswa), Error);
  CHECK_THROWS_AS(fuse_baseline(maps, FusionScheme::Forest), Error);
}

TEST_CASE("GNLNS local maxima weighting") {
  RasterMap single(9, 9, 0.0);
  single.at(4, 4) = 1.0;
  CHECK(mean_local_maxima(single) == 0.0);
  CHECK(gnlns_weight(single) == doctest::Approx(1.0));

  RasterMap twin = single;
  twin.at(1, 1) = 1.0;
  CHECK(mean_local_maxima(twin) == 1.0);
  CHECK(gnlns_weight(twin) == 0.0);

  RasterMap three = single;
  three.at(1, 1) = 0.4;
  three.at(7, 7) = 0.2;
  CHECK(mean_local_maxima(three) == doctest::Approx(0.3));
  CHECK(gnlns_weight(three) == doctest::Approx(0.49));

  // Plateaus are not strict maxima.
  RasterMap plateau = single;
  plateau.at(1, 1) = 0.5;
  plateau.at(2, 1) = 0.5;
  CHECK(mean_local_maxima(plateau) == 0.0);

  const auto fused = fuse_baseline({single, twin}, FusionScheme::Gnlns);
  CHECK(fused.at(1, 1) == 0.0);
  CHECK(fused.at(4, 4) == doctest::Approx(1.0));
}

TEST_CASE("SDW ignores flat maps") {
  const RasterMap flat(4, 4, 0.7);
  std::mt19937_64 rng(1);
  const auto r = oracle::random_map(4, 4, rng);
  const auto fused = fuse_baseline({flat, r}, FusionScheme::Sdw);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(fused[i] == doctest::Approx(r[i]));
  for (const auto tmp = fuse_baseline({flat, flat}, FusionScheme::Sdw); double v : tmp.values()) CHECK(v == 0.0);
}

TEST_CASE("NNLS agrees with exhaustive support search") {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 5);
    const std::size_t rows = 3 * n;
    std::vector<double> A(rows * n), b(rows);
    for (auto& v : A) v = nd(rng);
    for (auto& v : b) v = nd(rng);
    std::vector<double> g(n * n, 0.0), h(n, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t i = 0; i < n; ++i) {
        h[i] += A[r * n + i] * b[r];
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += A[r * n + i] * A[r * n + j];
      }
    const auto fast = nnls(g, h, n);
    const auto slow = nnls_brute(g, h, n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(fast[i] >= 0.0);
      CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-6).scale(1.0));
    }
  }
  CHECK_THROWS_AS(nnls({1.0}, {1.0, 2.0}, 2), Error);
}

TEST_CASE("LMSWA recovers a known mixture") {
  std::mt19937_64 rng(12);
  std::vector<std::vector<RasterMap>> frames;
  std::vector<RasterMap> targets;
  for (int f = 0; f < 3; ++f) {
    auto m1 = oracle::random_map(16, 12, rng);
    auto m2 = oracle::random_map(16, 12, rng);
    RasterMap t(16, 12);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.3 * m1[i] + 0.7 * m2[i];
    frames.push_back({m1, m2});
    targets.push_back(t);
  }
  // Closed-form 2x2 normal equations.
  double g11 = 0, g12 = 0, g22 = 0, h1 = 0, h2 = 0;
  for (std::size_t f = 0; f < frames.size(); ++f)
    for (std::size_t i = 0; i < targets[f].size(); ++i) {
      const double a = frames[f][0][i], b = frames[f][1][i], y = targets[f][i];
      g11 += a * a;
      g12 += a * b;
      g22 += b * b;
      h1 += a * y;
      h2 += b * y;
    }
  const double det = g11 * g22 - g12 * g12;
  const double w1 = (h1 * g22 - h2 * g12) / det;
  const double w2 = (g11 * h2 - g12 * h1) / det;
  CHECK(w1 == doctest::Approx(0.3).epsilon(1e-9));
  const auto w = fit_lmswa_weights(frames, targets);
  CHECK(std::abs(w[0] - w1) < 1e-6);
  CHECK(std::abs(w[1] - w2) < 1e-6);
  CHECK(std::abs(w[0] - 0.3) < 1e-6);
  CHECK(std::abs(w[1] - 0.7) < 1e-6);
  const auto fused = fuse_baseline(frames[0], FusionScheme::Lmswa, &w);
  for (std::size_t i = 0; i < fused.size(); ++i) CHECK(fused[i] == doctest::Approx(targets[0][i]).epsilon(1e-6));

  // A negatively correlated map is clamped to zero weight.
  std::vector<std::vector<RasterMap>> neg{{frames[0][0], frames[0][1]}};
  RasterMap inv = frames[0][1];
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 - frames[0][0][i];
  neg[0][1] = inv;
  const auto wn = fit_lmswa_weights(neg, {frames[0][0]});
  CHECK(wn[0] == doctest::Approx(1.0));
  CHECK(wn[1] == 0.0);
  CHECK_THROWS_AS(fit_lmswa_weights(frames, {}), Error);
}

TEST_CASE("forest prediction and training sampling") {
  const Dims dims{20, 10};
  auto stack_for = [&](int f) {
    std::map<FeatureId, RasterMap> m;
    RasterMap a(dims), b(dims);
    for (int y = 0; y < dims.height; ++y)
      for (int x = 0; x < dims.width; ++x) {
        a.at(x, y) = ((x + f) % 7) / 6.0;
        b.at(x, y) = ((y * 3 + x) % 5) / 4.0;
      }
    m[FeatureId::Texture] = a;
    m[FeatureId::Depth] = b;
    return assemble_stack(dims, f, m);
  };
  // Nonlinear target: bump where texture is mid-range and depth is high.
  auto target_for = [&](int f) {
    const auto s = stack_for(f);
    RasterMap t(dims);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double a = s[FeatureId::Texture][i], b = s[FeatureId::Depth][i];
      t[i] = std::exp(-20 * (a - 0.5) * (a - 0.5)) * (b > 0.6 ? 1.0 : 0.1);
    }
    return t;
  };
  const std::vector<VideoFrames> videos{{"v", 6, stack_for, target_for}};
  const FeatureMask mask = parse_feature_list("texture,depth");
  const auto sampled = sample_training(videos, 6, 150, 3, mask);
  CHECK(sampled.set.rows() == 900);
  CHECK(sampled.set.feature_names == std::vector<std::string>{"texture", "depth"});
  CHECK(sampled.provenance.size() == 900);
  const auto again = sample_training(videos, 6, 150, 3, mask);
  CHECK(again.set.y == sampled.set.y);
  CHECK(sample_training(videos, 6, 150, 4, mask).set.y != sampled.set.y);
  // Half the draws come from the top decile of the target.
  int high = 0;
  for (double y : sampled.set.y) high += y > 0.5;
  CHECK(high >= 450);

  const auto model = train_forest(sampled.set, {30, 5, 1.0 / 3.0, 0, 2});
  const auto stack = stack_for(2);
  const auto target = oracle::rescale(target_for(2));
  const auto pred = predict(model, stack);
  CHECK(is_normalized(pred));
  const auto avg = fuse_baseline({stack[FeatureId::Texture], stack[FeatureId::Depth]}, FusionScheme::Average);
  double err_forest = 0.0, err_avg = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    err_forest += (pred[i] - target[i]) * (pred[i] - target[i]);
    err_avg += (avg[i] - target[i]) * (avg[i] - target[i]);
  }
  CHECK(err_forest < 0.25 * err_avg);

  auto wrong = model;
  wrong.feature_names[0] = "sharpness";
  CHECK_THROWS_AS(predict(wrong, stack), Error);
}
