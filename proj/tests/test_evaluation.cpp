#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "stereosal/evaluation.hpp"
#include "stereosal/imaging.hpp"

using namespace stereosal;

namespace {

std::size_t px(const RasterMap& m, const Point& p) {
  return m.index(std::clamp(static_cast<int>(std::lround(p.x)), 0, m.width() - 1),
                 std::clamp(static_cast<int>(std::lround(p.y)), 0, m.height() - 1));
}

// ROC by direct counting at each distinct fixated value, trapezoid area.
double judd_oracle(const RasterMap& sal, const std::vector<Point>& fix) {
  std::vector<double> th;
  for (const auto& p : fix) th.push_back(sal[px(sal, p)]);
  std::sort(th.begin(), th.end(), std::greater<>());
  th.erase(std::unique(th.begin(), th.end()), th.end());
  const double nf = static_cast<double>(fix.size());
  const double np = static_cast<double>(sal.size());
  std::vector<std::pair<double, double>> roc{{0.0, 0.0}};
  for (double t : th) {
    double tp = 0, all = 0;
    for (const auto& p : fix) tp += sal[px(sal, p)] >= t;
    for (double v : sal.values()) all += v >= t;
    roc.push_back({std::clamp((all - tp) / (np - nf), 0.0, 1.0), tp / nf});
  }
  roc.push_back({1.0, 1.0});
  double area = 0.0;
  for (std::size_t k = 1; k < roc.size(); ++k)
    area += 0.5 * (roc[k].first - roc[k - 1].first) * (roc[k].second + roc[k - 1].second);
  return area;
}

double pairs_oracle(const RasterMap& sal, const std::vector<Point>& pos, const std::vector<Point>& neg) {
  double w = 0.0;
  for (const auto& p : pos)
    for (const auto& n : neg) {
      const double a = sal[px(sal, p)], b = sal[px(sal, n)];
      w += a > b ? 1.0 : a == b ? 0.5 : 0.0;
    }
  return w / static_cast<double>(pos.size() * neg.size());
}

std::vector<Point> random_points(int n, Dims d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(0, d.width - 1), uy(0, d.height - 1);
  std::vector<Point> out;
  for (int i = 0; i < n; ++i) out.push_back({ux(rng), uy(rng)});
  return out;
}

std::vector<Point> center_points(int n, Dims d, std::mt19937_64& rng) {
  std::normal_distribution<double> nx(d.width / 2.0, d.width / 10.0), ny(d.height / 2.0, d.height / 10.0);
  std::vector<Point> out;
  for (int i = 0; i < n; ++i)
    out.push_back({std::clamp(nx(rng), 0.0, d.width - 1.0), std::clamp(ny(rng), 0.0, d.height - 1.0)});
  return out;
}

}  // namespace

TEST_CASE("Judd AUC against direct ROC counting") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 30; ++t) {
    auto sal = oracle::random_map(15, 11, rng);
    if (t % 2) {
      for (double& v : sal.values()) v = std::floor(v * 4) / 4;  // heavy ties
    }
    const auto fix = random_points(1 + t % 12, sal.dims(), rng);
    CHECK(auc_judd(sal, fix) == doctest::Approx(judd_oracle(sal, fix)).epsilon(1e-12));
  }
  const std::vector<Point> one{{3, 3}};
  CHECK(auc_judd(RasterMap(8, 8, 0.4), one) == doctest::Approx(0.5));
  RasterMap perfect(8, 8, 0.0);
  perfect.at(3, 3) = 1.0;
  CHECK(auc_judd(perfect, one) == doctest::Approx(1.0));
  RasterMap worst(8, 8, 1.0);
  worst.at(3, 3) = 0.0;
  // Thresholds only sit at fixated values, so a fixation on the minimum gives the chance diagonal.
  CHECK(auc_judd(worst, one) == doctest::Approx(0.5));
  CHECK(std::isnan(auc_judd(perfect, {})));
}

TEST_CASE("chance maps score about 0.5") {
  std::mt19937_64 rng(2);
  double total = 0.0;
  const int frames = 200;
  for (int f = 0; f < frames; ++f) {
    const auto sal = chance_map({40, 30}, static_cast<std::uint64_t>(f));
    total += auc_judd(sal, random_points(20, sal.dims(), rng));
  }
  CHECK(std::abs(total / frames - 0.5) < 0.02);
  CHECK(chance_map({5, 5}, 3) == chance_map({5, 5}, 3));
}

TEST_CASE("pairwise and shuffled AUC") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    auto sal = oracle::random_map(12, 9, rng);
    for (double& v : sal.values()) v = std::floor(v * 5);
    const auto pos = random_points(7, sal.dims(), rng);
    const auto neg = random_points(11, sal.dims(), rng);
    CHECK(auc_pairs(sal, pos, neg) == doctest::Approx(pairs_oracle(sal, pos, neg)).epsilon(1e-12));
  }
  // Center-biased fixations with a center-biased pool: the center map gains nothing.
  const Dims d{80, 60};
  const auto center = center_map(d);
  double judd = 0.0, shuffled = 0.0;
  for (int f = 0; f < 40; ++f) {
    const auto fix = center_points(30, d, rng);
    const auto pool = center_points(300, d, rng);
    judd += auc_judd(center, fix);
    shuffled += auc_shuffled(center, fix, pool, static_cast<std::uint64_t>(f));
  }
  CHECK(judd / 40 > 0.8);
  CHECK(std::abs(shuffled / 40 - 0.5) < 0.05);

  const auto sal = oracle::random_map(10, 10, rng);
  const auto fix = random_points(5, sal.dims(), rng);
  const auto pool = random_points(50, sal.dims(), rng);
  CHECK(auc_shuffled(sal, fix, pool, 9) == auc_shuffled(sal, fix, pool, 9));
  std::mt19937_64 draw(9);
  double manual = 0.0;
  for (int s = 0; s < 10; ++s) {
    std::vector<Point> neg(fix.size());
    for (auto& p : neg) p = pool[static_cast<std::size_t>(draw() % pool.size())];
    manual += pairs_oracle(sal, fix, neg);
  }
  CHECK(auc_shuffled(sal, fix, pool, 9) == doctest::Approx(manual / 10));
  CHECK(std::isnan(auc_shuffled(sal, fix, {}, 1)));
}

TEST_CASE("NSS, PCC, SIM and KLD hand values") {
  const RasterMap m(5, 1, std::vector<double>{0, 0, 0, 0, 1});
  CHECK(nss(m, {{4, 0}}) == doctest::Approx(2.0));
  CHECK(nss(m, {{0, 0}}) == doctest::Approx(-0.5));
  CHECK(nss(RasterMap(4, 4, 0.3), {{1, 1}}) == 0.0);

  std::mt19937_64 rng(4);
  const auto a = oracle::random_map(9, 9, rng);
  RasterMap inv = a;
  for (double& v : inv.values()) v = 1.0 - v;
  CHECK(pcc(a, a) == doctest::Approx(1.0));
  CHECK(pcc(a, inv) == doctest::Approx(-1.0));
  CHECK(pcc(a, RasterMap(9, 9, 2.0)) == 0.0);

  CHECK(similarity(a, a) == doctest::Approx(1.0));
  RasterMap left(4, 1, std::vector<double>{1, 1, 0, 0}), right(4, 1, std::vector<double>{0, 0, 1, 1});
  CHECK(similarity(left, right) == 0.0);
  CHECK(similarity(left, RasterMap(4, 1, 1.0)) == doctest::Approx(0.5));

  CHECK(kld(a, a) == doctest::Approx(0.0).scale(1.0));
  // Ground truth on two of four cells against a flat (or empty) prediction: log 2.
  CHECK(kld(RasterMap(4, 1, 1.0), left) == doctest::Approx(std::log(2.0)));
  CHECK(kld(RasterMap(4, 1, 0.0), left) == doctest::Approx(std::log(2.0)));
  CHECK(kld(right, left) > 20.0);
  CHECK_THROWS_AS(kld(RasterMap(4, 1, -1.0), left), Error);
}

TEST_CASE("fixation density") {
  const double sigma = 6.0;
  const auto d = fixation_density({{50.0, 40.0}}, {100, 80}, sigma);
  double total = 0.0, inner = 0.0;
  for (int y = 0; y < 80; ++y)
    for (int x = 0; x < 100; ++x) {
      total += d.at(x, y);
      if (std::hypot(x - 50.0, y - 40.0) <= sigma * std::sqrt(2.0 * std::log(2.0))) inner += d.at(x, y);
    }
  CHECK(total == doctest::Approx(1.0));
  CHECK(inner == doctest::Approx(0.5).epsilon(0.06));
  CHECK(d.at(50, 40) > d.at(55, 40));
  CHECK(d.at(56, 40) == doctest::Approx(d.at(44, 40)));
  const auto empty = fixation_density(std::vector<Point>{}, {10, 10}, 2.0);
  for (double v : empty.values()) CHECK(v == 0.0);
}

TEST_CASE("frame scoring identities") {
  const Dims dims{48, 36};
  std::mt19937_64 rng(5);
  const auto fix = center_points(15, dims, rng);
  const auto density = fixation_density(fix, dims, 3.0);
  const FrameTruth truth{density, fix, random_points(100, dims, rng)};
  const auto v = score_frame(normalize01(density), truth, 1);
  CHECK(get(v, Metric::Sim) == doctest::Approx(1.0));
  CHECK(get(v, Metric::Pcc) == doctest::Approx(1.0));
  CHECK(get(v, Metric::Kld) == doctest::Approx(0.0).scale(1.0));
  CHECK(get(v, Metric::Emd) == doctest::Approx(0.0).scale(1.0));
  CHECK(get(v, Metric::Auc) > 0.9);
  CHECK(get(v, Metric::Nss) > 1.0);

  const auto none = score_frame(normalize01(density), {density, {}, {}}, 1);
  for (double x : none) CHECK(std::isnan(x));
  CHECK(higher_is_better(Metric::Auc));
  CHECK(!higher_is_better(Metric::Kld));
  CHECK(!higher_is_better(Metric::Emd));
  CHECK(to_string(Metric::Sauc) == "sAUC");
}

TEST_CASE("center prior and postprocessing") {
  const auto c = center_map({21, 11});
  CHECK(c.at(10, 5) == 1.0);
  CHECK(c.at(0, 0) == 0.0);
  CHECK(c.at(4, 5) == doctest::Approx(c.at(16, 5)));
  std::mt19937_64 rng(6);
  const auto s = oracle::random_map(21, 11, rng);
  const auto id = postprocess(s, 0.0, 0.0);
  const auto ns = oracle::rescale(s);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(id[i] == doctest::Approx(ns[i]));
  const auto full = postprocess(s, 1.0, 2.0);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(full[i] == doctest::Approx(c[i]));
  CHECK_THROWS_AS(postprocess(s, 1.5, 0.0), Error);

  ViewingGeometry g;
  const auto grid = postprocess_sigma_grid(g);
  REQUIRE(grid.size() == 5);
  CHECK(grid[3] == doctest::Approx(g.pixels_per_degree()));

  // Noise predictions with center-biased fixations: tuning should add the center prior.
  g.res_w = 64;
  g.res_h = 36;
  std::vector<RasterMap> sals;
  std::vector<std::vector<Point>> fixes;
  for (int f = 0; f < 8; ++f) {
    sals.push_back(oracle::random_map(64, 36, rng));
    fixes.push_back(center_points(20, {64, 36}, rng));
  }
  std::vector<TuningFrame> frames;
  for (int f = 0; f < 8; ++f) frames.push_back({&sals[static_cast<std::size_t>(f)], &fixes[static_cast<std::size_t>(f)]});
  const auto choice = tune_postprocess(frames, g);
  CHECK(choice.center_weight > 0.0);
  CHECK(choice.mean_auc > 0.7);
}

TEST_CASE("histogram matching") {
  std::mt19937_64 rng(7);
  const auto s = oracle::random_map(9, 7, rng);
  const auto ref = oracle::random_map(9, 7, rng, 0, 3);
  const auto out = histogram_match(s, ref);
  std::vector<double> sorted_ref(ref.values().begin(), ref.values().end());
  std::sort(sorted_ref.begin(), sorted_ref.end());
  const auto order = oracle::argsort(s.values());
  for (std::size_t r = 0; r < order.size(); ++r) CHECK(out[order[r]] == sorted_ref[r]);

  const RasterMap tied(4, 1, std::vector<double>{0.5, 0.1, 0.5, 0.9});
  const RasterMap r4(4, 1, std::vector<double>{10, 20, 30, 40});
  const auto t = histogram_match(tied, r4);
  CHECK(t[1] == 10.0);
  CHECK(t[0] == 25.0);
  CHECK(t[2] == 25.0);
  CHECK(t[3] == 40.0);
  const RasterMap three(3, 1, std::vector<double>{0.2, 0.2, 0.2});
  const auto m3 = histogram_match(three, RasterMap(3, 1, std::vector<double>{1, 2, 6}));
  for (double v : m3.values()) CHECK(v == 2.0);
}

TEST_CASE("human baselines") {
  std::vector<Fixation> recs;
  std::mt19937_64 rng(8);
  const Dims dims{64, 36};
  for (int s = 0; s < 6; ++s)
    for (const auto& p : center_points(4, dims, rng)) recs.push_back({"s" + std::to_string(s), 0, p.x, p.y, 0});
  recs.push_back({"solo", 1, 10, 10, 0});
  const FixationSet fx(recs);
  ViewingGeometry g;
  g.res_w = 64;
  g.res_h = 36;
  const auto pool = random_points(200, dims, rng);
  const auto hb = human_baselines(fx, 0, dims, g, pool, 3);
  REQUIRE(hb.available);
  CHECK(get(hb.one_human, Metric::Auc) > 0.6);
  CHECK(get(hb.infinite_humans, Metric::Auc) <= 1.0);
  CHECK(get(hb.infinite_humans, Metric::Sim) >= get(hb.one_human, Metric::Sim));
  CHECK(get(hb.infinite_humans, Metric::Kld) >= 0.0);
  const auto again = human_baselines(fx, 0, dims, g, pool, 3);
  CHECK(get(again.infinite_humans, Metric::Nss) == get(hb.infinite_humans, Metric::Nss));
  CHECK(!human_baselines(fx, 1, dims, g, pool, 3).available);
}

TEST_CASE("fixation files") {
  const auto dir = std::filesystem::temp_directory_path() / "stereosal_fix_test";
  std::filesystem::create_directories(dir);
  const FixationSet set({{"a", 0, 1.5, 2.5, 10}, {"b", 3, 4, 5, 20}});
  save_fixations(dir / "f.csv", set);
  const auto back = load_fixations(dir / "f.csv");
  REQUIRE(back.records().size() == 2);
  CHECK(back.records()[0].x == 1.5);
  CHECK(back.records()[1].t_ms == 20);
  CHECK(back.subjects() == std::vector<std::string>{"a", "b"});
  CHECK(back.points(3).size() == 1);
  CHECK(back.scaled(2, 0.5).records()[1].y == 2.5);
  CHECK(back.clipped({4, 4}).records().size() == 1);
  {
    std::ofstream out(dir / "bad.csv");
    out << "subject,frame,x,y,t_ms\na,0,1,2,3\nb,zero,1,2\n";
  }
  try {
    load_fixations(dir / "bad.csv");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  {
    std::ofstream out(dir / "short.csv");
    out << "subject,frame,x,y\na,0,1,2\n";
  }
  CHECK(load_fixations(dir / "short.csv").records()[0].t_ms == 0.0);
  std::filesystem::remove_all(dir);
}
