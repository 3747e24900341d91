#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <random>

#include "stereosal/forest.hpp"
#include "stereosal/raster.hpp"

using namespace stereosal;

namespace {

TrainingSet make_set(std::size_t n, std::uint64_t seed, auto target) {
  TrainingSet ts;
  ts.feature_names = {"signal", "noise", "weak"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> row{u(rng), u(rng), u(rng)};
    ts.add(row, target(row));
  }
  return ts;
}

}  // namespace

TEST_CASE("splitmix64 reference values") {
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64(1) != splitmix64(2));
}

TEST_CASE("bootstrap sampling") {
  const auto a = bootstrap_sample(42, 900, 1.0 / 3.0);
  CHECK(a.size() == 300);
  for (auto i : a) CHECK(i < 900);
  CHECK(a == bootstrap_sample(42, 900, 1.0 / 3.0));
  CHECK(a != bootstrap_sample(43, 900, 1.0 / 3.0));
  CHECK(bootstrap_sample(1, 2, 0.01).size() == 1);
}

TEST_CASE("constant target") {
  const auto ts = make_set(200, 1, [](const auto&) { return 0.25; });
  const auto model = train_forest(ts, {10, 5, 1.0 / 3.0, 0, 3});
  for (std::size_t r = 0; r < ts.rows(); ++r) CHECK(model.predict(ts.row(r)) == doctest::Approx(0.25));
  for (const auto& t : model.trees) CHECK(t.nodes.size() == 1);
  CHECK(model.oob_mse == doctest::Approx(0.0));
  for (double v : model.importance) CHECK(v == 0.0);
}

TEST_CASE("signal feature dominates importance") {
  const auto ts = make_set(1500, 2, [](const auto& r) { return r[0] > 0.5 ? 1.0 : 0.0 + 0.1 * r[2]; });
  const auto model = train_forest(ts, {30, 10, 1.0 / 3.0, 0, 11});
  CHECK(model.params.mtry == 2);
  REQUIRE(model.importance.size() == 3);
  CHECK(model.importance[0] == 1.0);
  CHECK(model.importance[1] < 0.05);
  CHECK(model.importance[2] < model.importance[0]);
  CHECK(model.importance_raw[0] > 0.1);
  CHECK(model.oob_mse < 0.02);
  const double hi[3] = {0.9, 0.5, 0.5};
  const double lo[3] = {0.1, 0.5, 0.5};
  CHECK(model.predict(hi) > 0.9);
  CHECK(model.predict(lo) < 0.1);
  const auto again = oob_importance(model, ts);
  CHECK(again.raw == model.importance_raw);
}

TEST_CASE("leaf size and determinism") {
  const auto ts = make_set(600, 3, [](const auto& r) { return std::sin(6 * r[0]) + r[1] * r[1]; });
  const ForestParams p{8, 15, 1.0 / 3.0, 0, 5};
  const auto a = train_forest(ts, p);
  for (const auto& t : a.trees) {
    for (const auto& nd : t.nodes) {
      if (nd.feature < 0) {
        CHECK(nd.count >= 15);
      } else {
        CHECK(nd.count >= 30);
      }
    }
  }
  const auto b = train_forest(ts, p);
  CHECK(to_json(a) == to_json(b));
  auto q = p;
  q.seed = 6;
  CHECK(to_json(train_forest(ts, q)) != to_json(a));
  CHECK_THROWS_AS(train_forest(make_set(5, 1, [](const auto&) { return 0.0; }), p), Error);
  auto bad = ts;
  bad.y[3] = std::nan("");
  CHECK_THROWS_AS(train_forest(bad, p), Error);
}

TEST_CASE("averaging over trees") {
  const auto ts = make_set(400, 4, [](const auto& r) { return r[0] + r[1]; });
  auto model = train_forest(ts, {5, 10, 1.0 / 3.0, 0, 9});
  const double row[3] = {0.3, 0.6, 0.2};
  double mean = 0.0;
  for (const auto& t : model.trees) mean += t.predict(row);
  mean /= 5.0;
  CHECK(model.predict(row) == doctest::Approx(mean).epsilon(1e-15));
  const double before = model.predict(row);
  const auto copy = model.trees;
  model.trees.insert(model.trees.end(), copy.begin(), copy.end());
  CHECK(model.predict(row) == doctest::Approx(before).epsilon(1e-15));
}

TEST_CASE("model serialization") {
  const auto ts = make_set(300, 5, [](const auto& r) { return r[0] * r[2]; });
  const auto model = train_forest(ts, {6, 10, 1.0 / 3.0, 0, 13});
  const auto text = to_json(model);
  const auto back = model_from_json(text);
  CHECK(to_json(back) == text);
  CHECK(back.feature_names == model.feature_names);
  for (std::size_t r = 0; r < ts.rows(); ++r) CHECK(back.predict(ts.row(r)) == model.predict(ts.row(r)));

  auto doc = nlohmann::json::parse(text);
  CHECK(doc["format"] == "stereosal-forest");
  doc["version"] = 2;
  try {
    model_from_json(doc.dump());
    FAIL("expected version rejection");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("version 2") != std::string::npos);
  }
  CHECK_THROWS_AS(model_from_json("{\"format\":\"other\",\"version\":1}"), Error);
  CHECK_THROWS_AS(model_from_json("not json"), Error);

  const auto path = std::filesystem::temp_directory_path() / "stereosal_forest_test.json";
  save_model(path, model);
  CHECK(to_json(load_model(path)) == text);
  std::filesystem::remove(path);
}
