#include "stereosal/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "stereosal/raster.hpp"

namespace stereosal {

namespace {

using Engine = std::mt19937_64;

std::size_t uniform_index(Engine& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& ts, const ForestParams& p, int mtry, std::uint64_t seed)
      : ts_(ts), p_(p), mtry_(mtry), rng_(splitmix64(seed)) {}

  std::vector<TreeNode> build(std::vector<std::size_t> idx) {
    idx_ = std::move(idx);
    grow(0, idx_.size());
    return std::move(nodes_);
  }

 private:
  int grow(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const std::size_t n = end - begin;
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += ts_.y[idx_[i]];
    nodes_[static_cast<std::size_t>(id)].value = sum / static_cast<double>(n);
    nodes_[static_cast<std::size_t>(id)].count = static_cast<int>(n);
    if (n < 2 * static_cast<std::size_t>(p_.min_leaf)) return id;

    const Split s = best_split(begin, end);
    if (s.feature < 0) return id;
    const auto mid = std::partition(idx_.begin() + static_cast<std::ptrdiff_t>(begin),
                                    idx_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t r) {
                                      return ts_.row(r)[s.feature] <= s.threshold;
                                    });
    const auto split_at = static_cast<std::size_t>(mid - idx_.begin());
    const int left = grow(begin, split_at);
    const int right = grow(split_at, end);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  Split best_split(std::size_t begin, std::size_t end) {
    const std::size_t p = ts_.cols();
    std::vector<int> features(p);
    std::iota(features.begin(), features.end(), 0);
    const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(mtry_), p);
    for (std::size_t k = 0; k < m; ++k) std::swap(features[k], features[k + uniform_index(rng_, p - k)]);

    const std::size_t n = end - begin;
    const std::size_t min_leaf = static_cast<std::size_t>(p_.min_leaf);
    double total = 0.0;
    double total_sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      total += ts_.y[idx_[i]];
      total_sq += ts_.y[idx_[i]] * ts_.y[idx_[i]];
    }
    const double sse = total_sq - total * total / static_cast<double>(n);
    Split best;
    best.gain = 1e-12 * std::max(1.0, sse);
    std::vector<std::pair<double, double>> col(n);
    for (std::size_t k = 0; k < m; ++k) {
      const int f = features[k];
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = idx_[begin + i];
        col[i] = {ts_.row(r)[f], ts_.y[r]};
      }
      std::sort(col.begin(), col.end());
      double left_sum = 0.0;
      double left_sq = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += col[i].second;
        left_sq += col[i].second * col[i].second;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < min_leaf) continue;
        if (nr < min_leaf) break;
        if (!(col[i].first < col[i + 1].first)) continue;
        const double right_sum = total - left_sum;
        const double right_sq = total_sq - left_sq;
        const double child = (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
                             (right_sq - right_sum * right_sum / static_cast<double>(nr));
        const double gain = sse - child;
        if (gain > best.gain) {
          double thr = 0.5 * (col[i].first + col[i + 1].first);
          if (!(thr < col[i + 1].first)) thr = col[i].first;
          best = {f, thr, gain};
        }
      }
    }
    return best;
  }

  const TrainingSet& ts_;
  const ForestParams& p_;
  int mtry_;
  Engine rng_;
  std::vector<std::size_t> idx_;
  std::vector<TreeNode> nodes_;
};

std::vector<std::uint8_t> in_bag_flags(std::uint64_t tree_seed, std::size_t rows, double ratio) {
  std::vector<std::uint8_t> flags(rows, 0);
  for (auto r : bootstrap_sample(tree_seed, rows, ratio)) flags[r] = 1;
  return flags;
}

int resolve_mtry(const ForestParams& p, std::size_t cols) {
  if (p.mtry > 0) return p.mtry;
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cols))));
}

}  // namespace

void TrainingSet::add(const std::vector<double>& features, double target) {
  if (features.size() != cols()) throw Error("training row has the wrong number of features");
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(target);
}

double RegressionTree::predict(const double* row) const {
  std::size_t k = 0;
  while (nodes[k].feature >= 0) {
    k = static_cast<std::size_t>(row[nodes[k].feature] <= nodes[k].threshold ? nodes[k].left : nodes[k].right);
  }
  return nodes[k].value;
}

double ForestModel::predict(const double* row) const {
  double s = 0.0;
  for (const auto& t : trees) s += t.predict(row);
  return s / static_cast<double>(trees.size());
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::vector<std::size_t> bootstrap_sample(std::uint64_t tree_seed, std::size_t rows, double ratio) {
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ratio * static_cast<double>(rows))));
  Engine rng(tree_seed);
  std::vector<std::size_t> idx(m);
  for (auto& i : idx) i = uniform_index(rng, rows);
  return idx;
}

ForestModel train_forest(const TrainingSet& ts, const ForestParams& params) {
  if (params.n_trees < 1 || params.min_leaf < 1 || !(params.bootstrap_ratio > 0)) {
    throw Error("train_forest: invalid forest parameters");
  }
  if (ts.cols() == 0) throw Error("train_forest: no features");
  if (ts.x.size() != ts.rows() * ts.cols()) throw Error("train_forest: design matrix has the wrong size");
  if (ts.rows() < static_cast<std::size_t>(params.min_leaf)) {
    throw Error("train_forest: " + std::to_string(ts.rows()) + " samples is fewer than min_leaf=" +
                std::to_string(params.min_leaf));
  }
  for (double v : ts.x) {
    if (!std::isfinite(v)) throw Error("train_forest: non-finite feature value");
  }
  for (double v : ts.y) {
    if (!std::isfinite(v)) throw Error("train_forest: non-finite target value");
  }

  ForestModel model;
  model.params = params;
  model.params.mtry = resolve_mtry(params, ts.cols());
  model.feature_names = ts.feature_names;
  model.training_rows = ts.rows();
  const std::size_t n = ts.rows();
  std::vector<double> oob_sum(n, 0.0);
  std::vector<int> oob_count(n, 0);
  for (int t = 0; t < params.n_trees; ++t) {
    RegressionTree tree;
    tree.seed = splitmix64(params.seed + static_cast<std::uint64_t>(t));
    TreeBuilder builder(ts, model.params, model.params.mtry, tree.seed);
    tree.nodes = builder.build(bootstrap_sample(tree.seed, n, params.bootstrap_ratio));
    const auto in_bag = in_bag_flags(tree.seed, n, params.bootstrap_ratio);
    for (std::size_t r = 0; r < n; ++r) {
      if (in_bag[r]) continue;
      oob_sum[r] += tree.predict(ts.row(r));
      ++oob_count[r];
    }
    model.trees.push_back(std::move(tree));
  }
  model.oob_prediction.assign(n, std::numeric_limits<double>::quiet_NaN());
  double se = 0.0;
  std::size_t covered = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (oob_count[r] == 0) continue;
    model.oob_prediction[r] = oob_sum[r] / oob_count[r];
    se += (model.oob_prediction[r] - ts.y[r]) * (model.oob_prediction[r] - ts.y[r]);
    ++covered;
  }
  model.oob_mse = covered ? se / static_cast<double>(covered) : 0.0;
  const Importance imp = oob_importance(model, ts);
  model.importance = imp.scaled;
  model.importance_raw = imp.raw;
  return model;
}

Importance oob_importance(const ForestModel& model, const TrainingSet& ts) {
  if (ts.feature_names != model.feature_names) throw Error("oob_importance: training set features differ from the model");
  if (ts.rows() != model.training_rows) throw Error("oob_importance: training set size differs from the model");
  const std::size_t p = ts.cols();
  const std::size_t n = ts.rows();
  std::vector<double> raw(p, 0.0);
  int used_trees = 0;
  std::vector<double> row(p);
  for (const auto& tree : model.trees) {
    const auto in_bag = in_bag_flags(tree.seed, n, model.params.bootstrap_ratio);
    std::vector<std::size_t> oob;
    for (std::size_t r = 0; r < n; ++r) {
      if (!in_bag[r]) oob.push_back(r);
    }
    if (oob.size() < 2) continue;
    ++used_trees;
    double base = 0.0;
    for (auto r : oob) {
      const double e = tree.predict(ts.row(r)) - ts.y[r];
      base += e * e;
    }
    base /= static_cast<double>(oob.size());
    Engine rng(splitmix64(tree.seed ^ 0xA5A5A5A5A5A5A5A5ULL));
    std::vector<std::size_t> perm(oob.size());
    for (std::size_t j = 0; j < p; ++j) {
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t k = perm.size() - 1; k > 0; --k) std::swap(perm[k], perm[uniform_index(rng, k + 1)]);
      double err = 0.0;
      for (std::size_t k = 0; k < oob.size(); ++k) {
        const double* src = ts.row(oob[k]);
        std::copy(src, src + p, row.begin());
        row[j] = ts.row(oob[perm[k]])[j];
        const double e = tree.predict(row.data()) - ts.y[oob[k]];
        err += e * e;
      }
      raw[j] += err / static_cast<double>(oob.size()) - base;
    }
  }
  Importance imp;
  imp.raw = raw;
  if (used_trees > 0) {
    for (double& v : imp.raw) v /= used_trees;
  }
  const double peak = p ? *std::max_element(imp.raw.begin(), imp.raw.end()) : 0.0;
  imp.scaled.resize(p, 0.0);
  if (peak > 0.0) {
    for (std::size_t j = 0; j < p; ++j) imp.scaled[j] = imp.raw[j] / peak;
  }
  return imp;
}

std::string to_json(const ForestModel& model) {
  using nlohmann::json;
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["params"] = {{"n_trees", model.params.n_trees},
                 {"min_leaf", model.params.min_leaf},
                 {"bootstrap_ratio", model.params.bootstrap_ratio},
                 {"mtry", model.params.mtry},
                 {"seed", model.params.seed}};
  j["feature_names"] = model.feature_names;
  j["training_rows"] = model.training_rows;
  j["oob_mse"] = model.oob_mse;
  j["importance"] = model.importance;
  j["importance_raw"] = model.importance_raw;
  json trees = json::array();
  for (const auto& t : model.trees) {
    json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
         value = json::array(), count = json::array();
    for (const auto& nd : t.nodes) {
      feature.push_back(nd.feature);
      threshold.push_back(nd.threshold);
      left.push_back(nd.left);
      right.push_back(nd.right);
      value.push_back(nd.value);
      count.push_back(nd.count);
    }
    trees.push_back({{"seed", t.seed},
                     {"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"value", value},
                     {"count", count}});
  }
  j["trees"] = std::move(trees);
  return j.dump(1) + "\n";
}

ForestModel model_from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("model file is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != kModelFormat) throw Error("not a stereosal forest model");
  const int version = j.value("version", -1);
  if (version != kModelVersion) {
    throw Error("model version " + std::to_string(version) + " is not supported (expected " +
                std::to_string(kModelVersion) + ")");
  }
  ForestModel m;
  try {
    const auto& p = j.at("params");
    m.params.n_trees = p.at("n_trees").get<int>();
    m.params.min_leaf = p.at("min_leaf").get<int>();
    m.params.bootstrap_ratio = p.at("bootstrap_ratio").get<double>();
    m.params.mtry = p.at("mtry").get<int>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.training_rows = j.at("training_rows").get<std::size_t>();
    m.oob_mse = j.at("oob_mse").get<double>();
    m.importance = j.at("importance").get<std::vector<double>>();
    m.importance_raw = j.at("importance_raw").get<std::vector<double>>();
    for (const auto& jt : j.at("trees")) {
      RegressionTree t;
      t.seed = jt.at("seed").get<std::uint64_t>();
      const auto f = jt.at("feature").get<std::vector<int>>();
      const auto thr = jt.at("threshold").get<std::vector<double>>();
      const auto l = jt.at("left").get<std::vector<int>>();
      const auto r = jt.at("right").get<std::vector<int>>();
      const auto v = jt.at("value").get<std::vector<double>>();
      const auto c = jt.at("count").get<std::vector<int>>();
      const std::size_t n = f.size();
      if (thr.size() != n || l.size() != n || r.size() != n || v.size() != n || c.size() != n || n == 0) {
        throw Error("model tree arrays have inconsistent lengths");
      }
      for (std::size_t k = 0; k < n; ++k) {
        if (f[k] >= 0) {
          if (f[k] >= static_cast<int>(m.feature_names.size()) || l[k] <= static_cast<int>(k) ||
              r[k] <= static_cast<int>(k) || l[k] >= static_cast<int>(n) || r[k] >= static_cast<int>(n)) {
            throw Error("model tree has an invalid node " + std::to_string(k));
          }
        }
        t.nodes.push_back({f[k], thr[k], l[k], r[k], v[k], c[k]});
      }
      m.trees.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
  if (m.trees.empty()) throw Error("model has no trees");
  return m;
}

void save_model(const std::filesystem::path& path, const ForestModel& model) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model: " + path.string());
  out << to_json(model);
}

ForestModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace stereosal
