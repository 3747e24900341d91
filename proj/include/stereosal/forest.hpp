#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stereosal {

/// Row-major design matrix with one regression target per row.
struct TrainingSet {
  std::vector<std::string> feature_names;
  std::vector<double> x;  ///< rows() * cols()
  std::vector<double> y;

  std::size_t rows() const { return y.size(); }
  std::size_t cols() const { return feature_names.size(); }
  const double* row(std::size_t i) const { return x.data() + i * cols(); }
  void add(const std::vector<double>& features, double target);
};

struct ForestParams {
  int n_trees = 40;
  int min_leaf = 10;
  double bootstrap_ratio = 1.0 / 3.0;
  int mtry = 0;  ///< 0 selects ceil(sqrt(features))
  std::uint64_t seed = 1;
};

struct TreeNode {
  int feature = -1;  ///< -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  ///< mean target of the node's samples
  int count = 0;
};

struct RegressionTree {
  std::uint64_t seed = 0;  ///< regenerates the bootstrap sample
  std::vector<TreeNode> nodes;

  double predict(const double* row) const;
};

struct ForestModel {
  ForestParams params;
  std::vector<std::string> feature_names;
  std::vector<RegressionTree> trees;
  std::size_t training_rows = 0;
  std::vector<double> oob_prediction;  ///< NaN where a row was never out of bag
  double oob_mse = 0.0;
  std::vector<double> importance;      ///< scaled so the maximum is 1
  std::vector<double> importance_raw;  ///< mean OOB error increase

  double predict(const double* row) const;
};

/// splitmix64 step; per-tree seeds are derived from the master seed with it.
std::uint64_t splitmix64(std::uint64_t x);

ForestModel train_forest(const TrainingSet& ts, const ForestParams& params = {});

/// Row indices drawn (with replacement) for a tree's bootstrap sample.
std::vector<std::size_t> bootstrap_sample(std::uint64_t tree_seed, std::size_t rows, double ratio);

struct Importance {
  std::vector<double> raw;
  std::vector<double> scaled;
};

/// Permutation importance on out-of-bag rows, averaged over trees.
Importance oob_importance(const ForestModel& model, const TrainingSet& ts);

std::string to_json(const ForestModel& model);
ForestModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const ForestModel& model);
ForestModel load_model(const std::filesystem::path& path);

inline constexpr const char* kModelFormat = "stereosal-forest";
inline constexpr int kModelVersion = 1;

}  // namespace stereosal
