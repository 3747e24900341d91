#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stereosal/config.hpp"
#include "stereosal/evaluation.hpp"
#include "stereosal/features.hpp"
#include "stereosal/fusion.hpp"

namespace stereosal {

namespace fs = std::filesystem;

inline constexpr const char* kStackFormat = "stereosal-stack";
inline constexpr int kStackVersion = 1;

/// Binary stack: magic "SSTK", uint32 version, uint32 map count, then each map
/// as a raw float container (see io::write_raw_map), in canonical order.
void write_stack(const fs::path& path, const FeatureStack& stack);
FeatureStack read_stack(const fs::path& path);

struct RunOptions {
  fs::path manifest;
  std::optional<fs::path> config;      ///< overrides the manifest's config
  std::optional<fs::path> output_dir;  ///< overrides STEREOSAL_OUTPUT_DIR and the manifest
  std::optional<std::uint64_t> seed;
  int workers = 1;
  FeatureMask features = all_features();
  FusionScheme fusion = FusionScheme::Forest;
};

/// Resolved manifest + configuration for one invocation.
struct RunContext {
  RunManifest manifest;
  PipelineConfig config;
  RunOptions options;
  fs::path output_dir;
  std::uint64_t seed = 1;

  fs::path stack_dir(const std::string& video) const { return output_dir / "stacks" / video; }
  fs::path prediction_dir(FusionScheme s, const std::string& video) const {
    return output_dir / "predictions" / to_string(s) / video;
  }
  fs::path model_path() const { return output_dir / "model.json"; }
  /// Videos evaluated: the validation split, or every video when it is empty.
  std::vector<std::string> evaluation_videos() const;
};

RunContext open_run(const RunOptions& options);

/// Row of an evaluation report.
struct ModelSummary {
  std::string name;
  bool ranked = true;  ///< human reference rows are listed but not ranked
  std::vector<MetricValues> per_video;
  MetricValues mean{};
  MetricValues half_width{};
  double average_rank = 0.0;
  MetricValues p_vs_first{};  ///< two-sample t-test against the first row
};

struct EvaluationReport {
  std::vector<std::string> videos;
  std::vector<ModelSummary> rows;
  std::optional<PostprocessChoice> postprocess;

  const ModelSummary* find(const std::string& name) const;
};

/// Fills means, intervals, p-values and average ranks (sAUC, KLD, NSS).
void summarize(EvaluationReport& report);
std::string format_report(const EvaluationReport& report, const std::string& title);

// Commands. Each returns a process exit code: nonzero iff some per-video unit failed.
int cmd_extract(const RunContext& run);
int cmd_train(const RunContext& run);
int cmd_predict(const RunContext& run);
int cmd_importance(const RunContext& run);
int cmd_evaluate(const RunContext& run);
int cmd_compare_fusion(const RunContext& run);

/// Evaluation backing cmd_evaluate (reads predictions of run.options.fusion).
EvaluationReport evaluate_run(const RunContext& run, bool& failed);

}  // namespace stereosal
