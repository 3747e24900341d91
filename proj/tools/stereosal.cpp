// Batch front end: extract -> train -> predict -> importance / evaluate / compare-fusion.
#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

#include "stereosal/color_tables.hpp"
#include "stereosal/geometry.hpp"
#include "stereosal/pipeline.hpp"

namespace {

using namespace stereosal;

void export_tables(const fs::path& dir) {
  fs::create_directories(dir);
  save_spectral_table(dir / "spectral_colors.csv", default_spectral_table());
  {
    std::ofstream out(dir / "empirical_colors.csv");
    out << "r,g,b,probability\n";
    for (const auto& c : default_empirical_table()) {
      out << c.rgb[0] << ',' << c.rgb[1] << ',' << c.rgb[2] << ',' << c.probability << '\n';
    }
  }
  {
    std::ofstream out(dir / "fovea_profile.txt");
    out << "# normalized eccentricity, relative photoreceptor density\n";
    for (const auto& [e, d] : default_density_profile()) out << e << ' ' << d << '\n';
  }
  if (!fs::exists(dir / "fovea_profile.txt")) throw Error("cannot write tables to " + dir.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stereoscopic video saliency: features, forest fusion and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  RunOptions opts;
  std::string features;
  std::string fusion = "forest";
  std::string config;
  std::string output;
  std::uint64_t seed = 0;
  bool verbose = false;
  bool quiet = false;
  app.add_option("--manifest", opts.manifest, "Run manifest (JSON)");
  app.add_option("--config", config, "Configuration (JSON); overrides the manifest's config");
  app.add_option("--output", output, "Output directory; overrides STEREOSAL_OUTPUT_DIR and the manifest");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed; overrides the manifest");
  app.add_option("--workers", opts.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--features", features, "Comma-separated feature subset (names or labels)");
  app.add_option("--fusion", fusion, "forest|average|multiplication|maximum|spp|gnlns|lmswa|sdw");
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  auto* extract = app.add_subcommand("extract", "Compute the 24 feature maps per frame");
  auto* train = app.add_subcommand("train", "Train the regression forest on the training split");
  auto* predict = app.add_subcommand("predict", "Write saliency maps for every video");
  auto* importance = app.add_subcommand("importance", "Write the feature importance table");
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions and baselines on the validation split");
  auto* compare = app.add_subcommand("compare-fusion", "Score every fusion scheme on the validation split");
  auto* all = app.add_subcommand("run", "extract, train, predict, importance and evaluate");
  std::string table_dir = "data";
  auto* tables = app.add_subcommand("export-tables", "Write the built-in color and fovea tables as editable files");
  tables->add_option("dir", table_dir, "Destination directory");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("stereosal"));
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (tables->parsed()) {
      export_tables(table_dir);
      return 0;
    }
    if (opts.manifest.empty()) throw Error("--manifest is required");
    if (!config.empty()) opts.config = config;
    if (!output.empty()) opts.output_dir = output;
    if (seed_opt->count()) opts.seed = seed;
    if (!features.empty()) opts.features = parse_feature_list(features);
    opts.fusion = parse_fusion_scheme(fusion);
    const RunContext run = open_run(opts);

    if (extract->parsed()) return cmd_extract(run);
    if (train->parsed()) return cmd_train(run);
    if (predict->parsed()) return cmd_predict(run);
    if (importance->parsed()) return cmd_importance(run);
    if (evaluate->parsed()) return cmd_evaluate(run);
    if (compare->parsed()) return cmd_compare_fusion(run);
    if (all->parsed()) {
      int rc = cmd_extract(run);
      rc |= cmd_train(run);
      rc |= cmd_predict(run);
      if (run.options.fusion == FusionScheme::Forest) rc |= cmd_importance(run);
      rc |= cmd_evaluate(run);
      return rc;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
