#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stereosal/geometry.hpp"
#include "stereosal/raster.hpp"

namespace stereosal {

struct Fixation {
  std::string subject;
  int frame = 0;
  double x = 0.0;
  double y = 0.0;
  double t_ms = 0.0;
};

struct Point {
  double x;
  double y;
};

class FixationSet {
 public:
  FixationSet() = default;
  explicit FixationSet(std::vector<Fixation> records) : records_(std::move(records)) {}

  const std::vector<Fixation>& records() const { return records_; }
  std::vector<Point> points(int frame) const;
  std::vector<Point> points(int frame, const std::vector<std::string>& subjects) const;
  std::vector<std::string> subjects() const;
  FixationSet scaled(double sx, double sy) const;
  /// Drops records outside the frame (with a warning count) and returns the rest.
  FixationSet clipped(Dims dims) const;

 private:
  std::vector<Fixation> records_;
};

/// CSV with a header row: subject,frame,x,y,t_ms.
FixationSet load_fixations(const std::filesystem::path& path);
void save_fixations(const std::filesystem::path& path, const FixationSet& set);

/// Gaussian splats of the given sigma (pixels) at each point, normalized to
/// sum 1. No points gives a zero map and a warning.
RasterMap fixation_density(const std::vector<Point>& points, Dims dims, double sigma_px);
RasterMap fixation_density(const FixationSet& fx, int frame, Dims dims, const ViewingGeometry& g);

enum class Metric { Auc, Sauc, Emd, Sim, Pcc, Kld, Nss };
inline constexpr std::array<Metric, 7> kMetrics{Metric::Auc, Metric::Sauc, Metric::Emd, Metric::Sim,
                                                Metric::Pcc, Metric::Kld,  Metric::Nss};
std::string to_string(Metric m);
/// True for metrics where larger is better.
bool higher_is_better(Metric m);

/// ROC over thresholds at the saliency values of fixated pixels; false
/// positive rate over all other pixels. Tied values share one ROC point, so a
/// constant map scores 0.5.
double auc_judd(const RasterMap& sal, const std::vector<Point>& fixations);
/// Mann-Whitney AUC of fixated saliency against saliency at `negatives`.
double auc_pairs(const RasterMap& sal, const std::vector<Point>& positives, const std::vector<Point>& negatives);
/// Mean over `splits` draws of auc_pairs with negatives resampled (with
/// replacement) from `pool` to the positive count.
double auc_shuffled(const RasterMap& sal, const std::vector<Point>& fixations, const std::vector<Point>& pool,
                    std::uint64_t seed, int splits = 10);
double nss(const RasterMap& sal, const std::vector<Point>& fixations);
double pcc(const RasterMap& a, const RasterMap& b);
/// KL(gt || sal) over distribution-normalized maps.
double kld(const RasterMap& sal, const RasterMap& gt);
double similarity(const RasterMap& sal, const RasterMap& gt);

inline constexpr double kKldEpsilon = 1e-12;

/// Metric values; NaN marks a metric that could not be computed.
using MetricValues = std::array<double, 7>;
double get(const MetricValues& v, Metric m);

struct FrameTruth {
  RasterMap density;
  std::vector<Point> fixations;
  std::vector<Point> shuffle_pool;  ///< fixations from other videos
};

MetricValues score_frame(const RasterMap& sal, const FrameTruth& truth, std::uint64_t seed, int emd_grid = 32);

RasterMap chance_map(Dims dims, std::uint64_t seed);
/// Centered isotropic Gaussian, sigma = min(W, H) / 4, normalized to [0,1].
RasterMap center_map(Dims dims);

/// normalize01((1 - w) * blur(sal, sigma) + w * center).
RasterMap postprocess(const RasterMap& sal, double center_weight, double blur_sigma_px);

struct PostprocessChoice {
  double center_weight = 0.0;
  double blur_sigma_px = 0.0;
  double mean_auc = 0.0;
};

struct TuningFrame {
  const RasterMap* sal;
  const std::vector<Point>* fixations;
};

/// Grid search over w in {0, 0.1, ..., 0.5} and sigma in {0, 0.25, 0.5, 1, 1.5}
/// degrees (converted with the geometry) maximizing mean AUC.
PostprocessChoice tune_postprocess(const std::vector<TuningFrame>& frames, const ViewingGeometry& g);
std::vector<double> postprocess_sigma_grid(const ViewingGeometry& g);

/// Rank-based quantile mapping onto the reference values. Ties in `sal` share
/// the reference value at the middle of their rank range. Weakly monotone.
RasterMap histogram_match(const RasterMap& sal, const RasterMap& reference);

struct SubjectSplitScores {
  MetricValues one_human;
  MetricValues infinite_humans;
  bool available = false;
};

/// Leave-one-subject-out scores and the a + b/k extrapolation of split scores
/// for one frame. Needs at least two subjects with fixations on the frame.
SubjectSplitScores human_baselines(const FixationSet& fx, int frame, Dims dims, const ViewingGeometry& g,
                                   const std::vector<Point>& shuffle_pool, std::uint64_t seed, int emd_grid = 32);

}  // namespace stereosal
