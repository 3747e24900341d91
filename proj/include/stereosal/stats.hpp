#pragma once

#include <string>
#include <vector>

namespace stereosal {

struct MeanInterval {
  double mean = 0.0;
  double half_width = 0.0;  ///< NaN when fewer than two values
  std::size_t n = 0;
};

/// Mean with a two-sided Student-t confidence half-width. NaN entries are skipped.
MeanInterval mean_ci(const std::vector<double>& values, double confidence = 0.95);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  ///< two-sided
};

/// Pooled-variance two-sample t-test. NaN entries are skipped; fewer than two
/// values on either side gives p = NaN.
TTest two_sample_t(const std::vector<double>& a, const std::vector<double>& b);

/// Ranks (1 = best) with ties sharing their average rank.
std::vector<double> average_ranks(const std::vector<double>& scores, bool higher_is_better);

}  // namespace stereosal
