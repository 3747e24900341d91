#include "stereosal/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stereosal/raster.hpp"

namespace stereosal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> finite_only(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) {
    if (!std::isnan(x)) out.push_back(x);
  }
  return out;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sum_sq_dev(const std::vector<double>& v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s;
}

}  // namespace

MeanInterval mean_ci(const std::vector<double>& values, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw Error("mean_ci: confidence must lie in (0,1)");
  const auto v = finite_only(values);
  MeanInterval r;
  r.n = v.size();
  if (v.empty()) {
    r.mean = kNaN;
    r.half_width = kNaN;
    return r;
  }
  r.mean = mean_of(v);
  if (v.size() < 2) {
    r.half_width = kNaN;
    return r;
  }
  const double n = static_cast<double>(v.size());
  const double sd = std::sqrt(sum_sq_dev(v, r.mean) / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  r.half_width = boost::math::quantile(dist, 0.5 + confidence / 2.0) * sd / std::sqrt(n);
  return r;
}

TTest two_sample_t(const std::vector<double>& a_in, const std::vector<double>& b_in) {
  const auto a = finite_only(a_in);
  const auto b = finite_only(b_in);
  TTest r;
  if (a.size() < 2 || b.size() < 2) {
    r.t = kNaN;
    r.p = kNaN;
    return r;
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  r.df = na + nb - 2.0;
  const double pooled = (sum_sq_dev(a, ma) + sum_sq_dev(b, mb)) / r.df;
  const double se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  if (!(se > 0.0)) {
    r.t = ma == mb ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), ma - mb);
    r.p = ma == mb ? 1.0 : 0.0;
    return r;
  }
  r.t = (ma - mb) / se;
  const boost::math::students_t dist(r.df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

std::vector<double> average_ranks(const std::vector<double>& scores, bool higher_is_better) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // NaN scores rank last.
  auto key = [&](std::size_t i) {
    const double s = scores[i];
    if (std::isnan(s)) return std::numeric_limits<double>::infinity();
    return higher_is_better ? -s : s;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && key(order[j + 1]) == key(order[i])) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace stereosal
