#include "stereosal/evaluation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "stereosal/emd.hpp"
#include "stereosal/imaging.hpp"

namespace stereosal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t pixel_of(const RasterMap& m, const Point& p) {
  const int x = std::clamp(static_cast<int>(std::lround(p.x)), 0, m.width() - 1);
  const int y = std::clamp(static_cast<int>(std::lround(p.y)), 0, m.height() - 1);
  return m.index(x, y);
}

RasterMap as_distribution(const RasterMap& m) {
  double s = 0.0;
  for (double v : m.values()) {
    if (v < 0.0) throw Error("saliency and density maps must be non-negative");
    s += v;
  }
  RasterMap out(m.dims(), 1.0 / static_cast<double>(m.size()));
  if (!(s > 0.0)) return out;  // empty map: uniform
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] / s;
  return out;
}

double nan_mean(const std::vector<double>& v) {
  double s = 0.0;
  int n = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    s += x;
    ++n;
  }
  return n ? s / n : kNaN;
}

// Standard deviations at rounding-noise level count as a flat map.
bool is_flat(const MapStats& st) { return !(st.stddev > 1e-12 * std::max(1.0, std::abs(st.mean))); }

double clamp_metric(Metric m, double v) {
  if (std::isnan(v)) return v;
  switch (m) {
    case Metric::Auc:
    case Metric::Sauc:
    case Metric::Sim: return std::clamp(v, 0.0, 1.0);
    case Metric::Pcc: return std::clamp(v, -1.0, 1.0);
    case Metric::Kld:
    case Metric::Emd: return std::max(v, 0.0);
    case Metric::Nss: return v;
  }
  return v;
}

}  // namespace

std::vector<Point> FixationSet::points(int frame) const {
  std::vector<Point> out;
  for (const auto& r : records_) {
    if (r.frame == frame) out.push_back({r.x, r.y});
  }
  return out;
}

std::vector<Point> FixationSet::points(int frame, const std::vector<std::string>& subjects) const {
  std::vector<Point> out;
  for (const auto& r : records_) {
    if (r.frame == frame && std::find(subjects.begin(), subjects.end(), r.subject) != subjects.end()) {
      out.push_back({r.x, r.y});
    }
  }
  return out;
}

std::vector<std::string> FixationSet::subjects() const {
  std::set<std::string> s;
  for (const auto& r : records_) s.insert(r.subject);
  return {s.begin(), s.end()};
}

FixationSet FixationSet::scaled(double sx, double sy) const {
  auto r = records_;
  for (auto& f : r) {
    f.x *= sx;
    f.y *= sy;
  }
  return FixationSet(std::move(r));
}

FixationSet FixationSet::clipped(Dims dims) const {
  std::vector<Fixation> kept;
  std::size_t dropped = 0;
  for (const auto& f : records_) {
    if (f.x >= -0.5 && f.y >= -0.5 && f.x < dims.width - 0.5 && f.y < dims.height - 0.5) {
      kept.push_back(f);
    } else {
      ++dropped;
    }
  }
  if (dropped) spdlog::warn("{} fixations outside the frame were dropped", dropped);
  return FixationSet(std::move(kept));
}

FixationSet load_fixations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open fixations: " + path.string());
  std::vector<Fixation> records;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!header_seen) {
      header_seen = true;
      if (line.find("subject") != std::string::npos) continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    Fixation f;
    if (!(row >> f.subject >> f.frame >> f.x >> f.y)) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected subject,frame,x,y,t_ms");
    }
    if (!(row >> f.t_ms)) f.t_ms = 0.0;
    if (f.frame < 0 || !std::isfinite(f.x) || !std::isfinite(f.y)) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": invalid fixation record");
    }
    records.push_back(f);
  }
  return FixationSet(std::move(records));
}

void save_fixations(const std::filesystem::path& path, const FixationSet& set) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write fixations: " + path.string());
  out << "subject,frame,x,y,t_ms\n";
  for (const auto& f : set.records()) out << f.subject << ',' << f.frame << ',' << f.x << ',' << f.y << ',' << f.t_ms << '\n';
}

RasterMap fixation_density(const std::vector<Point>& points, Dims dims, double sigma) {
  RasterMap out(dims, 0.0);
  if (points.empty()) {
    spdlog::warn("fixation_density: no fixations, emitting a zero map");
    return out;
  }
  if (!(sigma > 0.0)) throw Error("fixation_density: sigma must be positive");
  const int r = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> gx;
  std::vector<double> gy;
  for (const auto& p : points) {
    const int x0 = std::max(0, static_cast<int>(std::floor(p.x)) - r);
    const int x1 = std::min(dims.width - 1, static_cast<int>(std::ceil(p.x)) + r);
    const int y0 = std::max(0, static_cast<int>(std::floor(p.y)) - r);
    const int y1 = std::min(dims.height - 1, static_cast<int>(std::ceil(p.y)) + r);
    gx.assign(static_cast<std::size_t>(std::max(0, x1 - x0 + 1)), 0.0);
    gy.assign(static_cast<std::size_t>(std::max(0, y1 - y0 + 1)), 0.0);
    for (int x = x0; x <= x1; ++x) gx[static_cast<std::size_t>(x - x0)] = std::exp(-0.5 * (x - p.x) * (x - p.x) / (sigma * sigma));
    for (int y = y0; y <= y1; ++y) gy[static_cast<std::size_t>(y - y0)] = std::exp(-0.5 * (y - p.y) * (y - p.y) / (sigma * sigma));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) out.at(x, y) += gx[static_cast<std::size_t>(x - x0)] * gy[static_cast<std::size_t>(y - y0)];
    }
  }
  double s = 0.0;
  for (double v : out.values()) s += v;
  if (!(s > 0.0)) return out;
  for (double& v : out.values()) v /= s;
  return out;
}

RasterMap fixation_density(const FixationSet& fx, int frame, Dims dims, const ViewingGeometry& g) {
  return fixation_density(fx.points(frame), dims, g.pixels_per_degree());
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::Auc: return "AUC";
    case Metric::Sauc: return "sAUC";
    case Metric::Emd: return "EMD";
    case Metric::Sim: return "SIM";
    case Metric::Pcc: return "PCC";
    case Metric::Kld: return "KLD";
    case Metric::Nss: return "NSS";
  }
  return "?";
}

bool higher_is_better(Metric m) { return m != Metric::Kld && m != Metric::Emd; }

double get(const MetricValues& v, Metric m) { return v[static_cast<std::size_t>(m)]; }

double auc_judd(const RasterMap& sal, const std::vector<Point>& fixations) {
  if (fixations.empty()) return kNaN;
  std::vector<std::size_t> fix_px;
  for (const auto& p : fixations) fix_px.push_back(pixel_of(sal, p));
  std::vector<double> thresholds;
  for (auto i : fix_px) thresholds.push_back(sal[i]);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  std::vector<double> all(sal.values().begin(), sal.values().end());
  std::sort(all.begin(), all.end(), std::greater<>());
  const double nfix = static_cast<double>(fix_px.size());
  const double npix = static_cast<double>(sal.size());
  if (npix <= nfix) return kNaN;
  std::vector<double> tp{0.0};
  std::vector<double> fp{0.0};
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    // Tied fixation values form a single ROC point.
    while (k + 1 < thresholds.size() && thresholds[k + 1] == thresholds[k]) ++k;
    const double t = thresholds[k];
    const double above_fix = static_cast<double>(k + 1);
    const auto above_all = static_cast<double>(std::upper_bound(all.begin(), all.end(), t, std::greater<>()) - all.begin());
    tp.push_back(above_fix / nfix);
    fp.push_back(std::clamp((above_all - above_fix) / (npix - nfix), 0.0, 1.0));
  }
  tp.push_back(1.0);
  fp.push_back(1.0);
  double area = 0.0;
  for (std::size_t k = 1; k < tp.size(); ++k) area += 0.5 * (fp[k] - fp[k - 1]) * (tp[k] + tp[k - 1]);
  return area;
}

double auc_pairs(const RasterMap& sal, const std::vector<Point>& positives, const std::vector<Point>& negatives) {
  if (positives.empty() || negatives.empty()) return kNaN;
  std::vector<double> neg;
  for (const auto& p : negatives) neg.push_back(sal[pixel_of(sal, p)]);
  std::sort(neg.begin(), neg.end());
  double wins = 0.0;
  for (const auto& p : positives) {
    const double v = sal[pixel_of(sal, p)];
    const auto lo = std::lower_bound(neg.begin(), neg.end(), v);
    const auto hi = std::upper_bound(neg.begin(), neg.end(), v);
    wins += static_cast<double>(lo - neg.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(positives.size()) * static_cast<double>(neg.size()));
}

double auc_shuffled(const RasterMap& sal, const std::vector<Point>& fixations, const std::vector<Point>& pool,
                    std::uint64_t seed, int splits) {
  if (fixations.empty() || pool.empty() || splits < 1) return kNaN;
  std::mt19937_64 rng(seed);
  double total = 0.0;
  std::vector<Point> neg(fixations.size());
  for (int s = 0; s < splits; ++s) {
    for (auto& p : neg) p = pool[static_cast<std::size_t>(rng() % pool.size())];
    total += auc_pairs(sal, fixations, neg);
  }
  return total / splits;
}

double nss(const RasterMap& sal, const std::vector<Point>& fixations) {
  if (fixations.empty()) return kNaN;
  const auto st = map_stats(sal);
  if (is_flat(st)) return 0.0;
  double s = 0.0;
  for (const auto& p : fixations) s += (sal[pixel_of(sal, p)] - st.mean) / st.stddev;
  return s / static_cast<double>(fixations.size());
}

double pcc(const RasterMap& a, const RasterMap& b) {
  require_same_dims(a.dims(), b.dims(), "pcc");
  const auto sa = map_stats(a);
  const auto sb = map_stats(b);
  if (is_flat(sa) || is_flat(sb)) return 0.0;
  double cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - sa.mean) * (b[i] - sb.mean);
  cov /= static_cast<double>(a.size());
  return std::clamp(cov / (sa.stddev * sb.stddev), -1.0, 1.0);
}

double kld(const RasterMap& sal, const RasterMap& gt) {
  require_same_dims(sal.dims(), gt.dims(), "kld");
  const RasterMap s = as_distribution(sal);
  const RasterMap g = as_distribution(gt);
  double d = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] > 0.0) d += g[i] * std::log((g[i] + kKldEpsilon) / (s[i] + kKldEpsilon));
  }
  return std::max(0.0, d);
}

double similarity(const RasterMap& sal, const RasterMap& gt) {
  require_same_dims(sal.dims(), gt.dims(), "sim");
  const RasterMap s = as_distribution(sal);
  const RasterMap g = as_distribution(gt);
  double sim = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) sim += std::min(s[i], g[i]);
  return std::min(sim, 1.0);
}

MetricValues score_frame(const RasterMap& sal, const FrameTruth& truth, std::uint64_t seed, int emd_grid) {
  require_same_dims(sal.dims(), truth.density.dims(), "score_frame");
  MetricValues v;
  v.fill(kNaN);
  const bool has_fix = !truth.fixations.empty();
  v[static_cast<std::size_t>(Metric::Auc)] = auc_judd(sal, truth.fixations);
  v[static_cast<std::size_t>(Metric::Sauc)] = auc_shuffled(sal, truth.fixations, truth.shuffle_pool, seed);
  v[static_cast<std::size_t>(Metric::Nss)] = nss(sal, truth.fixations);
  if (has_fix) {
    v[static_cast<std::size_t>(Metric::Pcc)] = pcc(sal, truth.density);
    v[static_cast<std::size_t>(Metric::Kld)] = kld(sal, truth.density);
    v[static_cast<std::size_t>(Metric::Sim)] = similarity(sal, truth.density);
    const RasterMap s = as_distribution(sal);
    v[static_cast<std::size_t>(Metric::Emd)] = emd(s, truth.density, emd_grid);
  }
  return v;
}

RasterMap chance_map(Dims dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RasterMap out(dims);
  for (double& v : out.values()) v = u(rng);
  return out;
}

RasterMap center_map(Dims dims) {
  const double sigma = std::min(dims.width, dims.height) / 4.0;
  const double cx = (dims.width - 1) / 2.0;
  const double cy = (dims.height - 1) / 2.0;
  RasterMap out(dims);
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      out.at(x, y) = std::exp(-0.5 * ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (sigma * sigma));
    }
  }
  return normalize01(out);
}

RasterMap postprocess(const RasterMap& sal, double w, double sigma) {
  if (w < 0.0 || w > 1.0) throw Error("postprocess: center weight must lie in [0,1]");
  const RasterMap blurred = gaussian_blur(sal, sigma);
  const RasterMap c = center_map(sal.dims());
  RasterMap out(sal.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * blurred[i] + w * c[i];
  return normalize01(out);
}

std::vector<double> postprocess_sigma_grid(const ViewingGeometry& g) {
  std::vector<double> s;
  for (double deg : {0.0, 0.25, 0.5, 1.0, 1.5}) s.push_back(deg * g.pixels_per_degree());
  return s;
}

PostprocessChoice tune_postprocess(const std::vector<TuningFrame>& frames, const ViewingGeometry& g) {
  PostprocessChoice best{0.0, 0.0, -1.0};
  for (int wi = 0; wi <= 5; ++wi) {
    const double w = wi / 10.0;
    for (double sigma : postprocess_sigma_grid(g)) {
      std::vector<double> aucs;
      for (const auto& f : frames) aucs.push_back(auc_judd(postprocess(*f.sal, w, sigma), *f.fixations));
      const double m = nan_mean(aucs);
      if (!std::isnan(m) && m > best.mean_auc + 1e-12) best = {w, sigma, m};
    }
  }
  if (best.mean_auc < 0.0) best.mean_auc = kNaN;
  return best;
}

RasterMap histogram_match(const RasterMap& sal, const RasterMap& reference) {
  require_same_dims(sal.dims(), reference.dims(), "histogram_match");
  const std::size_t n = sal.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sal[a] < sal[b]; });
  std::vector<double> ref(reference.values().begin(), reference.values().end());
  std::sort(ref.begin(), ref.end());
  RasterMap out(sal.dims());
  std::size_t a = 0;
  while (a < n) {
    std::size_t b = a;
    while (b + 1 < n && sal[order[b + 1]] == sal[order[a]]) ++b;
    const double v = 0.5 * (ref[(a + b) / 2] + ref[(a + b + 1) / 2]);
    for (std::size_t k = a; k <= b; ++k) out[order[k]] = v;
    a = b + 1;
  }
  return out;
}

SubjectSplitScores human_baselines(const FixationSet& fx, int frame, Dims dims, const ViewingGeometry& g,
                                   const std::vector<Point>& pool, std::uint64_t seed, int emd_grid_size) {
  SubjectSplitScores out;
  out.one_human.fill(kNaN);
  out.infinite_humans.fill(kNaN);
  std::vector<std::string> subjects;
  for (const auto& s : fx.subjects()) {
    if (!fx.points(frame, {s}).empty()) subjects.push_back(s);
  }
  const std::size_t n = subjects.size();
  if (n < 2) return out;
  out.available = true;
  const double sigma = g.pixels_per_degree();

  auto score_split = [&](const std::vector<std::string>& pred, const std::vector<std::string>& truth_subjects,
                         std::uint64_t s) {
    const RasterMap sal = fixation_density(fx.points(frame, pred), dims, sigma);
    FrameTruth truth{fixation_density(fx.points(frame, truth_subjects), dims, sigma), fx.points(frame, truth_subjects),
                     pool};
    return score_frame(sal, truth, s, emd_grid_size);
  };

  std::vector<std::vector<double>> per_metric(kMetrics.size());
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::string> others;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != k) others.push_back(subjects[j]);
    }
    const auto v = score_split({subjects[k]}, others, seed + k);
    for (std::size_t m = 0; m < kMetrics.size(); ++m) per_metric[m].push_back(v[m]);
  }
  for (std::size_t m = 0; m < kMetrics.size(); ++m) out.one_human[m] = nan_mean(per_metric[m]);

  // Scores of k-subject predictors against the remaining subjects, fitted as a + b / k.
  constexpr int kDraws = 3;
  std::mt19937_64 rng(seed ^ 0x5DEECE66DULL);
  std::vector<double> ks;
  std::vector<MetricValues> means;
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<std::vector<double>> vals(kMetrics.size());
    for (int d = 0; d < kDraws; ++d) {
      std::vector<std::string> shuffled = subjects;
      for (std::size_t i = shuffled.size() - 1; i > 0; --i) std::swap(shuffled[i], shuffled[rng() % (i + 1)]);
      const std::vector<std::string> pred(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(k));
      const std::vector<std::string> rest(shuffled.begin() + static_cast<std::ptrdiff_t>(k), shuffled.end());
      const auto v = score_split(pred, rest, rng());
      for (std::size_t m = 0; m < kMetrics.size(); ++m) vals[m].push_back(v[m]);
    }
    MetricValues mv;
    for (std::size_t m = 0; m < kMetrics.size(); ++m) mv[m] = nan_mean(vals[m]);
    ks.push_back(static_cast<double>(k));
    means.push_back(mv);
  }
  for (std::size_t m = 0; m < kMetrics.size(); ++m) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (std::isnan(means[i][m])) continue;
      xs.push_back(1.0 / ks[i]);
      ys.push_back(means[i][m]);
    }
    double a = kNaN;
    if (xs.size() == 1) {
      a = ys[0];
    } else if (xs.size() >= 2) {
      const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
      const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
      double sxx = 0.0;
      double sxy = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
      }
      const double b = sxx > 0.0 ? sxy / sxx : 0.0;
      a = my - b * mx;
    }
    out.infinite_humans[m] = clamp_metric(kMetrics[m], a);
  }
  return out;
}

}  // namespace stereosal
