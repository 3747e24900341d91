#include "stereosal/fusion.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "stereosal/imaging.hpp"

namespace stereosal {

namespace {

std::vector<std::size_t> stack_columns(const ForestModel& model) {
  std::vector<std::size_t> cols;
  for (const auto& name : model.feature_names) {
    const auto id = parse_feature(name);
    if (!id || feature_name(*id) != name) throw Error("model feature '" + name + "' is not a known stack feature");
    cols.push_back(static_cast<std::size_t>(*id));
  }
  return cols;
}

void require_maps(const std::vector<RasterMap>& maps, const char* what) {
  if (maps.empty()) throw Error(std::string(what) + ": no maps to fuse");
  for (const auto& m : maps) require_same_dims(m.dims(), maps.front().dims(), what);
}

}  // namespace

RasterMap predict_raw(const ForestModel& model, const FeatureStack& stack) {
  if (model.trees.empty()) throw Error("predict: model has no trees");
  const auto cols = stack_columns(model);
  RasterMap out(stack.dims);
  std::vector<double> row(cols.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t k = 0; k < cols.size(); ++k) row[k] = stack.maps[cols[k]][i];
    out[i] = model.predict(row.data());
  }
  return out;
}

RasterMap predict(const ForestModel& model, const FeatureStack& stack) { return normalize01(predict_raw(model, stack)); }

std::string to_string(FusionScheme s) {
  switch (s) {
    case FusionScheme::Forest: return "forest";
    case FusionScheme::Average: return "average";
    case FusionScheme::Multiplication: return "multiplication";
    case FusionScheme::Maximum: return "maximum";
    case FusionScheme::SpP: return "spp";
    case FusionScheme::Gnlns: return "gnlns";
    case FusionScheme::Lmswa: return "lmswa";
    case FusionScheme::Sdw: return "sdw";
  }
  return "unknown";
}

FusionScheme parse_fusion_scheme(const std::string& name) {
  for (auto s : {FusionScheme::Forest, FusionScheme::Average, FusionScheme::Multiplication, FusionScheme::Maximum,
                 FusionScheme::SpP, FusionScheme::Gnlns, FusionScheme::Lmswa, FusionScheme::Sdw}) {
    if (to_string(s) == name) return s;
  }
  throw Error("unknown fusion scheme '" + name + "'");
}

const std::vector<FusionScheme>& baseline_schemes() {
  static const std::vector<FusionScheme> s{FusionScheme::Average, FusionScheme::Multiplication, FusionScheme::Maximum,
                                           FusionScheme::SpP,     FusionScheme::Gnlns,          FusionScheme::Lmswa,
                                           FusionScheme::Sdw};
  return s;
}

double mean_local_maxima(const RasterMap& m) {
  const int w = m.width();
  const int h = m.height();
  const auto peak_it = std::max_element(m.values().begin(), m.values().end());
  const auto peak_idx = static_cast<std::size_t>(peak_it - m.values().begin());
  double sum = 0.0;
  int count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = m.at(x, y);
      bool strict = true;
      for (int dy = -1; dy <= 1 && strict; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || x + dx < 0 || y + dy < 0 || x + dx >= w || y + dy >= h) continue;
          if (!(v > m.at(x + dx, y + dy))) {
            strict = false;
            break;
          }
        }
      }
      if (strict && m.index(x, y) != peak_idx) {
        sum += v;
        ++count;
      }
    }
  }
  return count ? sum / count : 0.0;
}

double gnlns_weight(const RasterMap& m) {
  const double peak = *std::max_element(m.values().begin(), m.values().end());
  const double d = peak - mean_local_maxima(m);
  return d * d;
}

std::vector<double> nnls(const std::vector<double>& gram, const std::vector<double>& rhs, std::size_t n) {
  if (gram.size() != n * n || rhs.size() != n) throw Error("nnls: inconsistent sizes");
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> g(gram.data(),
                                                                                                  static_cast<Eigen::Index>(n),
                                                                                                  static_cast<Eigen::Index>(n));
  const Eigen::Map<const Eigen::VectorXd> h(rhs.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff());

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> p;
    for (std::size_t i = 0; i < n; ++i) {
      if (passive[i]) p.push_back(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXd gp(p.size(), p.size());
    Eigen::VectorXd hp(p.size());
    for (std::size_t a = 0; a < p.size(); ++a) {
      hp(static_cast<Eigen::Index>(a)) = h(p[a]);
      for (std::size_t b = 0; b < p.size(); ++b) gp(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = g(p[a], p[b]);
    }
    const Eigen::VectorXd zp = gp.completeOrthogonalDecomposition().solve(hp);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < p.size(); ++a) z(p[a]) = zp(static_cast<Eigen::Index>(a));
    return z;
  };

  for (std::size_t outer = 0; outer < 3 * n + 3; ++outer) {
    const Eigen::VectorXd grad = h - g * x;
    Eigen::Index best = -1;
    double best_v = tol;
    for (std::size_t i = 0; i < n; ++i) {
      if (!passive[i] && grad(static_cast<Eigen::Index>(i)) > best_v) {
        best_v = grad(static_cast<Eigen::Index>(i));
        best = static_cast<Eigen::Index>(i);
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (std::size_t inner = 0; inner < 3 * n + 3; ++inner) {
      const Eigen::VectorXd z = solve_passive();
      bool feasible = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (passive[i] && z(static_cast<Eigen::Index>(i)) <= 0.0) feasible = false;
      }
      if (feasible) {
        x = z;
        break;
      }
      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        if (passive[i] && z(k) <= 0.0) alpha = std::min(alpha, x(k) / (x(k) - z(k)));
      }
      x += alpha * (z - x);
      for (std::size_t i = 0; i < n; ++i) {
        if (passive[i] && x(static_cast<Eigen::Index>(i)) <= tol) {
          passive[i] = false;
          x(static_cast<Eigen::Index>(i)) = 0.0;
        }
      }
    }
  }
  return {x.data(), x.data() + n};
}

std::vector<double> fit_lmswa_weights(const std::vector<std::vector<RasterMap>>& frames,
                                      const std::vector<RasterMap>& targets) {
  if (frames.empty() || frames.size() != targets.size()) throw Error("lmswa: targets are required for every frame");
  const std::size_t p = frames.front().size();
  if (p == 0) throw Error("lmswa: no maps");
  std::vector<double> gram(p * p, 0.0);
  std::vector<double> rhs(p, 0.0);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (frames[f].size() != p) throw Error("lmswa: inconsistent map count");
    for (const auto& m : frames[f]) require_same_dims(m.dims(), targets[f].dims(), "lmswa");
    for (std::size_t i = 0; i < targets[f].size(); ++i) {
      for (std::size_t a = 0; a < p; ++a) {
        const double va = frames[f][a][i];
        rhs[a] += va * targets[f][i];
        for (std::size_t b = 0; b < p; ++b) gram[a * p + b] += va * frames[f][b][i];
      }
    }
  }
  return nnls(gram, rhs, p);
}

RasterMap fuse_baseline(const std::vector<RasterMap>& maps, FusionScheme scheme, const std::vector<double>* weights) {
  require_maps(maps, "fuse_baseline");
  const Dims dims = maps.front().dims();
  const std::size_t n = maps.front().size();
  RasterMap out(dims, 0.0);
  auto weighted = [&](const std::vector<double>& w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(total > 0.0)) return out;
    for (std::size_t k = 0; k < maps.size(); ++k) {
      for (std::size_t i = 0; i < n; ++i) out[i] += w[k] * maps[k][i] / total;
    }
    return out;
  };
  switch (scheme) {
    case FusionScheme::Average:
      for (const auto& m : maps) {
        for (std::size_t i = 0; i < n; ++i) out[i] += m[i] / static_cast<double>(maps.size());
      }
      return out;
    case FusionScheme::Multiplication:
      out = RasterMap(dims, 1.0);
      for (const auto& m : maps) out = multiply(out, m);
      return out;
    case FusionScheme::Maximum:
      out = maps.front();
      for (const auto& m : maps) {
        for (std::size_t i = 0; i < n; ++i) out[i] = std::max(out[i], m[i]);
      }
      return out;
    case FusionScheme::SpP: {
      RasterMap prod(dims, 1.0);
      for (const auto& m : maps) {
        prod = multiply(prod, m);
        for (std::size_t i = 0; i < n; ++i) out[i] += m[i];
      }
      for (std::size_t i = 0; i < n; ++i) out[i] += prod[i];
      return normalize01(out);
    }
    case FusionScheme::Gnlns:
      for (const auto& m : maps) {
        const double w = gnlns_weight(m);
        for (std::size_t i = 0; i < n; ++i) out[i] += w * m[i];
      }
      return out;
    case FusionScheme::Lmswa:
      if (!weights) throw Error("lmswa fusion requires fitted weights (targets)");
      if (weights->size() != maps.size()) throw Error("lmswa: weight count does not match map count");
      return weighted(*weights);
    case FusionScheme::Sdw: {
      std::vector<double> w;
      for (const auto& m : maps) {
        const auto st = map_stats(m);
        w.push_back(st.stddev > 1e-12 * std::max(1.0, std::abs(st.mean)) ? st.stddev : 0.0);
      }
      return weighted(w);
    }
    case FusionScheme::Forest: throw Error("forest fusion needs a trained model; use predict()");
  }
  throw Error("unknown fusion scheme");
}

SampledTraining sample_training(const std::vector<VideoFrames>& videos, int frames_per_video, int pixels_per_frame,
                                std::uint64_t seed, const FeatureMask& features) {
  if (frames_per_video < 0 || pixels_per_frame < 0) throw Error("sample_training: counts must be non-negative");
  SampledTraining out;
  std::vector<std::size_t> cols;
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    if (features.test(k)) {
      cols.push_back(k);
      out.set.feature_names.push_back(feature_names()[k]);
    }
  }
  std::vector<double> row(cols.size());
  for (std::size_t v = 0; v < videos.size(); ++v) {
    const auto& video = videos[v];
    const int frames = std::min(frames_per_video, video.frame_count);
    for (int f = 0; f < frames; ++f) {
      if (!video.target) throw Error("sample_training: video " + video.name + " has no fixation targets");
      const RasterMap target = normalize01(video.target(f));
      const FeatureStack stack = video.features(f);
      require_same_dims(stack.dims, target.dims(), "sample_training");
      const std::size_t n = target.size();
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return target[a] > target[b]; });
      const std::size_t top = std::max<std::size_t>(1, (n + 9) / 10);
      std::mt19937_64 rng(splitmix64(seed ^ splitmix64(v * 0x100000001B3ULL + static_cast<std::uint64_t>(f))));
      for (int k = 0; k < pixels_per_frame; ++k) {
        const std::size_t pixel = k < pixels_per_frame / 2 ? order[rng() % top] : static_cast<std::size_t>(rng() % n);
        for (std::size_t c = 0; c < cols.size(); ++c) row[c] = stack.maps[cols[c]][pixel];
        out.set.add(row, target[pixel]);
        out.provenance.push_back({video.name, f, static_cast<int>(pixel % static_cast<std::size_t>(stack.dims.width)),
                                  static_cast<int>(pixel / static_cast<std::size_t>(stack.dims.width))});
      }
    }
  }
  return out;
}

}  // namespace stereosal
