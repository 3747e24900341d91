#include "stereosal/color_tables.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "stereosal/raster.hpp"

namespace stereosal {

namespace {

double lobe(double lambda, double mu, double s_lo, double s_hi) {
  const double t = (lambda - mu) / (lambda < mu ? s_lo : s_hi);
  return std::exp(-0.5 * t * t);
}

double srgb_encode(double c) {
  c = std::clamp(c, 0.0, 1.0);
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

std::array<double, 3> spectral_rgb(double lambda) {
  const auto [x, y, z] = cie_xyz_bar(lambda);
  std::array<double, 3> lin{3.2404542 * x - 1.5371385 * y - 0.4985314 * z,
                            -0.9692660 * x + 1.8760108 * y + 0.0415560 * z,
                            0.0556434 * x - 0.2040259 * y + 1.0572252 * z};
  // Out-of-gamut: desaturate towards white, then bring to full intensity.
  const double lo = std::min({lin[0], lin[1], lin[2]});
  if (lo < 0.0) {
    for (auto& c : lin) c -= lo;
  }
  const double hi = std::max({lin[0], lin[1], lin[2]});
  std::array<double, 3> rgb{};
  for (std::size_t c = 0; c < 3; ++c) rgb[c] = std::round(255.0 * srgb_encode(hi > 0 ? lin[c] / hi : 0.0));
  return rgb;
}

std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open table: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (std::any_of(line.begin(), line.end(), [](unsigned char c) { return std::isalpha(c) && c != 'e' && c != 'E'; })) {
      continue;  // header
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::vector<double> row;
    double v = 0.0;
    while (fields >> v) row.push_back(v);
    if (row.size() != columns) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) + " columns");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::array<double, 3> cie_xyz_bar(double l) {
  const double x = 1.056 * lobe(l, 599.8, 37.9, 31.0) + 0.362 * lobe(l, 442.0, 16.0, 26.7) -
                   0.065 * lobe(l, 501.1, 20.4, 26.2);
  const double y = 0.821 * lobe(l, 568.8, 46.9, 40.5) + 0.286 * lobe(l, 530.9, 16.3, 31.1);
  const double z = 1.217 * lobe(l, 437.0, 11.8, 36.0) + 0.681 * lobe(l, 459.0, 26.0, 13.8);
  return {x, y, z};
}

SpectralTable default_spectral_table() {
  SpectralTable table;
  double peak = 0.0;
  for (int l = 400; l <= 700; l += 10) {
    const double v = cie_xyz_bar(l)[1];
    peak = std::max(peak, v);
    table.push_back({spectral_rgb(l), static_cast<double>(l), v});
  }
  for (auto& e : table) e.sensitivity /= peak;
  return table;
}

EmpiricalTable default_empirical_table() {
  return {{{255, 0, 0}, 0.90},     {{255, 255, 0}, 0.82},   {{255, 128, 0}, 0.76},  {{255, 0, 255}, 0.70},
          {{0, 255, 0}, 0.62},     {{0, 255, 255}, 0.55},   {{0, 0, 255}, 0.49},    {{128, 0, 128}, 0.43},
          {{255, 192, 203}, 0.37}, {{139, 69, 19}, 0.31},   {{255, 255, 255}, 0.25}, {{128, 128, 128}, 0.18}};
}

SpectralTable load_spectral_table(const std::filesystem::path& path) {
  SpectralTable table;
  for (const auto& r : read_csv_rows(path, 5)) table.push_back({{r[0], r[1], r[2]}, r[3], r[4]});
  if (table.empty()) throw Error("spectral table is empty: " + path.string());
  return table;
}

void save_spectral_table(const std::filesystem::path& path, const SpectralTable& table) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write table: " + path.string());
  out << "r,g,b,wavelength_nm,sensitivity\n";
  for (const auto& e : table) {
    out << e.rgb[0] << ',' << e.rgb[1] << ',' << e.rgb[2] << ',' << e.wavelength_nm << ',' << e.sensitivity << '\n';
  }
}

EmpiricalTable load_empirical_table(const std::filesystem::path& path) {
  EmpiricalTable table;
  for (const auto& r : read_csv_rows(path, 4)) table.push_back({{r[0], r[1], r[2]}, r[3]});
  if (table.empty()) throw Error("empirical color table is empty: " + path.string());
  if (table.size() != 12) {
    spdlog::warn("empirical color table {} has {} rows, expected 12", path.string(), table.size());
  }
  return table;
}

}  // namespace stereosal
