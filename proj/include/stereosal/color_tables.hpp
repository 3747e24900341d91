#pragma once

#include <array>
#include <filesystem>
#include <vector>

namespace stereosal {

/// A spectral (monochromatic) color rendered to 8-bit sRGB together with its
/// wavelength and relative photopic sensitivity (peak 1).
struct SpectralEntry {
  std::array<double, 3> rgb;
  double wavelength_nm;
  double sensitivity;
};

struct EmpiricalColor {
  std::array<double, 3> rgb;
  double probability;
};

using SpectralTable = std::vector<SpectralEntry>;
using EmpiricalTable = std::vector<EmpiricalColor>;

/// CIE 1931 color matching functions, multi-lobe piecewise-Gaussian fit.
std::array<double, 3> cie_xyz_bar(double wavelength_nm);

/// 400..700 nm in 10 nm steps. Sensitivity is the photopic luminous
/// efficiency from the y-bar fit, rescaled to peak 1 over the grid.
SpectralTable default_spectral_table();

/// Ranked 12-color table. Placeholder values; edit data/empirical_colors.csv.
EmpiricalTable default_empirical_table();

/// CSV with header; columns r,g,b,wavelength_nm,sensitivity.
SpectralTable load_spectral_table(const std::filesystem::path& path);
void save_spectral_table(const std::filesystem::path& path, const SpectralTable& table);

/// CSV with header; columns r,g,b,probability. Warns unless there are 12 rows.
EmpiricalTable load_empirical_table(const std::filesystem::path& path);

}  // namespace stereosal
