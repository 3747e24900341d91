#pragma once

#include <vector>

#include "stereosal/raster.hpp"

namespace stereosal {

struct TransportResult {
  double cost = 0.0;
  int pivots = 0;
  bool optimal = true;  ///< false if the pivot cap was hit
};

/// Balanced transportation problem min sum c_ij f_ij subject to row sums =
/// supply and column sums = demand, solved with the transportation simplex
/// (north-west corner start, spanning-tree basis, block pricing). `cost` is
/// row-major supply.size() x demand.size(). Totals must agree to 1e-9 relative.
TransportResult solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                                const std::vector<double>& cost);

/// Earth mover's distance between two maps on the same grid, each rescaled
/// to unit mass, with Euclidean ground distance in cell units. Shared mass
/// is cancelled first.
double emd_grid(const RasterMap& a, const RasterMap& b);

/// Area-downsamples both maps to at most `grid` cells per side, then emd_grid.
double emd(const RasterMap& a, const RasterMap& b, int grid = 32);

}  // namespace stereosal
