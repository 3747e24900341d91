#pragma once

#include "stereosal/raster.hpp"

namespace stereosal {

struct ShapingConfig {
  bool apply_compactness = true;
  bool apply_size_filter = true;
  bool apply_sparsity = true;
};

/// Defaults for detector box maps: masks on, sparsity off.
inline ShapingConfig high_level_shaping() { return {true, true, false}; }

/// normalize01(f * compactness * size_mask), then the sparsity projection when
/// enabled. Disabled masks are skipped.
RasterMap shape_feature(const RasterMap& f, const RasterMap& compactness, const RasterMap& size_mask,
                        const ShapingConfig& cfg = {});

}  // namespace stereosal
