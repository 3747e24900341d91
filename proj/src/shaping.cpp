#include "stereosal/shaping.hpp"

#include "stereosal/imaging.hpp"

namespace stereosal {

RasterMap shape_feature(const RasterMap& f, const RasterMap& compactness, const RasterMap& size_mask,
                        const ShapingConfig& cfg) {
  RasterMap out = f;
  if (cfg.apply_compactness) out = multiply(out, compactness);
  if (cfg.apply_size_filter) out = multiply(out, size_mask);
  out = normalize01(out);
  if (cfg.apply_sparsity) out = sparsity_project(out);
  return out;
}

}  // namespace stereosal
