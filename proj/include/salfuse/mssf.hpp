#pragma once

#include <vector>

#include "salfuse/image.hpp"
#include "salfuse/saliency_map.hpp"
#include "salfuse/superpixel.hpp"

namespace salfuse {

struct ScaleSet {
  std::vector<int> scales{100, 200, 300, 400};
  std::vector<double> weights{1.0, 1.0, 1.0, 1.0};

  /// Throws unless scales are nonempty and strictly increasing, weights are
  /// nonnegative with a positive sum, and the lengths match.
  void validate() const;
};

/// Replaces each pixel by the median of the map over its superpixel. Even
/// counts use the mean of the two middle values.
SaliencyMap superpixel_median_map(const SaliencyMap& s,
                                  const Segmentation& seg);

/// Weighted mean of per-scale superpixel-median maps, computed on the
/// image's own resolution. `s` must already match the image size.
SaliencyMap mssf_refine(const SaliencyMap& s, const Image& srgb,
                        const ScaleSet& scales = {},
                        const SlicParams& slic_defaults = {});

/// Same fusion over precomputed segmentations (one per scale).
SaliencyMap mssf_combine(const SaliencyMap& s,
                         const std::vector<Segmentation>& segs,
                         const std::vector<double>& weights);

}  // namespace salfuse
