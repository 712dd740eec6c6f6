#pragma once

#include "specknet/image.hpp"

namespace specknet::baselines {

struct Bm3dParams {
  double sigma = 25.0;
  bool enabled = true;
  int block_size = 8;
  int step = 4;
  int search_radius = 12;
  int max_group = 16;
};

/// Whether the grouped collaborative-filtering baseline was compiled in.
bool bm3d_available();

/// Two-stage block matching with collaborative 3-D filtering: hard thresholding in a
/// separable DCT x Walsh-Hadamard domain, then empirical Wiener filtering guided by the
/// first estimate; overlapping block estimates are aggregated with their stage weights.
/// Throws CapabilityError when disabled.
ImagePlane bm3d(const ImagePlane& img, const Bm3dParams& params);

}  // namespace specknet::baselines
