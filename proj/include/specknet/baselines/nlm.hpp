#pragma once

#include "specknet/image.hpp"

namespace specknet::baselines {

struct NlmParams {
  int patch_radius = 2;
  int search_radius = 5;
  double h = 30.0;
};

/// Non-local means. Patch distances are mean squared differences over (2r+1)^2 samples with
/// reflected borders; weights exp(-d^2 / h^2) over the in-image search window.
ImagePlane nlm(const ImagePlane& img, const NlmParams& params);

}  // namespace specknet::baselines
