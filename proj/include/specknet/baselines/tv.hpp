#pragma once

#include "specknet/image.hpp"

namespace specknet::baselines {

struct TvResult {
  ImagePlane image;
  int iterations = 0;
  bool converged = false;
};

/// Chambolle's dual projection for the ROF model min_u |u - f|^2 / 2 + weight * TV(u).
/// Stops when the largest dual update falls below `tol` or after max_iter iterations.
TvResult tv_chambolle(const ImagePlane& img, double weight, int max_iter = 200, double tol = 1e-4);

/// Isotropic total variation with forward differences (zero across the last row/column).
double total_variation(const ImagePlane& img);

}  // namespace specknet::baselines
