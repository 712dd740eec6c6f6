#pragma once

#include "specknet/image.hpp"

namespace specknet {

struct MetricPair {
  double psnr_db = 0.0;  ///< +inf when the images are identical
  double ssim = 0.0;
};

/// 10*log10(max_val^2 / MSE). Returns +infinity when MSE is zero.
double psnr(const ImagePlane& reference, const ImagePlane& test, double max_val = 255.0);

/// Whole-image single-window SSIM with C1 = (0.01*max_val)^2, C2 = (0.03*max_val)^2
/// and population (1/N) moments.
double ssim(const ImagePlane& reference, const ImagePlane& test, double max_val = 255.0);

MetricPair evaluate_pair(const ImagePlane& reference, const ImagePlane& test, double max_val = 255.0);

double mean_squared_error(const ImagePlane& a, const ImagePlane& b);

}  // namespace specknet
