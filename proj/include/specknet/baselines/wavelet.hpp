#pragma once

#include <array>
#include <vector>

#include "specknet/image.hpp"

namespace specknet::baselines {

/// Daubechies filter with four vanishing moments (8 taps), analysis low-pass.
const std::array<double, 8>& db4_lowpass();

struct WaveletParams {
  int levels = 3;
  /// Multiplies every BayesShrink threshold; 0 reconstructs the input exactly.
  double threshold_scale = 1.0;
};

/// Multi-level 2-D decomposition with periodic extension. Level k holds (LH, HL, HH) details.
struct WaveletPyramid {
  ImagePlane approximation;
  struct Detail {
    ImagePlane horizontal, vertical, diagonal;
  };
  std::vector<Detail> details;  ///< finest level first
};

/// Requires height and width divisible by 2^levels and every decomposed size >= 8.
WaveletPyramid dwt2(const ImagePlane& img, int levels);
ImagePlane idwt2(const WaveletPyramid& pyramid);

/// median(|HH_1|) / 0.6745 from the finest diagonal subband.
double estimate_noise_sigma(const ImagePlane& img);

/// BayesShrink soft thresholding, threshold sigma^2 / sigma_x per detail subband.
/// Images whose sides are not multiples of 2^levels are reflect-padded and cropped back.
ImagePlane wavelet_bayes_shrink(const ImagePlane& img, const WaveletParams& params);

}  // namespace specknet::baselines
