#pragma once

#include <cstdint>
#include <optional>

#include "specknet/image.hpp"

namespace specknet {

/// Standard deviations of the two synthetic Gaussian layers, in AnscombeRescaled units.
struct NoiseSpec {
  double sigma1 = 50.0;
  double sigma2 = 50.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// x_ans, its noisier version y = x_ans + M1 and the noisier+ version z = y + M2.
struct NoisyTriple {
  ImagePlane x_ans;
  ImagePlane y_noisier;
  ImagePlane z_noisier_plus;
  /// Noise realisations, kept only when requested.
  std::optional<ImagePlane> m1;
  std::optional<ImagePlane> m2;
};

/// Multiplicative Gamma speckle. With normalize_mean the scale is forced to 1/shape so E[G] = 1.
struct SpeckleSpec {
  double shape = 4.0;
  double scale = 0.25;
  std::uint64_t seed = 0;
  bool normalize_mean = true;

  void validate() const;
  double effective_scale() const { return normalize_mean ? 1.0 / shape : scale; }
};

/// i.i.d. N(0, sigma^2) field tagged Arbitrary.
ImagePlane gaussian_field(int width, int height, double sigma, std::uint64_t seed);

/// img + N(0, sigma^2) per pixel; keeps the domain tag.
ImagePlane add_gaussian(const ImagePlane& img, double sigma, std::uint64_t seed);

/// M1 is drawn from spec.seed and M2 from spec.seed ^ kSecondNoiseSalt.
NoisyTriple make_noisy_triple(const ImagePlane& x_ans, const NoiseSpec& spec,
                              bool retain_noise = false);

/// i.i.d. Gamma(shape, scale) field; every sample is strictly positive.
ImagePlane gamma_field(int width, int height, const SpeckleSpec& spec);

/// clean x G. Output is not clamped (clamping happens on export).
ImagePlane apply_speckle(const ImagePlane& clean, const SpeckleSpec& spec);

}  // namespace specknet
