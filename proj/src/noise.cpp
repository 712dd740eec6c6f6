#include "specknet/noise.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "specknet/errors.hpp"
#include "specknet/rng.hpp"

namespace specknet {

void NoiseSpec::validate() const {
  if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0) || !std::isfinite(sigma1) || !std::isfinite(sigma2)) {
    throw ConfigError("noise sigmas must be finite and nonnegative");
  }
}

void SpeckleSpec::validate() const {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
    throw ConfigError("speckle shape and scale must be positive");
  }
}

ImagePlane gaussian_field(int width, int height, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("gaussian noise sigma must be finite and nonnegative, got " +
                      std::to_string(sigma));
  }
  ImagePlane field(width, height, Domain::Arbitrary);
  if (sigma == 0.0) return field;
  Rng rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  for (double& v : field.data()) v = dist(rng);
  return field;
}

ImagePlane add_gaussian(const ImagePlane& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("gaussian noise sigma must be finite and nonnegative, got " +
                      std::to_string(sigma));
  }
  if (sigma == 0.0) return img;
  const ImagePlane field = gaussian_field(img.width(), img.height(), sigma, seed);
  ImagePlane out = img;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += field[i];
  return out;
}

NoisyTriple make_noisy_triple(const ImagePlane& x_ans, const NoiseSpec& spec, bool retain_noise) {
  x_ans.require_domain(Domain::AnscombeRescaled, "make_noisy_triple");
  spec.validate();
  const ImagePlane m1 = gaussian_field(x_ans.width(), x_ans.height(), spec.sigma1, spec.seed);
  const ImagePlane m2 =
      gaussian_field(x_ans.width(), x_ans.height(), spec.sigma2, spec.seed ^ kSecondNoiseSalt);
  NoisyTriple t{x_ans, x_ans, x_ans, std::nullopt, std::nullopt};
  for (std::size_t i = 0; i < x_ans.size(); ++i) {
    t.y_noisier[i] = x_ans[i] + m1[i];
    t.z_noisier_plus[i] = t.y_noisier[i] + m2[i];
  }
  if (retain_noise) {
    t.m1 = m1;
    t.m2 = m2;
  }
  return t;
}

ImagePlane gamma_field(int width, int height, const SpeckleSpec& spec) {
  spec.validate();
  ImagePlane field(width, height, Domain::Arbitrary);
  Rng rng(spec.seed);
  std::gamma_distribution<double> dist(spec.shape, spec.effective_scale());
  for (double& v : field.data()) {
    double g = dist(rng);
    // Gamma draws can underflow to 0 for tiny shapes; keep the field strictly positive.
    v = g > 0.0 ? g : std::numeric_limits<double>::min();
  }
  return field;
}

ImagePlane apply_speckle(const ImagePlane& clean, const SpeckleSpec& spec) {
  clean.require_domain(Domain::PixelU8Range, "apply_speckle");
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (!(clean[i] >= 0.0)) {
      throw DomainError("apply_speckle: negative sample at pixel index " + std::to_string(i));
    }
  }
  const ImagePlane g = gamma_field(clean.width(), clean.height(), spec);
  ImagePlane out = clean;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= g[i];
  return out;
}

}  // namespace specknet
