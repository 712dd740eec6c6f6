#include "specknet/transforms.hpp"

#include <cmath>

#include "specknet/errors.hpp"

namespace specknet {

namespace {

constexpr double kThreeEighths = 3.0 / 8.0;

}  // namespace

std::string_view to_string(InverseMode m) {
  switch (m) {
    case InverseMode::Algebraic: return "algebraic";
    case InverseMode::Asymptotic: return "asymptotic";
    case InverseMode::ClosedFormUnbiased: return "closed-form-unbiased";
  }
  return "closed-form-unbiased";
}

InverseMode inverse_mode_from_string(std::string_view s) {
  if (s == "algebraic") return InverseMode::Algebraic;
  if (s == "asymptotic") return InverseMode::Asymptotic;
  if (s == "closed-form-unbiased") return InverseMode::ClosedFormUnbiased;
  throw ConfigError("unknown inverse Anscombe mode '" + std::string(s) + "'");
}

double anscombe(double x) { return 2.0 * std::sqrt(x + kThreeEighths); }

double inverse_anscombe(double y, InverseMode mode) {
  const double half = 0.5 * y;
  switch (mode) {
    case InverseMode::Algebraic:
      return half * half - kThreeEighths;
    case InverseMode::Asymptotic:
      return half * half - 0.125;
    case InverseMode::ClosedFormUnbiased: {
      const double s = std::sqrt(1.5);
      const double inv = 1.0 / y;
      return half * half + 0.25 * s * inv - 1.375 * inv * inv + 0.625 * s * inv * inv * inv -
             0.125;
    }
  }
  return half * half - kThreeEighths;
}

ValueRange anscombe_pixel_range() { return {anscombe(0.0), anscombe(255.0)}; }

ImagePlane anscombe_forward(const ImagePlane& img) {
  img.require_domain(Domain::PixelU8Range, "anscombe_forward");
  ImagePlane out(img.width(), img.height(), Domain::Anscombe);
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (!(img[i] >= 0.0)) {
      throw DomainError("anscombe_forward: negative sample " + std::to_string(img[i]) +
                        " at pixel index " + std::to_string(i));
    }
    out[i] = anscombe(img[i]);
  }
  return out;
}

ImagePlane anscombe_inverse(const ImagePlane& img, InverseMode mode) {
  img.require_domain(Domain::Anscombe, "anscombe_inverse");
  ImagePlane out(img.width(), img.height(), Domain::PixelU8Range);
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (mode == InverseMode::ClosedFormUnbiased && !(img[i] > 0.0)) {
      throw DomainError("anscombe_inverse: nonpositive sample " + std::to_string(img[i]) +
                        " at pixel index " + std::to_string(i));
    }
    out[i] = inverse_anscombe(img[i], mode);
  }
  return out;
}

ImagePlane affine_rescale(const ImagePlane& img, ValueRange src, ValueRange dst) {
  src.validate();
  dst.validate();
  const double gain = dst.span() / src.span();
  ImagePlane out(img.width(), img.height(), img.domain());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = (img[i] - src.lo) * gain + dst.lo;
  return out;
}

ImagePlane to_rescaled(const ImagePlane& anscombe_img) {
  anscombe_img.require_domain(Domain::Anscombe, "to_rescaled");
  return affine_rescale(anscombe_img, anscombe_pixel_range(), rescaled_range())
      .retagged(Domain::AnscombeRescaled);
}

ImagePlane from_rescaled(const ImagePlane& rescaled_img) {
  rescaled_img.require_domain(Domain::AnscombeRescaled, "from_rescaled");
  return affine_rescale(rescaled_img, rescaled_range(), anscombe_pixel_range())
      .retagged(Domain::Anscombe);
}

ImagePlane pixel_to_rescaled(const ImagePlane& pixel_img) {
  return to_rescaled(anscombe_forward(pixel_img));
}

}  // namespace specknet
