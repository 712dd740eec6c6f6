#pragma once

#include "specknet/image.hpp"

namespace specknet {

enum class InverseMode { Algebraic, Asymptotic, ClosedFormUnbiased };

std::string_view to_string(InverseMode m);
InverseMode inverse_mode_from_string(std::string_view s);

double anscombe(double x);
double inverse_anscombe(double y, InverseMode mode);

/// Output range of the forward transform on [0, 255]: [2*sqrt(3/8), 2*sqrt(255.375)].
ValueRange anscombe_pixel_range();
/// Target range of the AnscombeRescaled domain.
inline ValueRange rescaled_range() { return {0.0, 255.0}; }

/// 2*sqrt(x + 3/8) per sample. Requires PixelU8Range and nonnegative samples.
ImagePlane anscombe_forward(const ImagePlane& img);

/// Inverse transform; ClosedFormUnbiased is the closed-form approximation of the
/// exact unbiased inverse and requires strictly positive input.
ImagePlane anscombe_inverse(const ImagePlane& img, InverseMode mode = InverseMode::ClosedFormUnbiased);

/// (x - src.lo) * dst.span / src.span + dst.lo. The domain tag is carried over unchanged.
ImagePlane affine_rescale(const ImagePlane& img, ValueRange src, ValueRange dst);

/// Anscombe -> AnscombeRescaled using anscombe_pixel_range() -> rescaled_range().
ImagePlane to_rescaled(const ImagePlane& anscombe_img);
/// AnscombeRescaled -> Anscombe.
ImagePlane from_rescaled(const ImagePlane& rescaled_img);

/// Pixel image straight to the training domain.
ImagePlane pixel_to_rescaled(const ImagePlane& pixel_img);

}  // namespace specknet
