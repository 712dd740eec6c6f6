#pragma once

#include <functional>
#include <vector>

#include "specknet/trainer.hpp"
#include "specknet/transforms.hpp"

namespace specknet {

struct InferenceConfig {
  int iterations = 2;
  int tile_size = 0;  ///< 0 selects the model's training patch size
  int tile_overlap = 32;
  InverseMode inverse_mode = InverseMode::ClosedFormUnbiased;

  void validate(int unet_depth) const;
  friend bool operator==(const InferenceConfig&, const InferenceConfig&) = default;
};

using PatchFunction = std::function<ImagePlane(const ImagePlane&)>;

/// Tile origins along one axis of length `extent` (>= tile): 0, step, 2*step, ..., extent - tile.
std::vector<int> tile_starts(int extent, int tile, int overlap);

/// Per-pixel feather weight inside a tile: min(1, (i+1)/(overlap+1), (tile-i)/(overlap+1)) per axis.
double feather_weight(int i, int tile, int overlap);

/// Overlapping tiles processed independently and blended by normalised feather weights
/// (the weights at every pixel sum to one). Images smaller than a tile are reflect-padded and
/// the padding removed afterwards. An image of exactly tile x tile is one direct call of `fn`.
ImagePlane tile_process(const PatchFunction& fn, const ImagePlane& img, int tile_size, int overlap);

/// Same, running the network in float.
ImagePlane tile_process(const UNet<float>& net, const ImagePlane& img, int tile_size, int overlap);

/// Normalised weight mass per pixel, i.e. the sum over tiles of w_t / sum_t w_t. Equals one everywhere.
ImagePlane blend_partition(int height, int width, int tile_size, int overlap);

struct DenoiseResult {
  ImagePlane output;                  ///< final PixelU8Range image, clamped to [0, 255]
  std::vector<ImagePlane> iterations;  ///< pixel-domain output after each pass, clamped
  double seconds = 0.0;
};

/// anscombe_forward -> rescale -> network x iterations (in the rescaled domain) ->
/// inverse rescale -> inverse Anscombe -> clamp.
DenoiseResult denoise_with_trace(const TrainedModel& model, const ImagePlane& noisy,
                                 const InferenceConfig& icfg);

ImagePlane denoise(const TrainedModel& model, const ImagePlane& noisy, const InferenceConfig& icfg);

/// Rescaled-domain result to pixels: inverse rescale, clamp below at the forward transform's
/// minimum 2*sqrt(3/8), inverse Anscombe, clamp to [0, 255].
ImagePlane rescaled_to_pixels(const ImagePlane& rescaled, InverseMode mode);

}  // namespace specknet
