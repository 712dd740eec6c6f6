#include "specknet/inference.hpp"

#include <algorithm>
#include <chrono>

#include "specknet/errors.hpp"

namespace specknet {

void InferenceConfig::validate(int unet_depth) const {
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (tile_size < 0) throw ConfigError("tile_size must be nonnegative");
  if (tile_overlap < 0) throw ConfigError("tile_overlap must be nonnegative");
  if (tile_size > 0) {
    if (tile_overlap >= tile_size) throw ConfigError("tile_overlap must be smaller than tile_size");
    if (unet_depth >= 0 && tile_size % (1 << unet_depth) != 0) {
      throw ConfigError("tile_size " + std::to_string(tile_size) + " is not divisible by 2^" +
                        std::to_string(unet_depth));
    }
  }
}

std::vector<int> tile_starts(int extent, int tile, int overlap) {
  if (tile < 1 || overlap < 0 || overlap >= tile) {
    throw ConfigError("tile overlap " + std::to_string(overlap) + " must be in [0, " +
                      std::to_string(tile) + ")");
  }
  if (extent < tile) throw ConfigError("extent smaller than tile");
  const int step = tile - overlap;
  std::vector<int> starts;
  for (int s = 0; s + tile < extent; s += step) starts.push_back(s);
  if (starts.empty() || starts.back() != extent - tile) starts.push_back(extent - tile);
  return starts;
}

double feather_weight(int i, int tile, int overlap) {
  const double ramp = static_cast<double>(overlap + 1);
  return std::min({1.0, (i + 1) / ramp, (tile - i) / ramp});
}

namespace {

template <class Visit>
ImagePlane blend(const ImagePlane& padded, int tile, int overlap, Visit&& visit) {
  const auto rows = tile_starts(padded.height(), tile, overlap);
  const auto cols = tile_starts(padded.width(), tile, overlap);
  std::vector<double> profile(static_cast<std::size_t>(tile));
  for (int i = 0; i < tile; ++i) profile[i] = feather_weight(i, tile, overlap);
  ImagePlane acc(padded.width(), padded.height(), padded.domain());
  ImagePlane mass(padded.width(), padded.height(), Domain::Arbitrary);
  for (int r0 : rows) {
    for (int c0 : cols) {
      const ImagePlane out = visit(padded.crop(r0, c0, tile, tile));
      for (int r = 0; r < tile; ++r) {
        for (int c = 0; c < tile; ++c) {
          const double w = profile[r] * profile[c];
          acc.at(r0 + r, c0 + c) += w * out.at(r, c);
          mass.at(r0 + r, c0 + c) += w;
        }
      }
    }
  }
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] /= mass[i];
  return acc;
}

}  // namespace

ImagePlane tile_process(const PatchFunction& fn, const ImagePlane& img, int tile_size, int overlap) {
  if (tile_size < 1) throw ConfigError("tile_size must be positive");
  if (overlap < 0 || overlap >= tile_size) {
    throw ConfigError("tile_overlap must be in [0, tile_size)");
  }
  if (img.height() == tile_size && img.width() == tile_size) return fn(img);
  const ImagePlane padded = reflect_pad_to(img, tile_size, tile_size);
  const ImagePlane out = blend(padded, tile_size, overlap, fn);
  if (padded.same_shape(img)) return out;
  return out.crop(0, 0, img.height(), img.width());
}

ImagePlane tile_process(const UNet<float>& net, const ImagePlane& img, int tile_size, int overlap) {
  return tile_process([&](const ImagePlane& t) { return net.predict(t); }, img, tile_size, overlap);
}

ImagePlane blend_partition(int height, int width, int tile_size, int overlap) {
  const ImagePlane ones(width, height, Domain::Arbitrary, 1.0);
  const ImagePlane padded = reflect_pad_to(ones, tile_size, tile_size);
  const auto rows = tile_starts(padded.height(), tile_size, overlap);
  const auto cols = tile_starts(padded.width(), tile_size, overlap);
  ImagePlane mass(padded.width(), padded.height(), Domain::Arbitrary);
  for (int r0 : rows) {
    for (int c0 : cols) {
      for (int r = 0; r < tile_size; ++r) {
        for (int c = 0; c < tile_size; ++c) {
          mass.at(r0 + r, c0 + c) +=
              feather_weight(r, tile_size, overlap) * feather_weight(c, tile_size, overlap);
        }
      }
    }
  }
  ImagePlane unity(padded.width(), padded.height(), Domain::Arbitrary);
  for (int r0 : rows) {
    for (int c0 : cols) {
      for (int r = 0; r < tile_size; ++r) {
        for (int c = 0; c < tile_size; ++c) {
          const double w =
              feather_weight(r, tile_size, overlap) * feather_weight(c, tile_size, overlap);
          unity.at(r0 + r, c0 + c) += w / mass.at(r0 + r, c0 + c);
        }
      }
    }
  }
  return unity.crop(0, 0, height, width);
}

ImagePlane rescaled_to_pixels(const ImagePlane& rescaled, InverseMode mode) {
  ImagePlane ans = from_rescaled(rescaled);
  const double floor = anscombe_pixel_range().lo;
  for (double& v : ans.data()) v = std::max(v, floor);
  ImagePlane px = anscombe_inverse(ans, mode);
  for (double& v : px.data()) v = std::clamp(v, 0.0, 255.0);
  return px;
}

DenoiseResult denoise_with_trace(const TrainedModel& model, const ImagePlane& noisy,
                                 const InferenceConfig& icfg) {
  InferenceConfig cfg = icfg;
  if (cfg.tile_size == 0) cfg.tile_size = model.patch_size;
  cfg.validate(model.unet.depth);
  const auto t0 = std::chrono::steady_clock::now();
  const UNet<float> net = model.network();
  ImagePlane x = pixel_to_rescaled(noisy);
  DenoiseResult result;
  for (int k = 1; k <= cfg.iterations; ++k) {
    x = tile_process(net, x, cfg.tile_size, cfg.tile_overlap);
    try {
      x.require_finite("denoise");
    } catch (const NumericError&) {
      throw NumericError("denoise: non-finite network output at iteration " + std::to_string(k));
    }
    result.iterations.push_back(rescaled_to_pixels(x, cfg.inverse_mode));
  }
  result.output = result.iterations.back();
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

ImagePlane denoise(const TrainedModel& model, const ImagePlane& noisy, const InferenceConfig& icfg) {
  return denoise_with_trace(model, noisy, icfg).output;
}

}  // namespace specknet
