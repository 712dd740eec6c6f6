#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "specknet/dataset.hpp"
#include "specknet/noise.hpp"

namespace specknet {

/// Layered retina-like test image in [0, 255]: curved bands of varying brightness,
/// a foveal dip, vessel shadows and a few dark cyst-like blobs. Rounded to 8-bit values.
ImagePlane make_oct_phantom(int width, int height, std::uint64_t seed);

struct CorpusConfig {
  int count = 6;
  int width = 256;
  int height = 256;
  std::uint64_t seed = 7;
  SpeckleSpec speckle{};  ///< speckle.seed is used as the base of per-image seeds
  /// When set, every 8-bit PNG/TIFF in this directory (sorted by name, id = file stem) is a
  /// clean reference instead of a phantom; count, width and height are then unused.
  std::filesystem::path source_dir;
};

/// Clean phantoms (or source_dir images) paired with speckled, 8-bit quantised noisy observations (ids "img00", "img01", ...).
std::vector<SourceImage> make_synthetic_corpus(const CorpusConfig& cfg);

/// Writes clean/noisy PNGs and manifest.txt into `dir`; returns the manifest path.
std::filesystem::path write_synthetic_corpus(const CorpusConfig& cfg, const std::filesystem::path& dir);

}  // namespace specknet
