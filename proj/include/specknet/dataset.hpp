#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specknet/manifest.hpp"
#include "specknet/noise.hpp"

namespace specknet {

struct PatchConfig {
  int patch_size = 128;
  int total_patches = 1700;
  int n_train = 1500;
  int n_val = 100;
  int n_test = 100;
  std::uint64_t extraction_seed = 0;
  /// Keep clean crops for every split (needed by supervised training and evaluation).
  bool retain_clean = true;

  /// Throws ConfigError on inconsistent counts or a patch side not divisible by 2^unet_depth.
  void validate(int unet_depth) const;
};

struct PatchOrigin {
  int row = 0;
  int col = 0;
  friend bool operator==(const PatchOrigin&, const PatchOrigin&) = default;
};

struct ExtractedPatch {
  ImagePlane patch;
  PatchOrigin origin;
};

/// One patch of a source image with its training triple.
struct PatchEntry {
  NoisyTriple triple;
  ImagePlane noisy;                 ///< pixel-domain noisy crop
  std::optional<ImagePlane> clean;  ///< pixel-domain clean crop from the same origin
  std::string source_id;
  PatchOrigin origin;
  std::size_t patch_index = 0;  ///< position in extraction order, the patch identity
};

struct PatchDataset {
  std::vector<PatchEntry> train;
  std::vector<PatchEntry> val;
  std::vector<PatchEntry> test;

  std::size_t total() const { return train.size() + val.size() + test.size(); }
  /// SHA-256 over split sizes and every patch sample in split order.
  std::string digest() const;
};

/// In-memory source image pair.
struct SourceImage {
  std::string image_id;
  ImagePlane noisy;
  std::optional<ImagePlane> clean;
};

/// `count` distinct origins drawn uniformly; patches are patch_size x patch_size.
std::vector<ExtractedPatch> extract_patches(const ImagePlane& img, int patch_size, int count,
                                            std::uint64_t seed, const std::string& image_name = "image");

/// total spread evenly over n_images; the remainder goes to the first images.
std::vector<int> allocate_patch_counts(std::size_t n_images, int total);

/// Full pipeline for in-memory sources (sorted by image_id before allocation).
PatchDataset build_dataset(std::vector<SourceImage> sources, const PatchConfig& pcfg,
                           const NoiseSpec& nspec);

std::vector<SourceImage> load_sources(const DatasetManifest& manifest);

PatchDataset build_dataset(const DatasetManifest& manifest, const PatchConfig& pcfg,
                           const NoiseSpec& nspec);

}  // namespace specknet
