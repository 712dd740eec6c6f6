#include "specknet/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <utility>

#include "specknet/digest.hpp"
#include "specknet/errors.hpp"
#include "specknet/image_io.hpp"
#include "specknet/rng.hpp"
#include "specknet/transforms.hpp"

namespace specknet {

namespace {

constexpr std::uint64_t kSplitStream = 0x5317;

void hash_plane(Sha256& h, const ImagePlane& p) {
  h.update_u64(static_cast<std::uint64_t>(p.width()));
  h.update_u64(static_cast<std::uint64_t>(p.height()));
  h.update(p.data());
}

}  // namespace

void PatchConfig::validate(int unet_depth) const {
  if (patch_size < 1) throw ConfigError("patch_size must be positive");
  if (total_patches < 1) throw ConfigError("total_patches must be positive");
  if (n_train < 0 || n_val < 0 || n_test < 0) throw ConfigError("split sizes must be nonnegative");
  if (n_train + n_val + n_test != total_patches) {
    throw ConfigError("split " + std::to_string(n_train) + "/" + std::to_string(n_val) + "/" +
                      std::to_string(n_test) + " does not add up to total_patches " +
                      std::to_string(total_patches));
  }
  if (unet_depth >= 0 && patch_size % (1 << unet_depth) != 0) {
    throw ConfigError("patch_size " + std::to_string(patch_size) + " is not divisible by 2^" +
                      std::to_string(unet_depth));
  }
}

std::string PatchDataset::digest() const {
  Sha256 h;
  h.update("specknet-dataset-v1");
  for (const auto* split : {&train, &val, &test}) {
    h.update_u64(split->size());
    for (const PatchEntry& e : *split) {
      h.update(e.source_id);
      h.update_u64(e.patch_index);
      h.update_u64(static_cast<std::uint64_t>(e.origin.row));
      h.update_u64(static_cast<std::uint64_t>(e.origin.col));
      hash_plane(h, e.triple.x_ans);
      hash_plane(h, e.triple.y_noisier);
      hash_plane(h, e.triple.z_noisier_plus);
      hash_plane(h, e.noisy);
      h.update_u64(e.clean ? 1 : 0);
      if (e.clean) hash_plane(h, *e.clean);
    }
  }
  return h.hex();
}

std::vector<ExtractedPatch> extract_patches(const ImagePlane& img, int patch_size, int count,
                                            std::uint64_t seed, const std::string& image_name) {
  if (patch_size < 1) throw ConfigError("patch_size must be positive");
  if (count < 0) throw ConfigError("patch count must be nonnegative");
  if (img.height() < patch_size || img.width() < patch_size) {
    throw DataError(image_name + ": image " + std::to_string(img.height()) + "x" +
                    std::to_string(img.width()) + " is smaller than patch size " +
                    std::to_string(patch_size));
  }
  const std::uint64_t rows = static_cast<std::uint64_t>(img.height() - patch_size) + 1;
  const std::uint64_t cols = static_cast<std::uint64_t>(img.width() - patch_size) + 1;
  if (static_cast<std::uint64_t>(count) > rows * cols) {
    throw DataError(image_name + ": cannot draw " + std::to_string(count) + " distinct origins");
  }
  Rng rng(seed);
  std::uniform_int_distribution<int> row_dist(0, static_cast<int>(rows) - 1);
  std::uniform_int_distribution<int> col_dist(0, static_cast<int>(cols) - 1);
  std::set<std::pair<int, int>> seen;
  std::vector<ExtractedPatch> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const int r = row_dist(rng);
    const int c = col_dist(rng);
    if (!seen.emplace(r, c).second) continue;
    out.push_back({img.crop(r, c, patch_size, patch_size), {r, c}});
  }
  return out;
}

std::vector<int> allocate_patch_counts(std::size_t n_images, int total) {
  if (n_images == 0) throw DataError("no source images");
  std::vector<int> counts(n_images, total / static_cast<int>(n_images));
  const int remainder = total % static_cast<int>(n_images);
  for (int i = 0; i < remainder; ++i) ++counts[static_cast<std::size_t>(i)];
  return counts;
}

PatchDataset build_dataset(std::vector<SourceImage> sources, const PatchConfig& pcfg,
                           const NoiseSpec& nspec) {
  pcfg.validate(-1);
  nspec.validate();
  std::sort(sources.begin(), sources.end(),
            [](const SourceImage& a, const SourceImage& b) { return a.image_id < b.image_id; });
  for (std::size_t i = 1; i < sources.size(); ++i) {
    if (sources[i].image_id == sources[i - 1].image_id) {
      throw DataError("duplicate image_id '" + sources[i].image_id + "'");
    }
  }
  const std::vector<int> counts = allocate_patch_counts(sources.size(), pcfg.total_patches);

  std::vector<PatchEntry> all;
  all.reserve(static_cast<std::size_t>(pcfg.total_patches));
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const SourceImage& src = sources[s];
    src.noisy.require_domain(Domain::PixelU8Range, "build_dataset");
    if (src.clean) {
      src.clean->require_domain(Domain::PixelU8Range, "build_dataset");
      if (!src.clean->same_shape(src.noisy)) {
        throw DataError(src.image_id + ": clean and noisy images differ in size");
      }
    }
    const auto patches = extract_patches(src.noisy, pcfg.patch_size, counts[s],
                                         derive_seed(pcfg.extraction_seed, s), src.image_id);
    for (const ExtractedPatch& p : patches) {
      PatchEntry e;
      e.patch_index = all.size();
      NoiseSpec patch_noise = nspec;
      patch_noise.seed = derive_seed(nspec.seed, e.patch_index);
      e.triple = make_noisy_triple(pixel_to_rescaled(p.patch), patch_noise);
      e.noisy = p.patch;
      if (src.clean && pcfg.retain_clean) {
        e.clean = src.clean->crop(p.origin.row, p.origin.col, pcfg.patch_size, pcfg.patch_size);
      }
      e.source_id = src.image_id;
      e.origin = p.origin;
      all.push_back(std::move(e));
    }
  }

  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split_rng(derive_seed(pcfg.extraction_seed, kSplitStream));
  std::shuffle(order.begin(), order.end(), split_rng);

  PatchDataset ds;
  for (std::size_t k = 0; k < order.size(); ++k) {
    PatchEntry& e = all[order[k]];
    if (k < static_cast<std::size_t>(pcfg.n_train)) ds.train.push_back(std::move(e));
    else if (k < static_cast<std::size_t>(pcfg.n_train + pcfg.n_val)) ds.val.push_back(std::move(e));
    else ds.test.push_back(std::move(e));
  }
  return ds;
}

std::vector<SourceImage> load_sources(const DatasetManifest& manifest) {
  std::vector<SourceImage> sources;
  for (const auto& e : manifest.sorted_entries()) {
    SourceImage s{e.image_id, read_image(e.noisy_path), std::nullopt};
    if (e.clean_path) s.clean = read_image(*e.clean_path);
    sources.push_back(std::move(s));
  }
  return sources;
}

PatchDataset build_dataset(const DatasetManifest& manifest, const PatchConfig& pcfg,
                           const NoiseSpec& nspec) {
  return build_dataset(load_sources(manifest), pcfg, nspec);
}

}  // namespace specknet
