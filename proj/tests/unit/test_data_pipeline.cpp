#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "specknet/dataset.hpp"
#include "specknet/errors.hpp"
#include "specknet/image_io.hpp"
#include "specknet/manifest.hpp"
#include "specknet/phantom.hpp"
#include "specknet/transforms.hpp"

using namespace specknet;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

std::vector<SourceImage> small_sources(int n, int w, int h, bool with_clean = true) {
  std::vector<SourceImage> out;
  for (int i = 0; i < n; ++i) {
    SourceImage s{"im" + std::to_string(i), testing::random_u8_image(w, h, 100 + i), std::nullopt};
    if (with_clean) s.clean = testing::random_u8_image(w, h, 200 + i);
    out.push_back(std::move(s));
  }
  return out;
}

PatchConfig small_config() {
  PatchConfig p;
  p.patch_size = 16;
  p.total_patches = 50;
  p.n_train = 30;
  p.n_val = 10;
  p.n_test = 10;
  p.extraction_seed = 9;
  return p;
}

}  // namespace

TEST_CASE("manifest grammar") {
  const std::string text =
      "# Duke-style layout\n"
      "root: data\n"
      "\n"
      "entry id=b noisy=b_noisy.png clean=b_clean.png   # trailing comment\n"
      "entry id=a noisy=/abs/a.tif\n";
  const DatasetManifest m = parse_manifest(text, "/base");
  CHECK(m.root == fs::path("/base/data"));
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[0].noisy_path == fs::path("/base/data/b_noisy.png"));
  CHECK(m.entries[0].clean_path == fs::path("/base/data/b_clean.png"));
  CHECK(m.entries[1].noisy_path == fs::path("/abs/a.tif"));
  CHECK_FALSE(m.entries[1].clean_path.has_value());
  CHECK(m.sorted_entries()[0].image_id == "a");

  CHECK(parse_manifest("entry id=x noisy=x.png\n", "/d").root == fs::path("/d"));
}

TEST_CASE("manifest errors carry line and field") {
  CHECK(error_of([] { parse_manifest("# nothing\n\n", "/d", "m.txt"); }).find("empty manifest") !=
        std::string::npos);
  const auto dup = error_of([] { parse_manifest("entry id=a noisy=1.png\nentry id=a noisy=2.png\n", "/d", "m.txt"); });
  CHECK(dup.find("m.txt line 2") != std::string::npos);
  CHECK(dup.find("duplicate image_id") != std::string::npos);
  const auto unknown = error_of([] { parse_manifest("entry id=a noisy=1.png colour=red\n", "/d", "m.txt"); });
  CHECK(unknown.find("line 1") != std::string::npos);
  CHECK(unknown.find("colour") != std::string::npos);
  CHECK(error_of([] { parse_manifest("entry noisy=1.png\n", "/d"); }).find("missing field 'id'") !=
        std::string::npos);
  CHECK(error_of([] { parse_manifest("picture id=a noisy=1.png\n", "/d"); }).find("line 1") != std::string::npos);
  CHECK_THROWS_AS(parse_manifest("entry id=a noisy\n", "/d"), DataError);
}

TEST_CASE("load_manifest reports every missing noisy file") {
  const auto dir = testing::scratch_dir("manifest_load");
  write_image(testing::random_u8_image(8, 8, 1), dir / "ok.png");
  {
    std::ofstream out(dir / "manifest.txt");
    out << "entry id=ok noisy=ok.png\nentry id=gone1 noisy=gone1.png\nentry id=gone2 noisy=gone2.png clean=ok.png\n";
  }
  const auto msg = error_of([&] { load_manifest(dir / "manifest.txt"); });
  CHECK(msg.find("gone1.png") != std::string::npos);
  CHECK(msg.find("gone2.png") != std::string::npos);
  CHECK(msg.find("ok.png") == std::string::npos);
  CHECK(error_of([&] { load_manifest(dir / "nope.txt"); }).find("nope.txt") != std::string::npos);

  {
    std::ofstream out(dir / "good.txt");
    out << "entry id=ok noisy=ok.png\n";
  }
  const DatasetManifest m = load_manifest(dir / "good.txt");
  CHECK(m.entries.size() == 1);
  write_manifest(m, dir / "copy.txt");
  const DatasetManifest again = load_manifest(dir / "copy.txt");
  CHECK(again.entries[0].noisy_path == m.entries[0].noisy_path);
}

TEST_CASE("extract_patches") {
  const ImagePlane img = testing::random_u8_image(900, 450, 3);
  const auto patches = extract_patches(img, 128, 61, 5, "duke");
  REQUIRE(patches.size() == 61);
  std::set<std::pair<int, int>> origins;
  for (const auto& p : patches) {
    CHECK(p.origin.row >= 0);
    CHECK(p.origin.row <= 322);
    CHECK(p.origin.col >= 0);
    CHECK(p.origin.col <= 772);
    CHECK(p.patch.width() == 128);
    CHECK(p.patch.height() == 128);
    CHECK(p.patch.at(7, 9) == img.at(p.origin.row + 7, p.origin.col + 9));
    origins.emplace(p.origin.row, p.origin.col);
  }
  CHECK(origins.size() == 61);

  const auto again = extract_patches(img, 128, 61, 5, "duke");
  for (std::size_t i = 0; i < patches.size(); ++i) CHECK(again[i].origin == patches[i].origin);

  const ImagePlane square = testing::random_u8_image(32, 32, 4);
  const auto one = extract_patches(square, 32, 1, 0, "sq");
  CHECK(one[0].origin == PatchOrigin{0, 0});
  CHECK(error_of([&] { extract_patches(square, 32, 2, 0, "sq"); }).find("cannot draw 2 distinct origins") !=
        std::string::npos);
  const auto small = error_of([&] { extract_patches(square, 64, 1, 0, "tiny.png"); });
  CHECK(small.find("tiny.png") != std::string::npos);
  CHECK(small.find("smaller than patch size") != std::string::npos);
}

TEST_CASE("patch allocation and config checks") {
  const auto counts = allocate_patch_counts(28, 1700);
  int total = 0;
  for (int c : counts) {
    CHECK((c == 60 || c == 61));
    total += c;
  }
  CHECK(total == 1700);
  CHECK(counts[0] == 61);
  CHECK(counts[27] == 60);

  PatchConfig defaults;
  CHECK_NOTHROW(defaults.validate(4));
  CHECK_THROWS_AS(defaults.validate(8), ConfigError);
  PatchConfig bad = defaults;
  bad.n_test = 99;
  CHECK_THROWS_AS(bad.validate(4), ConfigError);
}

TEST_CASE("build_dataset counts, domains, alignment and determinism") {
  const auto sources = small_sources(3, 40, 36);
  const PatchConfig pcfg = small_config();
  const NoiseSpec nspec{50.0, 50.0, 17};
  const PatchDataset ds = build_dataset(sources, pcfg, nspec);
  CHECK(ds.train.size() == 30);
  CHECK(ds.val.size() == 10);
  CHECK(ds.test.size() == 10);

  std::set<std::size_t> ids;
  for (const auto* split : {&ds.train, &ds.val, &ds.test}) {
    for (const auto& e : *split) {
      ids.insert(e.patch_index);
      CHECK(e.triple.x_ans.domain() == Domain::AnscombeRescaled);
      CHECK(e.triple.y_noisier.domain() == Domain::AnscombeRescaled);
      CHECK(e.triple.z_noisier_plus.domain() == Domain::AnscombeRescaled);
      REQUIRE(e.clean.has_value());
      const auto& src = *std::find_if(sources.begin(), sources.end(),
                                      [&](const SourceImage& s) { return s.image_id == e.source_id; });
      CHECK(e.clean->values() == src.clean->crop(e.origin.row, e.origin.col, 16, 16).values());
      CHECK(e.noisy.values() == src.noisy.crop(e.origin.row, e.origin.col, 16, 16).values());
      const ImagePlane expected = pixel_to_rescaled(e.noisy);
      CHECK(e.triple.x_ans.values() == expected.values());
    }
  }
  CHECK(ids.size() == 50);

  const PatchDataset again = build_dataset(sources, pcfg, nspec);
  CHECK(again.digest() == ds.digest());

  PatchConfig other = pcfg;
  other.extraction_seed = 10;
  CHECK(build_dataset(sources, other, nspec).digest() != ds.digest());
  NoiseSpec other_noise = nspec;
  other_noise.seed = 18;
  CHECK(build_dataset(sources, pcfg, other_noise).digest() != ds.digest());

  // Source order does not matter: images are sorted by id.
  auto reversed = sources;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(build_dataset(reversed, pcfg, nspec).digest() == ds.digest());
}

TEST_CASE("zero noise gives identical triples") {
  const PatchDataset ds = build_dataset(small_sources(2, 20, 20), small_config(), NoiseSpec{0.0, 0.0, 1});
  for (const auto& e : ds.train) {
    CHECK(e.triple.x_ans.values() == e.triple.y_noisier.values());
    CHECK(e.triple.y_noisier.values() == e.triple.z_noisier_plus.values());
  }
}

TEST_CASE("entries without clean images still load") {
  auto sources = small_sources(2, 24, 24);
  sources[1].clean.reset();
  const PatchDataset ds = build_dataset(sources, small_config(), NoiseSpec{});
  std::size_t without = 0;
  for (const auto& e : ds.test) without += e.clean ? 0 : 1;
  for (const auto& e : ds.train) without += e.clean ? 0 : 1;
  CHECK(without > 0);
}

TEST_CASE("manifest-driven build matches in-memory build") {
  const auto dir = testing::scratch_dir("dataset_manifest");
  CorpusConfig cc;
  cc.count = 3;
  cc.width = 48;
  cc.height = 40;
  const fs::path manifest_path = write_synthetic_corpus(cc, dir);
  const DatasetManifest m = load_manifest(manifest_path);
  CHECK(m.entries.size() == 3);
  const PatchDataset from_files = build_dataset(m, small_config(), NoiseSpec{});
  const PatchDataset in_memory = build_dataset(make_synthetic_corpus(cc), small_config(), NoiseSpec{});
  CHECK(from_files.digest() == in_memory.digest());
}

TEST_CASE("phantoms are deterministic 8-bit images") {
  const ImagePlane a = make_oct_phantom(64, 48, 3);
  CHECK(a.values() == make_oct_phantom(64, 48, 3).values());
  CHECK(a.values() != make_oct_phantom(64, 48, 4).values());
  CHECK(a.min() >= 0.0);
  CHECK(a.max() <= 255.0);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == std::round(a[i]));
}
