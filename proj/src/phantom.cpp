#include "specknet/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "specknet/errors.hpp"
#include "specknet/image_io.hpp"
#include "specknet/manifest.hpp"
#include "specknet/rng.hpp"

namespace specknet {

namespace {

struct Wave {
  double amplitude, frequency, phase;
};

struct Blob {
  double cy, cx, ry, rx, depth;
};

struct Vessel {
  double x, width, top_fraction;
};

}  // namespace

ImagePlane make_oct_phantom(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;

  constexpr int kLayers = 8;
  const double levels[kLayers] = {190, 75, 135, 55, 150, 85, 225, 110};
  double thickness[kLayers];
  for (double& t : thickness) t = 0.03 + 0.05 * u(rng);

  const double top = (0.18 + 0.12 * u(rng)) * height;
  std::vector<Wave> waves(3);
  for (auto& w : waves) w = {(0.01 + 0.04 * u(rng)) * height, 0.5 + 2.0 * u(rng), two_pi * u(rng)};
  const double fovea_x = (0.3 + 0.4 * u(rng)) * width;
  const double fovea_w = (0.06 + 0.06 * u(rng)) * width;
  const double fovea_depth = (0.05 + 0.08 * u(rng)) * height;
  const double modulation_phase = two_pi * u(rng);

  std::vector<Vessel> vessels(1 + static_cast<int>(3 * u(rng)));
  for (auto& v : vessels) v = {u(rng) * width, 2.0 + 4.0 * u(rng), 0.2 + 0.3 * u(rng)};
  std::vector<Blob> blobs(static_cast<int>(4 * u(rng)));
  for (auto& b : blobs) {
    b = {(0.35 + 0.4 * u(rng)) * height, u(rng) * width, (0.02 + 0.04 * u(rng)) * height,
         (0.03 + 0.06 * u(rng)) * width, 0.4 + 0.5 * u(rng)};
  }

  auto boundary = [&](double x) {
    double y = top;
    for (const auto& w : waves) y += w.amplitude * std::sin(two_pi * w.frequency * x / width + w.phase);
    const double d = (x - fovea_x) / fovea_w;
    return y + fovea_depth * std::exp(-d * d);
  };

  auto intensity = [&](double yy, double xx) {
    const double y0 = boundary(xx);
    if (yy < y0) return 12.0;
    double pos = y0;
    double value = 18.0;
    const double d = (xx - fovea_x) / fovea_w;
    const double thinning = 1.0 - 0.5 * std::exp(-d * d);
    for (int l = 0; l < kLayers; ++l) {
      const double t = thickness[l] * height * (l < 3 ? thinning : 1.0);
      if (yy < pos + t) {
        value = levels[l];
        break;
      }
      pos += t;
    }
    value *= 0.85 + 0.15 * std::sin(two_pi * xx / width + modulation_phase);
    for (const auto& v : vessels) {
      if (yy > y0 + v.top_fraction * (height - y0) * 0.2) {
        const double dv = (xx - v.x) / v.width;
        value *= 1.0 - 0.6 * std::exp(-dv * dv);
      }
    }
    for (const auto& b : blobs) {
      const double dy = (yy - b.cy) / b.ry;
      const double dx = (xx - b.cx) / b.rx;
      if (dy * dy + dx * dx < 1.0) value *= 1.0 - b.depth;
    }
    return value;
  };

  // 3x3 supersampling softens the band edges.
  ImagePlane img(width, height, Domain::PixelU8Range);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      double acc = 0.0;
      for (int sy = 0; sy < 3; ++sy) {
        for (int sx = 0; sx < 3; ++sx) acc += intensity(r + (sy + 0.5) / 3.0, c + (sx + 0.5) / 3.0);
      }
      img.at(r, c) = acc / 9.0;
    }
  }
  return quantize_u8(img);
}

namespace {

std::vector<std::pair<std::string, ImagePlane>> load_clean_sources(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("corpus source_dir '" + dir.string() + "' is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".png" || ext == ".tif" || ext == ".tiff")) files.push_back(entry.path());
  }
  if (files.empty()) throw DataError("corpus source_dir '" + dir.string() + "' holds no PNG/TIFF images");
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, ImagePlane>> out;
  for (const auto& f : files) out.emplace_back(f.stem().string(), read_image(f));
  return out;
}

}  // namespace

std::vector<SourceImage> make_synthetic_corpus(const CorpusConfig& cfg) {
  std::vector<std::pair<std::string, ImagePlane>> clean;
  if (!cfg.source_dir.empty()) {
    clean = load_clean_sources(cfg.source_dir);
  } else {
    for (int i = 0; i < cfg.count; ++i) {
      char id[16];
      std::snprintf(id, sizeof id, "img%02d", i);
      clean.emplace_back(id, make_oct_phantom(cfg.width, cfg.height, derive_seed(cfg.seed, static_cast<std::uint64_t>(i))));
    }
  }
  std::vector<SourceImage> out;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    SpeckleSpec speckle = cfg.speckle;
    speckle.seed = derive_seed(cfg.speckle.seed, i);
    ImagePlane noisy = quantize_u8(apply_speckle(clean[i].second, speckle));
    out.push_back({clean[i].first, std::move(noisy), std::move(clean[i].second)});
  }
  return out;
}

std::filesystem::path write_synthetic_corpus(const CorpusConfig& cfg,
                                             const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  DatasetManifest manifest;
  manifest.root = dir;
  for (const SourceImage& s : make_synthetic_corpus(cfg)) {
    const auto noisy_path = dir / (s.image_id + "_noisy.png");
    const auto clean_path = dir / (s.image_id + "_clean.png");
    write_image(s.noisy, noisy_path);
    write_image(*s.clean, clean_path);
    manifest.entries.push_back({s.image_id, noisy_path, clean_path});
  }
  const auto path = dir / "manifest.txt";
  write_manifest(manifest, path);
  return path;
}

}  // namespace specknet
