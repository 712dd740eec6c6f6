#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "specknet/image.hpp"

namespace testing {

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::path(SPECKNET_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline specknet::ImagePlane random_image(int w, int h, std::uint64_t seed, double lo = 0.0, double hi = 255.0,
                                         specknet::Domain d = specknet::Domain::PixelU8Range) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  specknet::ImagePlane img(w, h, d);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = u(rng);
  return img;
}

inline specknet::ImagePlane random_u8_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  specknet::ImagePlane img(w, h, specknet::Domain::PixelU8Range);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = u(rng);
  return img;
}

}  // namespace testing
