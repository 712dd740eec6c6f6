#include "specknet/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "specknet/errors.hpp"

namespace specknet {

std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::PixelU8Range: return "pixel";
    case Domain::Anscombe: return "anscombe";
    case Domain::AnscombeRescaled: return "anscombe-rescaled";
    case Domain::Arbitrary: return "arbitrary";
  }
  return "arbitrary";
}

Domain domain_from_string(std::string_view s) {
  if (s == "pixel") return Domain::PixelU8Range;
  if (s == "anscombe") return Domain::Anscombe;
  if (s == "anscombe-rescaled") return Domain::AnscombeRescaled;
  if (s == "arbitrary") return Domain::Arbitrary;
  throw ConfigError("unknown domain tag '" + std::string(s) + "'");
}

void ValueRange::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw ConfigError("degenerate value range [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
}

ImagePlane::ImagePlane(int width, int height, Domain domain, double fill)
    : width_(width), height_(height), domain_(domain) {
  if (width < 1 || height < 1) {
    throw DomainError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

ImagePlane::ImagePlane(int width, int height, std::vector<double> data, Domain domain)
    : width_(width), height_(height), data_(std::move(data)), domain_(domain) {
  if (width < 1 || height < 1) {
    throw DomainError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw DomainError("image data length " + std::to_string(data_.size()) + " does not match " +
                      std::to_string(width) + "x" + std::to_string(height));
  }
}

ImagePlane ImagePlane::retagged(Domain d) const {
  ImagePlane out = *this;
  out.domain_ = d;
  return out;
}

ImagePlane ImagePlane::crop(int row, int col, int height, int width) const {
  if (row < 0 || col < 0 || height < 1 || width < 1 || row + height > height_ ||
      col + width > width_) {
    throw DomainError("crop " + std::to_string(height) + "x" + std::to_string(width) + " at (" +
                      std::to_string(row) + "," + std::to_string(col) + ") exceeds " +
                      std::to_string(height_) + "x" + std::to_string(width_) + " image");
  }
  ImagePlane out(width, height, domain_);
  for (int r = 0; r < height; ++r) {
    const double* src = data_.data() + static_cast<std::size_t>(row + r) * width_ + col;
    std::copy(src, src + width, out.data_.begin() + static_cast<std::size_t>(r) * width);
  }
  return out;
}

void ImagePlane::require_domain(Domain expected, std::string_view op) const {
  if (domain_ != expected) {
    throw DomainError(std::string(op) + ": expected " + std::string(to_string(expected)) +
                      " image, got " + std::string(to_string(domain_)));
  }
}

void ImagePlane::require_finite(std::string_view op) const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw NumericError(std::string(op) + ": non-finite sample at index " + std::to_string(i));
    }
  }
}

double ImagePlane::min() const { return *std::min_element(data_.begin(), data_.end()); }
double ImagePlane::max() const { return *std::max_element(data_.begin(), data_.end()); }
double ImagePlane::mean() const {
  return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

void require_same_shape(const ImagePlane& a, const ImagePlane& b, std::string_view op) {
  if (!a.same_shape(b)) {
    throw DomainError(std::string(op) + ": dimension mismatch " + std::to_string(a.height()) +
                      "x" + std::to_string(a.width()) + " vs " + std::to_string(b.height()) +
                      "x" + std::to_string(b.width()));
  }
}

std::vector<unsigned char> export_u8(const ImagePlane& img) {
  std::vector<unsigned char> out(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    double v = img[i];
    if (std::isnan(v)) v = 0.0;
    // nearbyint follows the default round-to-nearest-even mode.
    out[i] = static_cast<unsigned char>(std::nearbyint(std::clamp(v, 0.0, 255.0)));
  }
  return out;
}

ImagePlane quantize_u8(const ImagePlane& img) {
  const auto bytes = export_u8(img);
  std::vector<double> data(bytes.begin(), bytes.end());
  return ImagePlane(img.width(), img.height(), std::move(data), img.domain());
}

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

ImagePlane reflect_pad_to(const ImagePlane& img, int min_height, int min_width) {
  const int h = std::max(img.height(), min_height);
  const int w = std::max(img.width(), min_width);
  if (h == img.height() && w == img.width()) return img;
  ImagePlane out(w, h, img.domain());
  for (int r = 0; r < h; ++r) {
    const int sr = reflect_index(r, img.height());
    for (int c = 0; c < w; ++c) out.at(r, c) = img.at(sr, reflect_index(c, img.width()));
  }
  return out;
}

}  // namespace specknet
