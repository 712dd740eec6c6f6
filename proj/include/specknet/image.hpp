#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace specknet {

/// Value domain of the samples held by an ImagePlane.
enum class Domain {
  PixelU8Range,      ///< intensities meant for [0, 255]
  Anscombe,          ///< 2*sqrt(x + 3/8) of pixel intensities
  AnscombeRescaled,  ///< Anscombe values mapped affinely onto [0, 255]
  Arbitrary,
};

std::string_view to_string(Domain d);
Domain domain_from_string(std::string_view s);

struct ValueRange {
  double lo = 0.0;
  double hi = 1.0;

  /// Throws ConfigError unless lo < hi and both are finite.
  void validate() const;
  double span() const { return hi - lo; }
};

/// Row-major single-channel floating point image tagged with its value domain.
class ImagePlane {
 public:
  ImagePlane() = default;
  ImagePlane(int width, int height, Domain domain, double fill = 0.0);
  ImagePlane(int width, int height, std::vector<double> data, Domain domain);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  Domain domain() const { return domain_; }

  double& at(int row, int col) { return data_[static_cast<std::size_t>(row) * width_ + col]; }
  double at(int row, int col) const { return data_[static_cast<std::size_t>(row) * width_ + col]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  /// Same samples, different tag.
  ImagePlane retagged(Domain d) const;

  /// Copy of the rectangle starting at (row, col). Throws DomainError when out of bounds.
  ImagePlane crop(int row, int col, int height, int width) const;

  bool same_shape(const ImagePlane& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Throws DomainError naming `op` when the tag differs from `expected`.
  void require_domain(Domain expected, std::string_view op) const;
  /// Throws NumericError naming `op` and the first offending index.
  void require_finite(std::string_view op) const;

  double min() const;
  double max() const;
  double mean() const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
  Domain domain_ = Domain::Arbitrary;
};

/// Throws DomainError when shapes differ.
void require_same_shape(const ImagePlane& a, const ImagePlane& b, std::string_view op);

/// Clamp to [0, 255] and round half-to-even, the export rule for 8-bit outputs.
std::vector<unsigned char> export_u8(const ImagePlane& img);
ImagePlane quantize_u8(const ImagePlane& img);

/// Reflect index into [0, n) without repeating the edge sample (…2 1 | 0 1 2 … n-1 | n-2 …).
int reflect_index(int i, int n);

/// Pad by reflection so the result is at least `min_height` x `min_width`,
/// with the original occupying the top-left corner.
ImagePlane reflect_pad_to(const ImagePlane& img, int min_height, int min_width);

}  // namespace specknet
