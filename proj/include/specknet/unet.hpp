#pragma once

#include <cstddef>
#include <cstdint>
#include <new>
#include <span>
#include <vector>

#include "specknet/image.hpp"

namespace specknet {

/// U-Net layout: per encoder level two 3x3 conv+ReLU then 2x2 max-pool; a two-conv
/// bottleneck; per decoder level a nearest-neighbour 2x upsample, a 3x3 conv+ReLU, channel
/// concatenation with the encoder skip, two 3x3 conv+ReLU; a final linear 1x1 conv.
/// Level l carries base_channels * 2^l channels. One input and one output channel.
///
/// Inputs are normalised as (x - intensity_center) / intensity_scale and outputs mapped back,
/// so the network consumes and produces samples in the caller's domain units.
struct UNetConfig {
  int depth = 4;
  int base_channels = 32;
  int kernel_size = 3;
  double intensity_center = 127.5;
  double intensity_scale = 127.5;

  void validate() const;
  friend bool operator==(const UNetConfig&, const UNetConfig&) = default;
};

/// Closed-form parameter count:
///   enc:    conv(1->c) + sum_{l=1}^{d-1} conv(c_{l-1}->c_l) + sum_l conv(c_l->c_l)
///   bottom: conv(c_{d-1}->c_d) + conv(c_d->c_d)
///   dec:    sum_l [conv(c_{l+1}->c_l) + conv(2c_l->c_l) + conv(c_l->c_l)]
///   final:  c_0 + 1
/// with conv(a->b) = 9ab + b and c_l = base * 2^l.
std::size_t unet_parameter_count(const UNetConfig& cfg);

struct ConvSpec {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  bool relu = true;
  int level = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;

  std::size_t weight_count() const {
    return static_cast<std::size_t>(in_channels) * out_channels * kernel * kernel;
  }
};

/// 64-byte aligned storage. Vectorised products depend on buffer alignment, so
/// reproducible training needs every buffer they touch to start on the same boundary.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

template <class T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Activation caches for one forward/backward pass. Reusable across calls of the same size.
template <class T>
struct UNetWorkspace {
  int height = 0;
  int width = 0;
  AlignedVector<T> input;
  std::vector<AlignedVector<T>> cols;
  std::vector<AlignedVector<T>> act;
  std::vector<AlignedVector<T>> pooled;
  std::vector<std::vector<int>> pool_index;
  std::vector<AlignedVector<T>> upsampled;
  std::vector<AlignedVector<T>> concat;
  // backward scratch
  std::vector<AlignedVector<T>> grad_act;
  AlignedVector<T> grad_cols;
  AlignedVector<T> grad_buffer;
};

template <class T>
class UNet {
 public:
  /// He-normal weights, zero biases; a pure function of (cfg, seed).
  UNet(const UNetConfig& cfg, std::uint64_t seed);
  /// Wraps existing parameters; size must equal unet_parameter_count(cfg).
  UNet(const UNetConfig& cfg, std::vector<T> parameters);

  const UNetConfig& config() const { return cfg_; }
  const std::vector<ConvSpec>& layers() const { return layers_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<T> parameters() { return params_; }
  std::span<const T> parameters() const { return params_; }

  /// Height and width must be divisible by 2^depth.
  void forward(std::span<const T> input, int height, int width, std::span<T> output,
               UNetWorkspace<T>& ws) const;

  /// Gradient of a loss w.r.t. the output of the preceding forward() on `ws`;
  /// parameter gradients are added to `grads`.
  void backward(std::span<const T> grad_output, UNetWorkspace<T>& ws, std::span<T> grads) const;

  /// Single forward pass on an image; the domain tag is preserved.
  ImagePlane predict(const ImagePlane& img) const;

  // Layer indices in the parameter layout.
  int enc_a(int level) const { return 2 * level; }
  int enc_b(int level) const { return 2 * level + 1; }
  int bottom_a() const { return 2 * cfg_.depth; }
  int bottom_b() const { return 2 * cfg_.depth + 1; }
  int dec_up(int level) const { return 2 * cfg_.depth + 2 + 3 * (cfg_.depth - 1 - level); }
  int dec_a(int level) const { return dec_up(level) + 1; }
  int dec_b(int level) const { return dec_up(level) + 2; }
  int final_conv() const { return 5 * cfg_.depth + 2; }

 private:
  void build_layout();
  void check_size(int height, int width) const;

  UNetConfig cfg_;
  std::vector<ConvSpec> layers_;
  AlignedVector<T> params_;
};

extern template class UNet<float>;
extern template class UNet<double>;

}  // namespace specknet
