#include "specknet/unet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include <Eigen/Core>

#include "specknet/errors.hpp"
#include "specknet/rng.hpp"

namespace specknet {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapMat = Eigen::Map<RowMat<T>>;
template <class T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;
template <class T>
using ConstMapVec = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <class T>
using MapVec = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;

std::size_t conv_params(std::size_t in, std::size_t out, std::size_t k) {
  return in * out * k * k + out;
}

// 3x3, stride 1, zero padding 1.
template <class T>
void im2col3(const T* in, int channels, int h, int w, T* cols) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (int c = 0; c < channels; ++c) {
    const T* plane = in + c * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        T* dst = cols + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * hw;
        const int dx = kx - 1;
        for (int y = 0; y < h; ++y) {
          T* row = dst + static_cast<std::size_t>(y) * w;
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) {
            std::fill(row, row + w, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(sy) * w;
          if (dx == 0) {
            std::memcpy(row, src, sizeof(T) * w);
          } else if (dx < 0) {
            row[0] = T(0);
            std::memcpy(row + 1, src, sizeof(T) * (w - 1));
          } else {
            std::memcpy(row, src + 1, sizeof(T) * (w - 1));
            row[w - 1] = T(0);
          }
        }
      }
    }
  }
}

template <class T>
void col2im3(const T* cols, int channels, int h, int w, T* out) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  std::fill(out, out + channels * hw, T(0));
  for (int c = 0; c < channels; ++c) {
    T* plane = out + c * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const T* src = cols + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * hw;
        const int dx = kx - 1;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          const T* row = src + static_cast<std::size_t>(y) * w;
          T* dst = plane + static_cast<std::size_t>(sy) * w;
          const int x0 = std::max(0, -dx);
          const int x1 = std::min(w, w - dx);
          for (int x = x0; x < x1; ++x) dst[x + dx] += row[x];
        }
      }
    }
  }
}

template <class T>
void maxpool2(const T* in, int channels, int h, int w, T* out, int* index) {
  const int oh = h / 2, ow = w / 2;
  for (int c = 0; c < channels; ++c) {
    const T* plane = in + static_cast<std::size_t>(c) * h * w;
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        int best = (2 * y) * w + 2 * x;
        const int cand[3] = {best + 1, best + w, best + w + 1};
        for (int k : cand) {
          if (plane[k] > plane[best]) best = k;
        }
        const std::size_t o = (static_cast<std::size_t>(c) * oh + y) * ow + x;
        out[o] = plane[best];
        index[o] = best;
      }
    }
  }
}

template <class T>
void maxpool2_backward(const T* grad_out, const int* index, int channels, int h, int w,
                       T* grad_in) {
  const std::size_t ohw = static_cast<std::size_t>(h / 2) * (w / 2);
  for (int c = 0; c < channels; ++c) {
    T* plane = grad_in + static_cast<std::size_t>(c) * h * w;
    for (std::size_t o = 0; o < ohw; ++o) plane[index[c * ohw + o]] += grad_out[c * ohw + o];
  }
}

// in: channels x h x w, out: channels x 2h x 2w
template <class T>
void upsample2(const T* in, int channels, int h, int w, T* out) {
  const int ow = 2 * w;
  for (int c = 0; c < channels; ++c) {
    const T* plane = in + static_cast<std::size_t>(c) * h * w;
    T* dst = out + static_cast<std::size_t>(c) * 4 * h * w;
    for (int y = 0; y < 2 * h; ++y) {
      const T* src = plane + static_cast<std::size_t>(y / 2) * w;
      T* row = dst + static_cast<std::size_t>(y) * ow;
      for (int x = 0; x < ow; ++x) row[x] = src[x / 2];
    }
  }
}

template <class T>
void upsample2_backward(const T* grad_out, int channels, int h, int w, T* grad_in) {
  const int ow = 2 * w;
  for (int c = 0; c < channels; ++c) {
    const T* g = grad_out + static_cast<std::size_t>(c) * 4 * h * w;
    T* dst = grad_in + static_cast<std::size_t>(c) * h * w;
    for (int y = 0; y < h; ++y) {
      const T* r0 = g + static_cast<std::size_t>(2 * y) * ow;
      const T* r1 = r0 + ow;
      for (int x = 0; x < w; ++x) {
        dst[static_cast<std::size_t>(y) * w + x] = r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1];
      }
    }
  }
}

template <class V>
void resize(V& v, std::size_t n) {
  if (v.size() != n) v.resize(n);
}

}  // namespace

void UNetConfig::validate() const {
  if (depth < 1 || depth > 8) throw ConfigError("unet depth must be in [1, 8]");
  if (base_channels < 1) throw ConfigError("unet base_channels must be positive");
  if (kernel_size != 3) throw ConfigError("unet kernel_size must be 3");
  if (!(intensity_scale > 0.0) || !std::isfinite(intensity_center)) {
    throw ConfigError("unet intensity normalisation must be finite with positive scale");
  }
}

std::size_t unet_parameter_count(const UNetConfig& cfg) {
  cfg.validate();
  const std::size_t k = static_cast<std::size_t>(cfg.kernel_size);
  auto ch = [&](int l) { return static_cast<std::size_t>(cfg.base_channels) << l; };
  std::size_t total = 0;
  for (int l = 0; l < cfg.depth; ++l) {
    total += conv_params(l == 0 ? 1 : ch(l - 1), ch(l), k) + conv_params(ch(l), ch(l), k);
  }
  total += conv_params(ch(cfg.depth - 1), ch(cfg.depth), k) +
           conv_params(ch(cfg.depth), ch(cfg.depth), k);
  for (int l = 0; l < cfg.depth; ++l) {
    total += conv_params(ch(l + 1), ch(l), k) + conv_params(2 * ch(l), ch(l), k) +
             conv_params(ch(l), ch(l), k);
  }
  total += conv_params(ch(0), 1, 1);
  return total;
}

template <class T>
void UNet<T>::build_layout() {
  cfg_.validate();
  const int d = cfg_.depth;
  auto ch = [&](int l) { return cfg_.base_channels << l; };
  layers_.assign(static_cast<std::size_t>(5 * d + 3), ConvSpec{});
  auto set = [&](int idx, int in, int out, int level, int kernel = 3, bool relu = true) {
    layers_[idx] = ConvSpec{in, out, kernel, relu, level, 0, 0};
  };
  for (int l = 0; l < d; ++l) {
    set(enc_a(l), l == 0 ? 1 : ch(l - 1), ch(l), l);
    set(enc_b(l), ch(l), ch(l), l);
  }
  set(bottom_a(), ch(d - 1), ch(d), d);
  set(bottom_b(), ch(d), ch(d), d);
  for (int l = d - 1; l >= 0; --l) {
    set(dec_up(l), ch(l + 1), ch(l), l);
    set(dec_a(l), 2 * ch(l), ch(l), l);
    set(dec_b(l), ch(l), ch(l), l);
  }
  set(final_conv(), ch(0), 1, 0, 1, false);
  std::size_t offset = 0;
  for (auto& spec : layers_) {
    spec.weight_offset = offset;
    offset += spec.weight_count();
    spec.bias_offset = offset;
    offset += static_cast<std::size_t>(spec.out_channels);
  }
}

template <class T>
UNet<T>::UNet(const UNetConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  build_layout();
  params_.assign(unet_parameter_count(cfg_), T(0));
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& spec : layers_) {
    const double fan_in = static_cast<double>(spec.in_channels) * spec.kernel * spec.kernel;
    const double stddev = std::sqrt((spec.relu ? 2.0 : 1.0) / fan_in);
    for (std::size_t i = 0; i < spec.weight_count(); ++i) {
      params_[spec.weight_offset + i] = static_cast<T>(stddev * normal(rng));
    }
  }
}

template <class T>
UNet<T>::UNet(const UNetConfig& cfg, std::vector<T> parameters)
    : cfg_(cfg), params_(parameters.begin(), parameters.end()) {
  build_layout();
  if (params_.size() != unet_parameter_count(cfg_)) {
    throw ConfigError("parameter vector has " + std::to_string(params_.size()) +
                      " entries, config expects " + std::to_string(unet_parameter_count(cfg_)));
  }
}

template <class T>
void UNet<T>::check_size(int height, int width) const {
  const int m = 1 << cfg_.depth;
  if (height < m || width < m || height % m != 0 || width % m != 0) {
    throw ConfigError("input " + std::to_string(height) + "x" + std::to_string(width) +
                      " is not divisible by 2^" + std::to_string(cfg_.depth));
  }
}

template <class T>
void UNet<T>::forward(std::span<const T> input, int height, int width, std::span<T> output,
                      UNetWorkspace<T>& ws) const {
  check_size(height, width);
  const std::size_t hw0 = static_cast<std::size_t>(height) * width;
  if (input.size() != hw0 || output.size() != hw0) {
    throw ConfigError("forward: buffer sizes do not match " + std::to_string(height) + "x" +
                      std::to_string(width));
  }
  const int d = cfg_.depth;
  const std::size_t n_layers = layers_.size();
  ws.height = height;
  ws.width = width;
  ws.cols.resize(n_layers);
  ws.act.resize(n_layers);
  ws.pooled.resize(static_cast<std::size_t>(d));
  ws.pool_index.resize(static_cast<std::size_t>(d));
  ws.upsampled.resize(static_cast<std::size_t>(d));
  ws.concat.resize(static_cast<std::size_t>(d));

  auto hw_at = [&](int level) {
    return static_cast<std::size_t>(height >> level) * static_cast<std::size_t>(width >> level);
  };

  resize(ws.input, hw0);
  const T center = static_cast<T>(cfg_.intensity_center);
  const T inv_scale = static_cast<T>(1.0 / cfg_.intensity_scale);
  for (std::size_t i = 0; i < hw0; ++i) ws.input[i] = (input[i] - center) * inv_scale;

  auto run_conv = [&](int idx, const T* in) {
    const ConvSpec& s = layers_[idx];
    const int h = height >> s.level, w = width >> s.level;
    const std::size_t hw = hw_at(s.level);
    const std::size_t k2 = static_cast<std::size_t>(s.kernel) * s.kernel;
    const T* cols = in;
    if (s.kernel == 3) {
      resize(ws.cols[idx], static_cast<std::size_t>(s.in_channels) * k2 * hw);
      im2col3(in, s.in_channels, h, w, ws.cols[idx].data());
      cols = ws.cols[idx].data();
    }
    resize(ws.act[idx], static_cast<std::size_t>(s.out_channels) * hw);
    ConstMapMat<T> wm(params_.data() + s.weight_offset, s.out_channels,
                      static_cast<Eigen::Index>(s.in_channels * k2));
    ConstMapMat<T> cm(cols, static_cast<Eigen::Index>(s.in_channels * k2),
                      static_cast<Eigen::Index>(hw));
    MapMat<T> om(ws.act[idx].data(), s.out_channels, static_cast<Eigen::Index>(hw));
    om.noalias() = wm * cm;
    ConstMapVec<T> bias(params_.data() + s.bias_offset, s.out_channels);
    om.colwise() += bias;
    if (s.relu) {
      for (T& v : ws.act[idx]) v = v > T(0) ? v : T(0);
    }
  };

  const T* cur = ws.input.data();
  for (int l = 0; l < d; ++l) {
    run_conv(enc_a(l), cur);
    run_conv(enc_b(l), ws.act[enc_b(l) - 1].data());
    const int ch = layers_[enc_b(l)].out_channels;
    resize(ws.pooled[l], static_cast<std::size_t>(ch) * hw_at(l + 1));
    resize(ws.pool_index[l], ws.pooled[l].size());
    maxpool2(ws.act[enc_b(l)].data(), ch, height >> l, width >> l, ws.pooled[l].data(),
             ws.pool_index[l].data());
    cur = ws.pooled[l].data();
  }
  run_conv(bottom_a(), cur);
  run_conv(bottom_b(), ws.act[bottom_a()].data());
  cur = ws.act[bottom_b()].data();
  for (int l = d - 1; l >= 0; --l) {
    const int ch_below = layers_[dec_up(l)].in_channels;
    resize(ws.upsampled[l], static_cast<std::size_t>(ch_below) * hw_at(l));
    upsample2(cur, ch_below, height >> (l + 1), width >> (l + 1), ws.upsampled[l].data());
    run_conv(dec_up(l), ws.upsampled[l].data());
    const std::size_t half = ws.act[dec_up(l)].size();
    resize(ws.concat[l], 2 * half);
    std::copy(ws.act[dec_up(l)].begin(), ws.act[dec_up(l)].end(), ws.concat[l].begin());
    std::copy(ws.act[enc_b(l)].begin(), ws.act[enc_b(l)].end(),
              ws.concat[l].begin() + static_cast<std::ptrdiff_t>(half));
    run_conv(dec_a(l), ws.concat[l].data());
    run_conv(dec_b(l), ws.act[dec_a(l)].data());
    cur = ws.act[dec_b(l)].data();
  }
  // The 1x1 conv reads its input directly; remember it for backward.
  ws.cols[final_conv()].clear();
  run_conv(final_conv(), cur);

  const T scale = static_cast<T>(cfg_.intensity_scale);
  const auto& o = ws.act[final_conv()];
  for (std::size_t i = 0; i < hw0; ++i) output[i] = center + scale * o[i];
}

template <class T>
void UNet<T>::backward(std::span<const T> grad_output, UNetWorkspace<T>& ws,
                       std::span<T> grads) const {
  const int height = ws.height, width = ws.width;
  const std::size_t hw0 = static_cast<std::size_t>(height) * width;
  if (grad_output.size() != hw0 || grads.size() != params_.size() || ws.act.empty()) {
    throw ConfigError("backward: called without a matching forward pass");
  }
  const int d = cfg_.depth;
  ws.grad_act.resize(layers_.size());
  auto hw_at = [&](int level) {
    return static_cast<std::size_t>(height >> level) * static_cast<std::size_t>(width >> level);
  };
  auto grad_of = [&](int idx) -> AlignedVector<T>& {
    auto& g = ws.grad_act[idx];
    resize(g, ws.act[idx].size());
    return g;
  };

  // Consumes grad_act[idx] (ReLU-masked in place) and writes the input gradient to `din`
  // (assigned, not accumulated) unless din is null.
  auto conv_back = [&](int idx, const T* in, T* din) {
    const ConvSpec& s = layers_[idx];
    const int h = height >> s.level, w = width >> s.level;
    const auto hw = static_cast<Eigen::Index>(hw_at(s.level));
    const auto k2 = static_cast<Eigen::Index>(s.kernel) * s.kernel;
    auto& g = ws.grad_act[idx];
    if (s.relu) {
      const auto& a = ws.act[idx];
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(a[i] > T(0))) g[i] = T(0);
      }
    }
    const T* cols = s.kernel == 3 ? ws.cols[idx].data() : in;
    ConstMapMat<T> gm(g.data(), s.out_channels, hw);
    ConstMapMat<T> cm(cols, s.in_channels * k2, hw);
    MapMat<T> gw(grads.data() + s.weight_offset, s.out_channels, s.in_channels * k2);
    gw.noalias() += gm * cm.transpose();
    MapVec<T> gb(grads.data() + s.bias_offset, s.out_channels);
    gb += gm.rowwise().sum();
    if (din == nullptr) return;
    ConstMapMat<T> wm(params_.data() + s.weight_offset, s.out_channels, s.in_channels * k2);
    if (s.kernel == 1) {
      MapMat<T> dm(din, s.in_channels, hw);
      dm.noalias() = wm.transpose() * gm;
    } else {
      resize(ws.grad_cols, static_cast<std::size_t>(s.in_channels * k2 * hw));
      MapMat<T> dc(ws.grad_cols.data(), s.in_channels * k2, hw);
      dc.noalias() = wm.transpose() * gm;
      col2im3(ws.grad_cols.data(), s.in_channels, h, w, din);
    }
  };

  {
    auto& g = grad_of(final_conv());
    const T scale = static_cast<T>(cfg_.intensity_scale);
    for (std::size_t i = 0; i < hw0; ++i) g[i] = scale * grad_output[i];
  }
  conv_back(final_conv(), ws.act[dec_b(0)].data(), grad_of(dec_b(0)).data());

  for (int l = 0; l < d; ++l) {
    conv_back(dec_b(l), nullptr, grad_of(dec_a(l)).data());
    resize(ws.grad_buffer, ws.concat[l].size());
    conv_back(dec_a(l), nullptr, ws.grad_buffer.data());
    const std::size_t half = ws.act[dec_up(l)].size();
    auto& g_up = grad_of(dec_up(l));
    std::copy(ws.grad_buffer.begin(), ws.grad_buffer.begin() + static_cast<std::ptrdiff_t>(half),
              g_up.begin());
    auto& g_skip = grad_of(enc_b(l));
    std::copy(ws.grad_buffer.begin() + static_cast<std::ptrdiff_t>(half), ws.grad_buffer.end(),
              g_skip.begin());
    resize(ws.grad_buffer, ws.upsampled[l].size());
    conv_back(dec_up(l), nullptr, ws.grad_buffer.data());
    const int below = l == d - 1 ? bottom_b() : dec_b(l + 1);
    upsample2_backward(ws.grad_buffer.data(), layers_[dec_up(l)].in_channels, height >> (l + 1),
                       width >> (l + 1), grad_of(below).data());
  }

  conv_back(bottom_b(), nullptr, grad_of(bottom_a()).data());
  for (int l = d - 1; l >= 0; --l) {
    // Gradient arriving at pooled[l]: from bottom_a for the deepest level, else enc_a(l + 1).
    resize(ws.grad_buffer, ws.pooled[l].size());
    conv_back(l == d - 1 ? bottom_a() : enc_a(l + 1), nullptr, ws.grad_buffer.data());
    maxpool2_backward(ws.grad_buffer.data(), ws.pool_index[l].data(),
                      layers_[enc_b(l)].out_channels, height >> l, width >> l,
                      ws.grad_act[enc_b(l)].data());
    conv_back(enc_b(l), nullptr, grad_of(enc_a(l)).data());
  }
  conv_back(enc_a(0), nullptr, nullptr);
}

template <class T>
ImagePlane UNet<T>::predict(const ImagePlane& img) const {
  const std::size_t n = img.size();
  AlignedVector<T> in(n), out(n);
  for (std::size_t i = 0; i < n; ++i) in[i] = static_cast<T>(img[i]);
  UNetWorkspace<T> ws;
  forward(in, img.height(), img.width(), out, ws);
  std::vector<double> data(out.begin(), out.end());
  return ImagePlane(img.width(), img.height(), std::move(data), img.domain());
}

template class UNet<float>;
template class UNet<double>;

}  // namespace specknet
