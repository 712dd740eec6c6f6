#include "specknet/baselines/wavelet.hpp"

#include <algorithm>
#include <cmath>

#include "specknet/errors.hpp"

namespace specknet::baselines {

namespace {

constexpr int kTaps = 8;

std::array<double, kTaps> highpass() {
  const auto& h = db4_lowpass();
  std::array<double, kTaps> g{};
  for (int n = 0; n < kTaps; ++n) g[n] = (n % 2 == 0 ? 1.0 : -1.0) * h[kTaps - 1 - n];
  return g;
}

// Periodic analysis of one strided line of even length n.
void analyse(const double* x, std::size_t stride, int n, double* lo, double* hi) {
  const auto& h = db4_lowpass();
  static const auto g = highpass();
  const int half = n / 2;
  for (int k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (int t = 0; t < kTaps; ++t) {
      const double v = x[static_cast<std::size_t>((2 * k + t) % n) * stride];
      a += h[t] * v;
      d += g[t] * v;
    }
    lo[k] = a;
    hi[k] = d;
  }
}

void synthesise(const double* lo, const double* hi, int n, double* x, std::size_t stride) {
  const auto& h = db4_lowpass();
  static const auto g = highpass();
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i) * stride] = 0.0;
  for (int k = 0; k < n / 2; ++k) {
    for (int t = 0; t < kTaps; ++t) {
      x[static_cast<std::size_t>((2 * k + t) % n) * stride] += h[t] * lo[k] + g[t] * hi[k];
    }
  }
}

struct Quad {
  ImagePlane ll, lh, hl, hh;
};

Quad split(const ImagePlane& img) {
  const int h = img.height(), w = img.width();
  ImagePlane rows_lo(w / 2, h, Domain::Arbitrary), rows_hi(w / 2, h, Domain::Arbitrary);
  for (int r = 0; r < h; ++r) {
    analyse(&img.data()[static_cast<std::size_t>(r) * w], 1, w, &rows_lo.at(r, 0), &rows_hi.at(r, 0));
  }
  Quad q{ImagePlane(w / 2, h / 2, Domain::Arbitrary), ImagePlane(w / 2, h / 2, Domain::Arbitrary),
         ImagePlane(w / 2, h / 2, Domain::Arbitrary), ImagePlane(w / 2, h / 2, Domain::Arbitrary)};
  std::vector<double> lo(static_cast<std::size_t>(h / 2)), hi(static_cast<std::size_t>(h / 2));
  for (int c = 0; c < w / 2; ++c) {
    analyse(&rows_lo.data()[c], static_cast<std::size_t>(w / 2), h, lo.data(), hi.data());
    for (int r = 0; r < h / 2; ++r) {
      q.ll.at(r, c) = lo[r];
      q.lh.at(r, c) = hi[r];
    }
    analyse(&rows_hi.data()[c], static_cast<std::size_t>(w / 2), h, lo.data(), hi.data());
    for (int r = 0; r < h / 2; ++r) {
      q.hl.at(r, c) = lo[r];
      q.hh.at(r, c) = hi[r];
    }
  }
  return q;
}

ImagePlane merge(const Quad& q) {
  const int h = 2 * q.ll.height(), w = 2 * q.ll.width();
  ImagePlane rows_lo(w / 2, h, Domain::Arbitrary), rows_hi(w / 2, h, Domain::Arbitrary);
  std::vector<double> lo(static_cast<std::size_t>(h / 2)), hi(static_cast<std::size_t>(h / 2));
  for (int c = 0; c < w / 2; ++c) {
    for (int r = 0; r < h / 2; ++r) {
      lo[r] = q.ll.at(r, c);
      hi[r] = q.lh.at(r, c);
    }
    synthesise(lo.data(), hi.data(), h, &rows_lo.data()[c], static_cast<std::size_t>(w / 2));
    for (int r = 0; r < h / 2; ++r) {
      lo[r] = q.hl.at(r, c);
      hi[r] = q.hh.at(r, c);
    }
    synthesise(lo.data(), hi.data(), h, &rows_hi.data()[c], static_cast<std::size_t>(w / 2));
  }
  ImagePlane out(w, h, Domain::Arbitrary);
  for (int r = 0; r < h; ++r) {
    synthesise(&rows_lo.at(r, 0), &rows_hi.at(r, 0), w, &out.data()[static_cast<std::size_t>(r) * w], 1);
  }
  return out;
}

void check_levels(int height, int width, int levels) {
  if (levels < 1) throw ConfigError("wavelet levels must be at least 1");
  const int m = 1 << levels;
  if (height % m != 0 || width % m != 0) {
    throw ConfigError("image " + std::to_string(height) + "x" + std::to_string(width) +
                      " is not divisible by 2^" + std::to_string(levels));
  }
  const int smallest = std::min(height, width) >> (levels - 1);
  if (smallest < kTaps) {
    throw ConfigError("too many wavelet levels (" + std::to_string(levels) + ") for a " +
                      std::to_string(height) + "x" + std::to_string(width) + " image");
  }
}

double median_abs(std::vector<double> v) {
  for (double& x : v) x = std::abs(x);
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

void soft_threshold(ImagePlane& band, double t) {
  if (t <= 0.0) return;
  for (double& c : band.data()) {
    const double a = std::abs(c) - t;
    c = a > 0.0 ? std::copysign(a, c) : 0.0;
  }
}

void bayes_shrink(ImagePlane& band, double sigma, double scale) {
  double energy = 0.0;
  double peak = 0.0;
  for (double c : band.data()) {
    energy += c * c;
    peak = std::max(peak, std::abs(c));
  }
  const double var_y = energy / static_cast<double>(band.size());
  const double sigma_x = std::sqrt(std::max(var_y - sigma * sigma, 0.0));
  const double t = sigma_x > 0.0 ? sigma * sigma / sigma_x : peak;
  soft_threshold(band, scale * t);
}

int padded_extent(int n, int levels) {
  const int m = 1 << levels;
  return (n + m - 1) / m * m;
}

}  // namespace

const std::array<double, 8>& db4_lowpass() {
  static const std::array<double, 8> h = {
      -0.010597401784997278, 0.032883011666982945, 0.030841381835986965, -0.18703481171888114,
      -0.027983769416983850, 0.63088076792959036,  0.71484657055254153,  0.23037781330885523};
  return h;
}

WaveletPyramid dwt2(const ImagePlane& img, int levels) {
  check_levels(img.height(), img.width(), levels);
  WaveletPyramid p;
  ImagePlane cur = img.retagged(Domain::Arbitrary);
  for (int l = 0; l < levels; ++l) {
    Quad q = split(cur);
    p.details.push_back({std::move(q.lh), std::move(q.hl), std::move(q.hh)});
    cur = std::move(q.ll);
  }
  p.approximation = std::move(cur);
  return p;
}

ImagePlane idwt2(const WaveletPyramid& pyramid) {
  ImagePlane cur = pyramid.approximation;
  for (auto it = pyramid.details.rbegin(); it != pyramid.details.rend(); ++it) {
    cur = merge({cur, it->horizontal, it->vertical, it->diagonal});
  }
  return cur;
}

double estimate_noise_sigma(const ImagePlane& img) {
  const ImagePlane padded = reflect_pad_to(img, padded_extent(img.height(), 1),
                                           padded_extent(img.width(), 1));
  if (std::min(padded.height(), padded.width()) < kTaps) {
    throw ConfigError("image too small for wavelet noise estimation");
  }
  const Quad q = split(padded);
  return median_abs(q.hh.values()) / 0.6745;
}

ImagePlane wavelet_bayes_shrink(const ImagePlane& img, const WaveletParams& params) {
  if (!(params.threshold_scale >= 0.0)) throw ConfigError("threshold_scale must be nonnegative");
  const ImagePlane padded = reflect_pad_to(img, padded_extent(img.height(), params.levels),
                                           padded_extent(img.width(), params.levels));
  WaveletPyramid p = dwt2(padded, params.levels);
  const double sigma = median_abs(p.details.front().diagonal.values()) / 0.6745;
  for (auto& d : p.details) {
    bayes_shrink(d.horizontal, sigma, params.threshold_scale);
    bayes_shrink(d.vertical, sigma, params.threshold_scale);
    bayes_shrink(d.diagonal, sigma, params.threshold_scale);
  }
  ImagePlane out = idwt2(p).retagged(img.domain());
  if (out.same_shape(img)) return out;
  return out.crop(0, 0, img.height(), img.width());
}

}  // namespace specknet::baselines
