#include "specknet/baselines/bm3d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "specknet/errors.hpp"

namespace specknet::baselines {

bool bm3d_available() {
#ifdef SPECKNET_WITH_BM3D
  return true;
#else
  return false;
#endif
}

#ifdef SPECKNET_WITH_BM3D

namespace {

constexpr double kHardThreshold = 2.7;

struct Candidate {
  double distance;
  int row, col;
};

class BlockTransform {
 public:
  explicit BlockTransform(int n) : n_(n), basis_(static_cast<std::size_t>(n) * n) {
    for (int k = 0; k < n; ++k) {
      const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
      for (int i = 0; i < n; ++i) {
        basis_[static_cast<std::size_t>(k) * n + i] =
            scale * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
      }
    }
    tmp_.resize(static_cast<std::size_t>(n) * n);
  }

  // In-place orthonormal 2-D DCT-II (forward) or its transpose (inverse).
  void apply(double* block, bool inverse) {
    const int n = n_;
    auto at = [&](int k, int i) {
      return inverse ? basis_[static_cast<std::size_t>(i) * n + k] : basis_[static_cast<std::size_t>(k) * n + i];
    };
    for (int r = 0; r < n; ++r) {
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += at(k, i) * block[r * n + i];
        tmp_[static_cast<std::size_t>(r) * n + k] = acc;
      }
    }
    for (int c = 0; c < n; ++c) {
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += at(k, i) * tmp_[static_cast<std::size_t>(i) * n + c];
        block[k * n + c] = acc;
      }
    }
  }

 private:
  int n_;
  std::vector<double> basis_;
  std::vector<double> tmp_;
};

// Normalised Walsh-Hadamard along the group axis; self-inverse. count is a power of two.
void hadamard(std::vector<double>& group, int count, int block_len) {
  for (int len = 1; len < count; len *= 2) {
    for (int i = 0; i < count; i += 2 * len) {
      for (int j = i; j < i + len; ++j) {
        double* a = &group[static_cast<std::size_t>(j) * block_len];
        double* b = &group[static_cast<std::size_t>(j + len) * block_len];
        for (int t = 0; t < block_len; ++t) {
          const double x = a[t], y = b[t];
          a[t] = x + y;
          b[t] = x - y;
        }
      }
    }
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(count));
  for (double& v : group) v *= norm;
}

std::vector<int> block_starts(int extent, int block, int step) {
  std::vector<int> s;
  for (int p = 0; p + block <= extent; p += step) s.push_back(p);
  if (s.empty() || s.back() != extent - block) s.push_back(extent - block);
  return s;
}

double block_distance(const ImagePlane& img, int r0, int c0, int r1, int c1, int n) {
  double acc = 0.0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double d = img.at(r0 + r, c0 + c) - img.at(r1 + r, c1 + c);
      acc += d * d;
    }
  }
  return acc / static_cast<double>(n * n);
}

std::vector<Candidate> match(const ImagePlane& guide, int r0, int c0, const Bm3dParams& p,
                             double tau) {
  const int n = p.block_size;
  std::vector<Candidate> found;
  const int rlo = std::max(0, r0 - p.search_radius), rhi = std::min(guide.height() - n, r0 + p.search_radius);
  const int clo = std::max(0, c0 - p.search_radius), chi = std::min(guide.width() - n, c0 + p.search_radius);
  for (int r = rlo; r <= rhi; ++r) {
    for (int c = clo; c <= chi; ++c) {
      const double d = (r == r0 && c == c0) ? 0.0 : block_distance(guide, r0, c0, r, c, n);
      if (d <= tau) found.push_back({d, r, c});
    }
  }
  std::stable_sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
    return a.distance < b.distance;
  });
  int keep = 1;
  while (keep * 2 <= std::min<int>(p.max_group, static_cast<int>(found.size()))) keep *= 2;
  found.resize(static_cast<std::size_t>(keep));
  return found;
}

void gather(const ImagePlane& img, const std::vector<Candidate>& group, int n,
            std::vector<double>& out, double& mean) {
  const std::size_t len = static_cast<std::size_t>(n) * n;
  out.resize(group.size() * len);
  double sum = 0.0;
  for (std::size_t g = 0; g < group.size(); ++g) {
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const double v = img.at(group[g].row + r, group[g].col + c);
        out[g * len + static_cast<std::size_t>(r) * n + c] = v;
        sum += v;
      }
    }
  }
  mean = sum / static_cast<double>(out.size());
  for (double& v : out) v -= mean;
}

void forward3d(std::vector<double>& group, int count, int n, BlockTransform& t) {
  const std::size_t len = static_cast<std::size_t>(n) * n;
  for (int g = 0; g < count; ++g) t.apply(&group[g * len], false);
  hadamard(group, count, static_cast<int>(len));
}

void inverse3d(std::vector<double>& group, int count, int n, BlockTransform& t) {
  const std::size_t len = static_cast<std::size_t>(n) * n;
  hadamard(group, count, static_cast<int>(len));
  for (int g = 0; g < count; ++g) t.apply(&group[g * len], true);
}

// Accumulates weighted deviations from the noisy image so that aggregation of exact
// estimates reproduces them exactly.
struct Aggregator {
  const ImagePlane& noisy;
  std::vector<double> delta, mass;

  explicit Aggregator(const ImagePlane& y) : noisy(y), delta(y.size(), 0.0), mass(y.size(), 0.0) {}

  void add(const std::vector<Candidate>& group, const std::vector<double>& est, double mean, int n,
           double weight) {
    const std::size_t len = static_cast<std::size_t>(n) * n;
    for (std::size_t g = 0; g < group.size(); ++g) {
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          const std::size_t i = static_cast<std::size_t>(group[g].row + r) * noisy.width() + group[g].col + c;
          delta[i] += weight * (est[g * len + static_cast<std::size_t>(r) * n + c] + mean - noisy[i]);
          mass[i] += weight;
        }
      }
    }
  }

  ImagePlane result() const {
    ImagePlane out = noisy;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (mass[i] > 0.0) out[i] += delta[i] / mass[i];
    }
    return out;
  }
};

}  // namespace

ImagePlane bm3d(const ImagePlane& img, const Bm3dParams& params) {
  if (!params.enabled) throw CapabilityError("bm3d baseline is disabled in this configuration");
  if (!(params.sigma > 0.0)) throw ConfigError("bm3d sigma must be positive");
  if (params.block_size < 2 || params.step < 1 || params.search_radius < 1 || params.max_group < 1) {
    throw ConfigError("bm3d block/step/search/group parameters must be positive");
  }
  const int n = params.block_size;
  if (img.height() < n || img.width() < n) throw ConfigError("image smaller than bm3d block");
  const double sigma2 = params.sigma * params.sigma;
  const double tau1 = params.sigma <= 40.0 ? 2500.0 : 5000.0;
  const double tau2 = params.sigma <= 40.0 ? 400.0 : 3500.0;
  const auto rows = block_starts(img.height(), n, params.step);
  const auto cols = block_starts(img.width(), n, params.step);
  BlockTransform t(n);
  std::vector<double> group, guide_group;

  // Stage 1: hard thresholding.
  Aggregator basic_acc(img);
  for (int r0 : rows) {
    for (int c0 : cols) {
      const auto g = match(img, r0, c0, params, tau1);
      const int count = static_cast<int>(g.size());
      double mean = 0.0;
      gather(img, g, n, group, mean);
      forward3d(group, count, n, t);
      int retained = 0;
      for (double& v : group) {
        if (std::abs(v) < kHardThreshold * params.sigma) v = 0.0;
        else ++retained;
      }
      inverse3d(group, count, n, t);
      basic_acc.add(g, group, mean, n, 1.0 / (sigma2 * std::max(1, retained)));
    }
  }
  const ImagePlane basic = basic_acc.result();

  // Stage 2: empirical Wiener filtering with grouping on the basic estimate.
  Aggregator final_acc(img);
  for (int r0 : rows) {
    for (int c0 : cols) {
      const auto g = match(basic, r0, c0, params, tau2);
      const int count = static_cast<int>(g.size());
      double mean = 0.0, guide_mean = 0.0;
      gather(img, g, n, group, mean);
      gather(basic, g, n, guide_group, guide_mean);
      forward3d(group, count, n, t);
      forward3d(guide_group, count, n, t);
      double energy = 0.0;
      for (std::size_t i = 0; i < group.size(); ++i) {
        const double b2 = guide_group[i] * guide_group[i];
        const double shrink = b2 / (b2 + sigma2);
        group[i] *= shrink;
        energy += shrink * shrink;
      }
      inverse3d(group, count, n, t);
      final_acc.add(g, group, mean, n, 1.0 / (sigma2 * std::max(energy, 1e-12)));
    }
  }
  return final_acc.result();
}

#else

ImagePlane bm3d(const ImagePlane&, const Bm3dParams&) {
  throw CapabilityError("bm3d baseline was not compiled in (SPECKNET_WITH_BM3D=OFF)");
}

#endif

}  // namespace specknet::baselines
