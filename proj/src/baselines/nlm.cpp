#include "specknet/baselines/nlm.hpp"

#include <cmath>
#include <vector>

#include "specknet/errors.hpp"

namespace specknet::baselines {

// For every search offset the squared-difference image is box-summed with an integral
// image, so each offset costs O(pixels) regardless of the patch radius.
ImagePlane nlm(const ImagePlane& img, const NlmParams& params) {
  if (params.patch_radius < 1 || params.search_radius < 1) {
    throw ConfigError("nlm radii must be at least 1");
  }
  if (!(params.h > 0.0)) throw ConfigError("nlm h must be positive");
  const int h = img.height(), w = img.width();
  const int pr = params.patch_radius, sr = params.search_radius;

  // Reflected copy covering every sample a patch comparison can touch.
  const int margin = pr + sr;
  const int ph = h + 2 * margin, pw = w + 2 * margin;
  std::vector<double> pad(static_cast<std::size_t>(ph) * pw);
  for (int r = 0; r < ph; ++r) {
    const int sr_idx = reflect_index(r - margin, h);
    for (int c = 0; c < pw; ++c) {
      pad[static_cast<std::size_t>(r) * pw + c] = img.at(sr_idx, reflect_index(c - margin, w));
    }
  }

  // Integral image domain: patch centres' neighbourhoods, rows/cols [-pr, h-1+pr].
  const int ih = h + 2 * pr, iw = w + 2 * pr;
  std::vector<double> integral(static_cast<std::size_t>(ih + 1) * (iw + 1), 0.0);
  std::vector<double> weight_sum(img.size(), 0.0), delta_sum(img.size(), 0.0);
  const double inv_area = 1.0 / static_cast<double>((2 * pr + 1) * (2 * pr + 1));
  const double inv_h2 = 1.0 / (params.h * params.h);

  for (int dy = -sr; dy <= sr; ++dy) {
    for (int dx = -sr; dx <= sr; ++dx) {
      for (int r = 0; r < ih; ++r) {
        double row_acc = 0.0;
        const double* a = &pad[static_cast<std::size_t>(r + margin - pr) * pw + (margin - pr)];
        const double* b = &pad[static_cast<std::size_t>(r + margin - pr + dy) * pw + (margin - pr + dx)];
        double* out = &integral[static_cast<std::size_t>(r + 1) * (iw + 1) + 1];
        const double* above = &integral[static_cast<std::size_t>(r) * (iw + 1) + 1];
        for (int c = 0; c < iw; ++c) {
          const double d = a[c] - b[c];
          row_acc += d * d;
          out[c] = above[c] + row_acc;
        }
      }
      for (int r = 0; r < h; ++r) {
        const int qr = r + dy;
        if (qr < 0 || qr >= h) continue;
        for (int c = 0; c < w; ++c) {
          const int qc = c + dx;
          if (qc < 0 || qc >= w) continue;
          // Patch centred at (r, c) spans integral rows [r, r + 2pr], cols [c, c + 2pr].
          const std::size_t top = static_cast<std::size_t>(r) * (iw + 1);
          const std::size_t bottom = static_cast<std::size_t>(r + 2 * pr + 1) * (iw + 1);
          const double ssd = integral[bottom + c + 2 * pr + 1] - integral[top + c + 2 * pr + 1] -
                             integral[bottom + c] + integral[top + c];
          const double weight = std::exp(-ssd * inv_area * inv_h2);
          const std::size_t i = static_cast<std::size_t>(r) * w + c;
          weight_sum[i] += weight;
          delta_sum[i] += weight * (img.at(qr, qc) - img[i]);
        }
      }
    }
  }

  ImagePlane out(w, h, img.domain());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = img[i] + delta_sum[i] / weight_sum[i];
  return out;
}

}  // namespace specknet::baselines
