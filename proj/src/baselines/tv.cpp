#include "specknet/baselines/tv.hpp"

#include <algorithm>
#include <cmath>

#include "specknet/errors.hpp"

namespace specknet::baselines {

namespace {

// Forward differences, zero on the last row/column.
void gradient(const ImagePlane& u, std::vector<double>& gx, std::vector<double>& gy) {
  const int h = u.height(), w = u.width();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      gx[i] = c + 1 < w ? u.at(r, c + 1) - u.at(r, c) : 0.0;
      gy[i] = r + 1 < h ? u.at(r + 1, c) - u.at(r, c) : 0.0;
    }
  }
}

// Negative adjoint of `gradient`.
void divergence(const std::vector<double>& px, const std::vector<double>& py, int h, int w,
                ImagePlane& out) {
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      double dx = 0.0, dy = 0.0;
      if (w > 1) {
        if (c == 0) dx = px[i];
        else if (c == w - 1) dx = -px[i - 1];
        else dx = px[i] - px[i - 1];
      }
      if (h > 1) {
        if (r == 0) dy = py[i];
        else if (r == h - 1) dy = -py[i - w];
        else dy = py[i] - py[i - w];
      }
      out[i] = dx + dy;
    }
  }
}

}  // namespace

TvResult tv_chambolle(const ImagePlane& img, double weight, int max_iter, double tol) {
  if (!(weight > 0.0) || !std::isfinite(weight)) throw ConfigError("tv weight must be positive");
  if (max_iter < 1) throw ConfigError("tv max_iter must be positive");
  const int h = img.height(), w = img.width();
  const std::size_t n = img.size();
  constexpr double tau = 0.25;

  std::vector<double> px(n, 0.0), py(n, 0.0), gx(n), gy(n);
  ImagePlane div(w, h, Domain::Arbitrary);
  ImagePlane arg(w, h, Domain::Arbitrary);
  TvResult result;
  for (int it = 1; it <= max_iter; ++it) {
    divergence(px, py, h, w, div);
    for (std::size_t i = 0; i < n; ++i) arg[i] = div[i] - img[i] / weight;
    gradient(arg, gx, gy);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double norm = 1.0 + tau * std::hypot(gx[i], gy[i]);
      const double nx = (px[i] + tau * gx[i]) / norm;
      const double ny = (py[i] + tau * gy[i]) / norm;
      change = std::max({change, std::abs(nx - px[i]), std::abs(ny - py[i])});
      px[i] = nx;
      py[i] = ny;
    }
    result.iterations = it;
    if (change < tol) {
      result.converged = true;
      break;
    }
  }
  divergence(px, py, h, w, div);
  result.image = ImagePlane(w, h, img.domain());
  for (std::size_t i = 0; i < n; ++i) result.image[i] = img[i] - weight * div[i];
  return result;
}

double total_variation(const ImagePlane& img) {
  std::vector<double> gx(img.size()), gy(img.size());
  gradient(img, gx, gy);
  double tv = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) tv += std::hypot(gx[i], gy[i]);
  return tv;
}

}  // namespace specknet::baselines
