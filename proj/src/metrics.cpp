#include "specknet/metrics.hpp"

#include <cmath>
#include <limits>

#include "specknet/errors.hpp"

namespace specknet {

namespace {

void check_max(double max_val, std::string_view op) {
  if (!(max_val > 0.0) || !std::isfinite(max_val)) {
    throw ConfigError(std::string(op) + ": max_val must be positive");
  }
}

}  // namespace

double mean_squared_error(const ImagePlane& a, const ImagePlane& b) {
  require_same_shape(a, b, "mean_squared_error");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr(const ImagePlane& reference, const ImagePlane& test, double max_val) {
  require_same_shape(reference, test, "psnr");
  check_max(max_val, "psnr");
  const double mse = mean_squared_error(reference, test);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_val * max_val / mse);
}

double ssim(const ImagePlane& reference, const ImagePlane& test, double max_val) {
  require_same_shape(reference, test, "ssim");
  check_max(max_val, "ssim");
  const double n = static_cast<double>(reference.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    mx += reference[i];
    my += test[i];
  }
  mx /= n;
  my /= n;
  double vx = 0.0, vy = 0.0, cxy = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double dx = reference[i] - mx;
    const double dy = test[i] - my;
    vx += dx * dx;
    vy += dy * dy;
    cxy += dx * dy;
  }
  vx /= n;
  vy /= n;
  cxy /= n;
  const double c1 = (0.01 * max_val) * (0.01 * max_val);
  const double c2 = (0.03 * max_val) * (0.03 * max_val);
  return ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
}

MetricPair evaluate_pair(const ImagePlane& reference, const ImagePlane& test, double max_val) {
  return {psnr(reference, test, max_val), ssim(reference, test, max_val)};
}

}  // namespace specknet
