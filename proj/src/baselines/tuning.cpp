#include "specknet/baselines/tuning.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "specknet/errors.hpp"
#include "specknet/metrics.hpp"

namespace specknet::baselines {

void BaselineParams::validate() const {
  if (!(tv.weight > 0.0) || tv.max_iter < 1 || !(tv.tol > 0.0)) {
    throw ConfigError("tv parameters must be positive");
  }
  if (wavelet.levels < 1 || !(wavelet.threshold_scale > 0.0)) {
    throw ConfigError("wavelet levels and threshold_scale must be positive");
  }
  if (nlm.patch_radius < 1 || nlm.search_radius < 1 || !(nlm.h > 0.0)) {
    throw ConfigError("nlm radii must be >= 1 and h positive");
  }
  if (!(bm3d.sigma > 0.0)) throw ConfigError("bm3d sigma must be positive");
}

std::string to_string(Baseline b) {
  switch (b) {
    case Baseline::TV: return "TV";
    case Baseline::Wavelet: return "Wavelet";
    case Baseline::NLM: return "NLM";
    case Baseline::BM3D: return "BM3D";
  }
  return "unknown";
}

ImagePlane run_baseline(Baseline which, const ImagePlane& img, const BaselineParams& p) {
  switch (which) {
    case Baseline::TV: return tv_chambolle(img, p.tv.weight, p.tv.max_iter, p.tv.tol).image;
    case Baseline::Wavelet: return wavelet_bayes_shrink(img, p.wavelet);
    case Baseline::NLM: return nlm(img, p.nlm);
    case Baseline::BM3D: return bm3d(img, p.bm3d);
  }
  throw ConfigError("unknown baseline");
}

namespace {

double mean_psnr(Baseline which, const std::vector<ImagePair>& val, const BaselineParams& p) {
  double acc = 0.0;
  for (const auto& pair : val) acc += psnr(pair.clean, quantize_u8(run_baseline(which, pair.noisy, p)));
  return acc / static_cast<double>(val.size());
}

template <class T>
void search(Baseline which, const std::vector<ImagePair>& val, BaselineParams& best,
            const std::vector<T>& candidates, const std::function<void(BaselineParams&, T)>& set) {
  double best_score = -std::numeric_limits<double>::infinity();
  BaselineParams chosen = best;
  for (const T& v : candidates) {
    BaselineParams trial = best;
    set(trial, v);
    const double score = mean_psnr(which, val, trial);
    if (score > best_score) {
      best_score = score;
      chosen = trial;
    }
  }
  best = chosen;
}

}  // namespace

BaselineParams tune_baselines(const std::vector<ImagePair>& val, const BaselineParams& start,
                              const BaselineGrid& grid) {
  if (val.empty()) throw DataError("baseline tuning needs at least one validation image");
  BaselineParams best = start;
  search<double>(Baseline::TV, val, best, grid.tv_weight, [](BaselineParams& p, double v) { p.tv.weight = v; });
  search<double>(Baseline::Wavelet, val, best, grid.wavelet_threshold_scale,
                 [](BaselineParams& p, double v) { p.wavelet.threshold_scale = v; });
  search<double>(Baseline::NLM, val, best, grid.nlm_h, [](BaselineParams& p, double v) { p.nlm.h = v; });
  if (best.bm3d.enabled && bm3d_available()) {
    search<double>(Baseline::BM3D, val, best, grid.bm3d_sigma,
                   [](BaselineParams& p, double v) { p.bm3d.sigma = v; });
  }
  return best;
}

}  // namespace specknet::baselines
