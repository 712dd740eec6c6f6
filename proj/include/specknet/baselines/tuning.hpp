#pragma once

#include <string>
#include <vector>

#include "specknet/baselines/bm3d.hpp"
#include "specknet/baselines/nlm.hpp"
#include "specknet/baselines/tv.hpp"
#include "specknet/baselines/wavelet.hpp"

namespace specknet::baselines {

struct TvParams {
  double weight = 20.0;
  int max_iter = 200;
  double tol = 1e-4;
};

struct BaselineParams {
  TvParams tv;
  WaveletParams wavelet;
  NlmParams nlm;
  Bm3dParams bm3d;

  void validate() const;
};

/// Candidate values searched on the validation split.
struct BaselineGrid {
  std::vector<double> tv_weight{5, 10, 20, 35, 50, 75, 100};
  std::vector<double> wavelet_threshold_scale{0.5, 0.75, 1.0, 1.5, 2.0, 3.0};
  std::vector<double> nlm_h{10, 15, 20, 30, 40, 55, 70};
  std::vector<double> bm3d_sigma{15, 25, 35, 50, 65, 80};
};

struct ImagePair {
  ImagePlane noisy;
  ImagePlane clean;
};

enum class Baseline { TV, Wavelet, NLM, BM3D };
std::string to_string(Baseline b);

ImagePlane run_baseline(Baseline which, const ImagePlane& img, const BaselineParams& params);

/// Grid search maximising mean PSNR over `val`. Disabled BM3D keeps its parameters.
BaselineParams tune_baselines(const std::vector<ImagePair>& val, const BaselineParams& start,
                              const BaselineGrid& grid);

}  // namespace specknet::baselines
