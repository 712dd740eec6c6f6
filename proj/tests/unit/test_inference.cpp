#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "specknet/errors.hpp"
#include "specknet/inference.hpp"
#include "specknet/metrics.hpp"

using namespace specknet;

namespace {

// A depth-1 U-Net whose output equals its input: the first conv splits the normalised
// input into ReLU(u) and ReLU(-u), the skip carries both through, the upsampling branch
// is zero and the final 1x1 conv recombines ch0 - ch1.
template <class T>
UNet<T> identity_unet(int base) {
  UNetConfig cfg;
  cfg.depth = 1;
  cfg.base_channels = base;
  UNet<T> net(cfg, std::vector<T>(unet_parameter_count(cfg), T(0)));
  auto p = net.parameters();
  auto w = [&](int layer, int out, int in) -> T& {
    const ConvSpec& s = net.layers()[layer];
    const int taps = s.kernel * s.kernel;
    return p[s.weight_offset + static_cast<std::size_t>(out) * s.in_channels * taps +
             static_cast<std::size_t>(in) * taps + taps / 2];
  };
  w(net.enc_a(0), 0, 0) = 1;
  w(net.enc_a(0), 1, 0) = -1;
  for (int k = 0; k < base; ++k) {
    w(net.enc_b(0), k, k) = 1;
    w(net.dec_a(0), k, base + k) = 1;
    w(net.dec_b(0), k, k) = 1;
  }
  w(net.final_conv(), 0, 0) = 1;
  w(net.final_conv(), 0, 1) = -1;
  return net;
}

TrainedModel identity_model(int patch) {
  const UNet<float> net = identity_unet<float>(2);
  TrainedModel m;
  m.unet = net.config();
  m.patch_size = patch;
  m.weights.assign(net.parameters().begin(), net.parameters().end());
  return m;
}

double max_abs_diff(const ImagePlane& a, const ImagePlane& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("tile_starts cover the extent and end flush") {
  CHECK(tile_starts(128, 128, 32) == std::vector<int>{0});
  CHECK(tile_starts(200, 128, 32) == std::vector<int>{0, 72});
  CHECK(tile_starts(256, 128, 32) == std::vector<int>{0, 96, 128});
  CHECK(tile_starts(10, 4, 0) == std::vector<int>{0, 4, 6});
  for (int extent : {64, 65, 99, 450, 900}) {
    const auto s = tile_starts(extent, 64, 16);
    CHECK(s.front() == 0);
    CHECK(s.back() == extent - 64);
    for (std::size_t i = 1; i < s.size(); ++i) {
      CHECK(s[i] > s[i - 1]);
      CHECK(s[i] - s[i - 1] <= 48);
    }
  }
  CHECK_THROWS_AS(tile_starts(100, 32, 32), ConfigError);
  CHECK_THROWS_AS(tile_starts(100, 32, 40), ConfigError);
}

TEST_CASE("feather weights form a partition of unity") {
  for (auto [h, w, tile, overlap] : {std::array{450, 900, 128, 32}, std::array{64, 64, 64, 16},
                                     std::array{70, 33, 32, 8}, std::array{20, 10, 32, 4},
                                     std::array{100, 100, 16, 0}}) {
    const ImagePlane u = blend_partition(h, w, tile, overlap);
    CHECK(u.height() == h);
    CHECK(u.width() == w);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(u[i] - 1.0));
    CHECK(worst < 1e-9);
  }
  CHECK(feather_weight(0, 64, 15) == doctest::Approx(1.0 / 16.0));
  CHECK(feather_weight(32, 64, 15) == 1.0);
  CHECK(feather_weight(63, 64, 15) == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("tiling an identity patch function reproduces the image") {
  const ImagePlane img = testing::random_image(90, 70, 4, 0.0, 255.0, Domain::AnscombeRescaled);
  const PatchFunction identity = [](const ImagePlane& t) { return t; };
  for (auto [tile, overlap] : {std::pair{32, 8}, std::pair{16, 0}, std::pair{128, 32}}) {
    const ImagePlane out = tile_process(identity, img, tile, overlap);
    CHECK(out.same_shape(img));
    CHECK(out.domain() == img.domain());
    CHECK(max_abs_diff(out, img) < 1e-9);
  }
}

TEST_CASE("tile_process calls the function once for an exact-size image") {
  const ImagePlane img = testing::random_image(64, 64, 5);
  int calls = 0;
  const PatchFunction shift = [&](const ImagePlane& t) {
    ++calls;
    ImagePlane o = t;
    for (double& v : o.data()) v += 1.0;
    return o;
  };
  const ImagePlane out = tile_process(shift, img, 64, 16);
  CHECK(calls == 1);
  CHECK(out[10] == img[10] + 1.0);
  CHECK_THROWS_AS(tile_process(shift, img, 64, 64), ConfigError);
  CHECK_THROWS_AS(tile_process(shift, img, 0, 0), ConfigError);
}

TEST_CASE("hand-built identity network reproduces its input through tiling") {
  const ImagePlane img = testing::random_image(120, 80, 6, 0.0, 255.0, Domain::AnscombeRescaled);
  const UNet<double> dnet = identity_unet<double>(3);
  const PatchFunction run = [&](const ImagePlane& t) { return dnet.predict(t); };
  CHECK(max_abs_diff(tile_process(run, img, 32, 8), img) < 1e-9);

  const UNet<float> fnet = identity_unet<float>(2);
  const ImagePlane out = tile_process(fnet, img, 32, 8);
  CHECK(max_abs_diff(out, img) < 1e-3);
}

TEST_CASE("denoise pipeline shape, iteration trace and clamping") {
  const TrainedModel model = identity_model(64);
  const ImagePlane noisy = testing::random_u8_image(900, 450, 7);
  InferenceConfig icfg;
  icfg.iterations = 3;
  icfg.tile_overlap = 16;
  icfg.inverse_mode = InverseMode::Algebraic;
  const DenoiseResult r = denoise_with_trace(model, noisy, icfg);
  CHECK(r.output.width() == 900);
  CHECK(r.output.height() == 450);
  CHECK(r.output.domain() == Domain::PixelU8Range);
  REQUIRE(r.iterations.size() == 3);
  CHECK(r.iterations.back().values() == r.output.values());
  // Identity network + algebraic inverse: the pixel image survives the round trip.
  CHECK(max_abs_diff(r.output, noisy) < 0.05);
  CHECK(r.output.min() >= 0.0);
  CHECK(r.output.max() <= 255.0);

  InferenceConfig bad = icfg;
  bad.tile_size = 64;
  bad.tile_overlap = 64;
  CHECK_THROWS_AS(denoise(model, noisy, bad), ConfigError);
  bad.tile_overlap = 8;
  bad.tile_size = 33;
  CHECK_THROWS_AS(denoise(model, noisy, bad), ConfigError);
  bad = icfg;
  bad.iterations = 0;
  CHECK_THROWS_AS(denoise(model, noisy, bad), ConfigError);
}

TEST_CASE("rescaled_to_pixels clamps to the valid range") {
  ImagePlane r(4, 1, Domain::AnscombeRescaled);
  r[0] = -40.0;
  r[1] = 0.0;
  r[2] = 255.0;
  r[3] = 400.0;
  for (InverseMode mode : {InverseMode::Algebraic, InverseMode::Asymptotic, InverseMode::ClosedFormUnbiased}) {
    const ImagePlane px = rescaled_to_pixels(r, mode);
    CHECK(px.domain() == Domain::PixelU8Range);
    for (std::size_t i = 0; i < px.size(); ++i) {
      CHECK(px[i] >= 0.0);
      CHECK(px[i] <= 255.0);
    }
    CHECK(px[0] == px[1]);
    CHECK(px[3] == 255.0);
  }
  CHECK(rescaled_to_pixels(r, InverseMode::Algebraic)[2] == doctest::Approx(255.0).epsilon(1e-12));
}
