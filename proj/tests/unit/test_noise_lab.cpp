#include <cmath>
#include <fstream>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "specknet/errors.hpp"
#include "specknet/noise.hpp"
#include "specknet/probe.hpp"

using namespace specknet;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(const ImagePlane& img) {
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    s += img[i];
    s2 += img[i] * img[i];
  }
  const double n = static_cast<double>(img.size());
  return {s / n, (s2 - s * s / n) / (n - 1.0)};
}

ImagePlane rescaled_constant(int w, int h, double v) {
  return ImagePlane(w, h, Domain::AnscombeRescaled, v);
}

}  // namespace

TEST_CASE("add_gaussian") {
  const ImagePlane img = testing::random_image(40, 30, 1);
  const ImagePlane same = add_gaussian(img, 0.0, 5);
  CHECK(same.values() == img.values());

  const ImagePlane zero(1000, 1000, Domain::Arbitrary, 0.0);
  const auto m = moments(add_gaussian(zero, 50.0, 42));
  CHECK(std::abs(m.mean) < 0.2);
  CHECK(std::sqrt(m.var) >= 49.8);
  CHECK(std::sqrt(m.var) <= 50.2);

  CHECK(add_gaussian(img, 3.0, 9).values() == add_gaussian(img, 3.0, 9).values());
  CHECK(add_gaussian(img, 3.0, 9).values() != add_gaussian(img, 3.0, 10).values());
  CHECK(add_gaussian(img, 3.0, 9).domain() == img.domain());
  CHECK_THROWS_AS(add_gaussian(img, -1.0, 9), ConfigError);
}

TEST_CASE("noisy triple construction identities") {
  const ImagePlane x = testing::random_image(32, 24, 2, 0.0, 255.0, Domain::AnscombeRescaled);
  const NoiseSpec spec{50.0, 50.0, 1234};
  const NoisyTriple t = make_noisy_triple(x, spec, true);
  REQUIRE(t.m1.has_value());
  REQUIRE(t.m2.has_value());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(t.y_noisier[i] == x[i] + (*t.m1)[i]);
    CHECK(t.z_noisier_plus[i] == t.y_noisier[i] + (*t.m2)[i]);
  }
  CHECK(t.z_noisier_plus.domain() == Domain::AnscombeRescaled);

  const NoisyTriple again = make_noisy_triple(x, spec);
  CHECK(again.z_noisier_plus.values() == t.z_noisier_plus.values());
  CHECK_FALSE(again.m1.has_value());

  const NoisyTriple zero = make_noisy_triple(x, NoiseSpec{0.0, 0.0, 3});
  CHECK(zero.y_noisier.values() == x.values());
  CHECK(zero.z_noisier_plus.values() == x.values());

  CHECK_THROWS_AS(make_noisy_triple(x.retagged(Domain::Anscombe), spec), DomainError);
  CHECK_THROWS_AS(make_noisy_triple(x, NoiseSpec{-1.0, 50.0, 0}), ConfigError);
}

TEST_CASE("z - x has the summed variance and independent layers") {
  const ImagePlane x = rescaled_constant(1000, 1000, 100.0);
  const NoisyTriple t = make_noisy_triple(x, NoiseSpec{50.0, 50.0, 77}, true);
  ImagePlane diff(1000, 1000, Domain::Arbitrary);
  double cov = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    diff[i] = t.z_noisier_plus[i] - x[i];
    cov += (*t.m1)[i] * (*t.m2)[i];
  }
  const auto m = moments(diff);
  CHECK(std::abs(m.mean) <= 0.2);
  CHECK(m.var >= 2 * 2500 * 0.99);
  CHECK(m.var <= 2 * 2500 * 1.01);
  const double corr = cov / static_cast<double>(x.size()) / 2500.0;
  CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("gamma speckle") {
  SpeckleSpec spec;
  spec.seed = 8;
  const ImagePlane g = gamma_field(1000, 1000, spec);
  CHECK(g.min() > 0.0);
  const auto m = moments(g);
  CHECK(std::abs(m.mean - 1.0) < 0.005);
  CHECK(std::abs(m.var - 0.25) / 0.25 < 0.02);

  const ImagePlane hundred(1000, 1000, Domain::PixelU8Range, 100.0);
  const auto s = moments(apply_speckle(hundred, spec));
  CHECK(s.mean >= 99.5);
  CHECK(s.mean <= 100.5);

  const ImagePlane zero(16, 16, Domain::PixelU8Range, 0.0);
  CHECK(apply_speckle(zero, spec).max() == 0.0);

  SpeckleSpec raw{2.0, 3.0, 4, false};
  const auto r = moments(gamma_field(1000, 1000, raw));
  CHECK(std::abs(r.mean - 6.0) / 6.0 < 0.01);

  CHECK_THROWS_AS(gamma_field(4, 4, SpeckleSpec{0.0, 1.0, 0, true}), ConfigError);
  CHECK_THROWS_AS(gamma_field(4, 4, SpeckleSpec{2.0, -1.0, 0, false}), ConfigError);
}

TEST_CASE("probe identity holds in every reliable bin") {
  const auto r = conditional_expectation_probe(UniformPixelPrior{}, NoiseSpec{50.0, 50.0, 5}, 1'000'000, 40);
  REQUIRE(r.bins() == 40);
  int reliable = 0;
  for (std::size_t b = 0; b < r.bins(); ++b) {
    if (!r.reliable[b]) continue;
    ++reliable;
    const double gap = r.e_y_given_z[b] - r.e_x_given_z[b] - r.e_m1_given_z[b];
    CHECK(std::abs(gap) <= 4.0 * r.stderr_m1[b] + 1e-9);
  }
  CHECK(reliable >= 30);
}

TEST_CASE("probe matches the Gaussian conditioning closed form") {
  const GaussianScalarPrior prior{128.0, 40.0};
  const NoiseSpec spec{50.0, 50.0, 6};
  const auto r = conditional_expectation_probe(prior, spec, 1'000'000, 30);
  const double denom = 40.0 * 40.0 + 50.0 * 50.0 + 50.0 * 50.0;
  for (std::size_t b = 0; b < r.bins(); ++b) {
    if (!r.reliable[b]) continue;
    const double expected = 2500.0 * (r.mean_z[b] - 128.0) / denom;
    CHECK(std::abs(r.e_m1_given_z[b] - expected) <= 4.0 * r.stderr_m1[b]);
  }
}

TEST_CASE("probe with sigma1 = 0 reports zero M1") {
  const auto r = conditional_expectation_probe(UniformPixelPrior{}, NoiseSpec{0.0, 50.0, 7}, 200'000, 12);
  for (std::size_t b = 0; b < r.bins(); ++b) {
    CHECK(std::abs(r.e_m1_given_z[b]) <= 4.0 * r.stderr_m1[b] + 1e-12);
  }
}

TEST_CASE("probe input checks and CSV") {
  CHECK_THROWS_AS(conditional_expectation_probe(UniformPixelPrior{}, NoiseSpec{}, 1000, 20), ConfigError);
  CHECK_THROWS_AS(conditional_expectation_probe(UniformPixelPrior{}, NoiseSpec{}, 200'000, 5), ConfigError);

  const auto r = conditional_expectation_probe(UniformPixelPrior{}, NoiseSpec{50.0, 50.0, 1}, 100'000, 15);
  const auto path = testing::scratch_dir("probe_csv") / "probe.csv";
  write_probe_csv(r, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "bin_center,n,E_y,E_x,E_m1,stderr");
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 15);
}
