#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "specknet/noise.hpp"

namespace specknet {

/// Scalar prior over clean intensities: uniform on [0, 255].
struct UniformPixelPrior {};
struct GaussianScalarPrior {
  double mean = 128.0;
  double stddev = 40.0;
};
using ScalarPrior = std::variant<UniformPixelPrior, GaussianScalarPrior>;

/// Binned Monte-Carlo estimates of E[Y|Z], E[X|Z] and E[M1|Z] for y = x + M1, z = y + M2.
struct ProbeReport {
  std::vector<double> bin_centers;
  std::vector<double> mean_z;  ///< average z of the samples in each bin
  std::vector<std::uint64_t> counts;
  std::vector<double> e_y_given_z;
  std::vector<double> e_x_given_z;
  std::vector<double> e_m1_given_z;
  std::vector<double> stderr_m1;  ///< standard error of e_m1_given_z
  std::vector<bool> reliable;     ///< at least kMinReliableCount samples

  static constexpr std::uint64_t kMinReliableCount = 100;

  std::size_t bins() const { return bin_centers.size(); }
};

/// Bins span the 0.5% .. 99.5% quantiles of z with equal widths; samples outside are dropped.
/// Requires n_samples >= 1e5 and n_bins >= 10.
ProbeReport conditional_expectation_probe(const ScalarPrior& prior, const NoiseSpec& spec,
                                          std::uint64_t n_samples, int n_bins);

/// CSV with header bin_center,n,E_y,E_x,E_m1,stderr; one row per bin.
void write_probe_csv(const ProbeReport& report, const std::filesystem::path& path);

}  // namespace specknet
