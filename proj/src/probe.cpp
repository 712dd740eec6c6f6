#include "specknet/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

#include "specknet/errors.hpp"
#include "specknet/rng.hpp"

namespace specknet {

namespace {

double quantile(std::vector<double> values, double q) {
  const auto k = static_cast<std::size_t>(q * static_cast<double>(values.size() - 1));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

}  // namespace

ProbeReport conditional_expectation_probe(const ScalarPrior& prior, const NoiseSpec& spec,
                                          std::uint64_t n_samples, int n_bins) {
  spec.validate();
  if (n_samples < 100000) throw ConfigError("probe needs at least 1e5 samples");
  if (n_bins < 10) throw ConfigError("probe needs at least 10 bins");
  if (const auto* g = std::get_if<GaussianScalarPrior>(&prior); g && !(g->stddev > 0.0)) {
    throw ConfigError("gaussian prior needs a positive standard deviation");
  }

  Rng prior_rng(derive_seed(spec.seed, 1));
  Rng m1_rng(spec.seed);
  Rng m2_rng(spec.seed ^ kSecondNoiseSalt);
  std::normal_distribution<double> m1_dist(0.0, spec.sigma1 > 0.0 ? spec.sigma1 : 1.0);
  std::normal_distribution<double> m2_dist(0.0, spec.sigma2 > 0.0 ? spec.sigma2 : 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 255.0);

  std::vector<double> xs(n_samples), m1s(n_samples), zs(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    double x = 0.0;
    if (const auto* g = std::get_if<GaussianScalarPrior>(&prior)) {
      x = g->mean + g->stddev * std::normal_distribution<double>(0.0, 1.0)(prior_rng);
    } else {
      x = uniform(prior_rng);
    }
    const double m1 = spec.sigma1 > 0.0 ? m1_dist(m1_rng) : 0.0;
    const double m2 = spec.sigma2 > 0.0 ? m2_dist(m2_rng) : 0.0;
    xs[i] = x;
    m1s[i] = m1;
    zs[i] = (x + m1) + m2;
  }

  const double lo = quantile(zs, 0.005);
  const double hi = quantile(zs, 0.995);
  const double width = (hi - lo) / n_bins;

  std::vector<double> sz(n_bins), sy(n_bins), sx(n_bins), sm(n_bins), smm(n_bins);
  std::vector<std::uint64_t> n(n_bins);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    if (zs[i] < lo || zs[i] > hi) continue;
    int b = static_cast<int>((zs[i] - lo) / width);
    b = std::clamp(b, 0, n_bins - 1);
    ++n[b];
    sz[b] += zs[i];
    sy[b] += xs[i] + m1s[i];
    sx[b] += xs[i];
    sm[b] += m1s[i];
    smm[b] += m1s[i] * m1s[i];
  }

  ProbeReport r;
  for (int b = 0; b < n_bins; ++b) {
    const double cnt = static_cast<double>(n[b]);
    r.bin_centers.push_back(lo + (b + 0.5) * width);
    r.counts.push_back(n[b]);
    r.reliable.push_back(n[b] >= ProbeReport::kMinReliableCount);
    if (n[b] == 0) {
      r.mean_z.push_back(r.bin_centers.back());
      r.e_y_given_z.push_back(0.0);
      r.e_x_given_z.push_back(0.0);
      r.e_m1_given_z.push_back(0.0);
      r.stderr_m1.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const double mean_m1 = sm[b] / cnt;
    r.mean_z.push_back(sz[b] / cnt);
    r.e_y_given_z.push_back(sy[b] / cnt);
    r.e_x_given_z.push_back(sx[b] / cnt);
    r.e_m1_given_z.push_back(mean_m1);
    const double var = n[b] > 1 ? std::max(0.0, (smm[b] - cnt * mean_m1 * mean_m1) / (cnt - 1.0))
                                : std::numeric_limits<double>::infinity();
    r.stderr_m1.push_back(std::sqrt(var / cnt));
  }
  return r;
}

void write_probe_csv(const ProbeReport& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << "bin_center,n,E_y,E_x,E_m1,stderr\n" << std::setprecision(17);
  for (std::size_t b = 0; b < report.bins(); ++b) {
    out << report.bin_centers[b] << ',' << report.counts[b] << ',' << report.e_y_given_z[b] << ','
        << report.e_x_given_z[b] << ',' << report.e_m1_given_z[b] << ',' << report.stderr_m1[b]
        << '\n';
  }
}

}  // namespace specknet
