#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "specknet/metrics.hpp"

namespace specknet {

struct MethodResult {
  std::string method;
  std::vector<std::string> image_ids;
  std::vector<MetricPair> metrics;
  double psnr_mean = 0.0;
  double psnr_std = 0.0;
  double ssim_mean = 0.0;
  double ssim_std = 0.0;

  void add(const std::string& image_id, const MetricPair& m);
  /// Recomputes the means and sample standard deviations from the per-image lists.
  void finalize();
};

struct MetricsReport {
  std::vector<MethodResult> methods;
  nlohmann::json config;  ///< echo of the generating configuration
  nlohmann::json parameters;  ///< method parameters actually used (post-tuning)
  std::string dataset_digest;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> footnotes;
  std::vector<std::string> skipped_images;

  const MethodResult* find(const std::string& method) const;
  /// Method indices by mean PSNR, descending; ties keep insertion order.
  std::vector<std::size_t> ranking() const;
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  ///< sample (n - 1) standard deviation, 0 for n < 2
};
MeanStd mean_std(const std::vector<double>& values);

/// method,image_id,psnr,ssim with 17 significant digits.
void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path);
/// Per-method metric lists read back from write_metrics_csv output, in file order.
std::map<std::string, std::vector<MetricPair>> read_metrics_csv(const std::filesystem::path& path);
/// Ranked "mean ± std" table with footnotes.
std::string metrics_markdown(const MetricsReport& report);
void write_metrics_markdown(const MetricsReport& report, const std::filesystem::path& path);
/// Everything, including the config echo and timestamps.
void write_report_json(const MetricsReport& report, const std::filesystem::path& path);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace specknet
