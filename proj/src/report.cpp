#include "specknet/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>

#include "specknet/errors.hpp"

namespace specknet {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd r;
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.stddev = std::sqrt(ss / (n - 1.0));
  }
  return r;
}

void MethodResult::add(const std::string& image_id, const MetricPair& m) {
  image_ids.push_back(image_id);
  metrics.push_back(m);
}

void MethodResult::finalize() {
  std::vector<double> p, s;
  for (const auto& m : metrics) {
    p.push_back(m.psnr_db);
    s.push_back(m.ssim);
  }
  const auto ps = mean_std(p), ss = mean_std(s);
  psnr_mean = ps.mean;
  psnr_std = ps.stddev;
  ssim_mean = ss.mean;
  ssim_std = ss.stddev;
}

const MethodResult* MetricsReport::find(const std::string& method) const {
  for (const auto& m : methods) {
    if (m.method == method) return &m;
  }
  return nullptr;
}

std::vector<std::size_t> MetricsReport::ranking() const {
  std::vector<std::size_t> idx(methods.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return methods[a].psnr_mean > methods[b].psnr_mean; });
  return idx;
}

void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "method,image_id,psnr,ssim\n";
  for (const auto& m : report.methods) {
    for (std::size_t i = 0; i < m.metrics.size(); ++i) {
      out << m.method << ',' << m.image_ids[i] << ',' << fmt("%.17g", m.metrics[i].psnr_db) << ','
          << fmt("%.17g", m.metrics[i].ssim) << '\n';
    }
  }
}

std::map<std::string, std::vector<MetricPair>> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::map<std::string, std::vector<MetricPair>> out;
  std::string line;
  std::getline(in, line);
  if (line != "method,image_id,psnr,ssim") throw DataError("'" + path.string() + "' is not a metrics CSV");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string method, id, p, s;
    if (!std::getline(ss, method, ',') || !std::getline(ss, id, ',') || !std::getline(ss, p, ',') ||
        !std::getline(ss, s)) {
      throw DataError(path.string() + " line " + std::to_string(lineno) + ": expected 4 fields");
    }
    out[method].push_back({std::stod(p), std::stod(s)});
  }
  return out;
}

std::string metrics_markdown(const MetricsReport& report) {
  std::ostringstream md;
  md << "| Rank | Method | PSNR (dB) | SSIM | Images |\n";
  md << "|---:|---|---:|---:|---:|\n";
  int rank = 0;
  for (std::size_t i : report.ranking()) {
    const auto& m = report.methods[i];
    md << "| " << ++rank << " | " << m.method << " | " << fmt("%.2f", m.psnr_mean) << " ± "
       << fmt("%.2f", m.psnr_std) << " | " << fmt("%.3f", m.ssim_mean) << " ± " << fmt("%.3f", m.ssim_std)
       << " | " << m.metrics.size() << " |\n";
  }
  if (!report.footnotes.empty() || !report.skipped_images.empty()) md << '\n';
  for (const auto& f : report.footnotes) md << "- " << f << '\n';
  if (!report.skipped_images.empty()) {
    md << "- Skipped (no ground truth):";
    for (const auto& s : report.skipped_images) md << ' ' << s;
    md << '\n';
  }
  if (!report.dataset_digest.empty()) md << "\nDataset digest: `" << report.dataset_digest << "`\n";
  return md.str();
}

void write_metrics_markdown(const MetricsReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << metrics_markdown(report);
}

void write_report_json(const MetricsReport& report, const std::filesystem::path& path) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : report.methods) {
    nlohmann::json images = nlohmann::json::array();
    for (std::size_t i = 0; i < m.metrics.size(); ++i) {
      images.push_back({{"image_id", m.image_ids[i]}, {"psnr", m.metrics[i].psnr_db}, {"ssim", m.metrics[i].ssim}});
    }
    methods.push_back({{"method", m.method},
                       {"psnr_mean", m.psnr_mean},
                       {"psnr_std", m.psnr_std},
                       {"ssim_mean", m.ssim_mean},
                       {"ssim_std", m.ssim_std},
                       {"images", images}});
  }
  nlohmann::json j{{"config", report.config},
                   {"parameters", report.parameters},
                   {"dataset_digest", report.dataset_digest},
                   {"started_at", report.started_at},
                   {"finished_at", report.finished_at},
                   {"footnotes", report.footnotes},
                   {"skipped_images", report.skipped_images},
                   {"methods", methods}};
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace specknet
