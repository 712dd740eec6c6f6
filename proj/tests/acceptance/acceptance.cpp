// Acceptance run: one PASS/FAIL/SKIP line per criterion. Optional arguments select criteria by number.
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "specknet/adam.hpp"
#include "specknet/baselines/tuning.hpp"
#include "specknet/errors.hpp"
#include "specknet/experiment.hpp"
#include "specknet/image_io.hpp"
#include "specknet/metrics.hpp"
#include "specknet/probe.hpp"
#include "specknet/trainer.hpp"
#include "specknet/transforms.hpp"

using namespace specknet;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Fail;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(SPECKNET_TEST_TMP) / "acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------------------------
// Desk-scale pipeline shared by criteria 2, 3, 10 and 11.

constexpr double kDeskBudgetSeconds = 30.0 * 60.0;
constexpr int kMinTestPatches = 20;

ExperimentConfig desk_config(const fs::path& dir) {
  ExperimentConfig cfg;
  cfg.global_seed = 2024;
  cfg.output_dir = dir / "out";
  cfg.manifest_path = dir / "corpus" / "manifest.txt";
  cfg.corpus.source_dir = SPECKNET_DESK_DIR;
  cfg.corpus.speckle = SpeckleSpec{4.0, 0.25, 0, true};
  cfg.patches.patch_size = 64;
  cfg.patches.total_patches = 460;
  cfg.patches.n_train = 400;
  cfg.patches.n_val = 30;
  cfg.patches.n_test = 30;
  cfg.noise = NoiseSpec{50.0, 50.0, 0};
  cfg.unet.depth = 2;
  cfg.unet.base_channels = 16;
  cfg.train.learning_rate = 1e-3;
  cfg.train.max_epochs = 40;
  cfg.train.threads = 1;
  cfg.inference.iterations = 2;
  cfg.inference.tile_overlap = 16;
  cfg.evaluation.supervised = true;
  cfg.evaluation.tuning_images = 8;
  cfg.validate();
  return cfg;
}

struct DeskRun {
  ExperimentConfig cfg;
  MetricsReport report;
  double seconds = 0.0;
  std::string error;
};

// synth -> prepare -> train (both models) -> evaluate, with progress in <dir>/log.txt.
DeskRun run_desk_pipeline(const fs::path& dir, bool evaluate) {
  DeskRun run;
  run.cfg = desk_config(dir);
  std::ofstream log(dir / "log.txt");
  const auto t0 = std::chrono::steady_clock::now();
  try {
    cmd_synth(run.cfg, dir / "corpus", log);
    cmd_prepare(run.cfg, log);
    cmd_train(run.cfg, log);
    if (evaluate) run.report = cmd_evaluate(run.cfg, run.cfg.model_path(false), run.cfg.model_path(true), log);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  run.seconds = seconds_since(t0);
  return run;
}

const DeskRun& desk_run() {
  static const DeskRun run = run_desk_pipeline(scratch("desk_a"), true);
  return run;
}

// ---------------------------------------------------------------------------------------------

Outcome criterion_1() {
  const char* env = std::getenv("SPECKNET_FULL_CONFIG");
  if (!env || !*env) {
    return {Status::Skip, "full-data reproduction is opt-in: set SPECKNET_FULL_CONFIG to an experiment config"};
  }
  ExperimentConfig cfg = load_experiment_config(env);
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  std::ofstream log(cfg.output_dir / "acceptance_full.log", std::ios::app);
  if (!fs::exists(cfg.model_path(false))) {
    cmd_prepare(cfg, log);
    cmd_train(cfg, log);
  }
  std::optional<fs::path> sup;
  if (fs::exists(cfg.model_path(true))) sup = cfg.model_path(true);
  const MetricsReport rep = cmd_evaluate(cfg, cfg.model_path(false), sup, log);
  const MethodResult* ours = rep.find("Ours");
  if (!ours) return {Status::Fail, "no result for Ours"};
  const bool ok = std::abs(ours->psnr_mean - 21.86) <= 1.5 && std::abs(ours->ssim_mean - 0.87) <= 0.05;
  return verdict(ok, "Ours PSNR " + fmt("%.2f", ours->psnr_mean) + " dB (target 21.86 +/- 1.5), SSIM " +
                         fmt("%.3f", ours->ssim_mean) + " (target 0.87 +/- 0.05)");
}

Outcome criterion_2() {
  const DeskRun& run = desk_run();
  if (!run.error.empty()) return {Status::Fail, "desk pipeline failed: " + run.error};
  const MethodResult* ours = run.report.find("Ours");
  const MethodResult* sup = run.report.find("Supervised");
  if (!ours || !sup) return {Status::Fail, "missing Ours or Supervised results"};
  std::string best_name;
  double best = -std::numeric_limits<double>::infinity();
  for (const char* name : {"TV", "Wavelet", "NLM", "BM3D"}) {
    const MethodResult* m = run.report.find(name);
    if (m && m->psnr_mean > best) {
      best = m->psnr_mean;
      best_name = name;
    }
  }
  const std::size_t n = ours->metrics.size();
  const bool ok = ours->psnr_mean > best && sup->psnr_mean >= ours->psnr_mean &&
                  n >= static_cast<std::size_t>(kMinTestPatches) && run.seconds <= kDeskBudgetSeconds;
  const auto holds = [](bool b) { return b ? " (holds)" : " (violated)"; };
  return verdict(ok, "Ours " + fmt("%.2f", ours->psnr_mean) + " > best baseline " + best_name + " " +
                         fmt("%.2f", best) + holds(ours->psnr_mean > best) + ", Supervised " +
                         fmt("%.2f", sup->psnr_mean) + " >= Ours" + holds(sup->psnr_mean >= ours->psnr_mean) +
                         "; " + std::to_string(n) + " test patches, " + fmt("%.0f", run.seconds) + " s");
}

Outcome criterion_3() {
  const DeskRun& run = desk_run();
  if (!run.error.empty()) return {Status::Fail, "desk pipeline failed: " + run.error};
  const MethodResult* ours = run.report.find("Ours");
  const MethodResult* noisy = run.report.find("Noisy");
  if (!ours || !noisy) return {Status::Fail, "missing Ours or Noisy results"};
  const double gain = ours->psnr_mean - noisy->psnr_mean;
  return verdict(gain >= 2.0 && run.seconds <= kDeskBudgetSeconds,
                 "gain " + fmt("%.2f", gain) + " dB (Noisy " + fmt("%.2f", noisy->psnr_mean) + ", Ours " +
                     fmt("%.2f", ours->psnr_mean) + ") in " + fmt("%.0f", run.seconds) + " s");
}

Outcome criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  const NoiseSpec spec{50.0, 50.0, 404};
  const ProbeReport uni = conditional_expectation_probe(UniformPixelPrior{}, spec, 1'000'000, 40);
  int checked = 0, bad = 0;
  for (std::size_t b = 0; b < uni.bins(); ++b) {
    if (!uni.reliable[b]) continue;
    ++checked;
    const double gap = uni.e_y_given_z[b] - uni.e_x_given_z[b] - uni.e_m1_given_z[b];
    if (std::abs(gap) > 4.0 * uni.stderr_m1[b]) ++bad;
  }
  const GaussianScalarPrior prior{128.0, 40.0};
  const ProbeReport gauss = conditional_expectation_probe(prior, spec, 1'000'000, 40);
  const double denom = prior.stddev * prior.stddev + spec.sigma1 * spec.sigma1 + spec.sigma2 * spec.sigma2;
  int g_checked = 0, g_bad = 0;
  for (std::size_t b = 0; b < gauss.bins(); ++b) {
    if (!gauss.reliable[b]) continue;
    ++g_checked;
    const double expected = spec.sigma1 * spec.sigma1 * (gauss.mean_z[b] - prior.mean) / denom;
    if (std::abs(gauss.e_m1_given_z[b] - expected) > 4.0 * gauss.stderr_m1[b]) ++g_bad;
  }
  const double secs = seconds_since(t0);
  return verdict(checked > 0 && bad == 0 && g_checked > 0 && g_bad == 0 && secs < 60.0,
                 "identity " + std::to_string(checked - bad) + "/" + std::to_string(checked) +
                     " bins, Gaussian closed form " + std::to_string(g_checked - g_bad) + "/" +
                     std::to_string(g_checked) + " bins within 4 SE, " + fmt("%.1f", secs) + " s");
}

Outcome criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  double lattice_err = 0.0;
  for (int k = 0; k < 256; ++k) {
    lattice_err = std::max(lattice_err, std::abs(inverse_anscombe(anscombe(k), InverseMode::Algebraic) - k));
  }
  std::ostringstream detail;
  bool ok = lattice_err <= 1e-9;
  detail << "lattice max error " << lattice_err;
  for (double lambda : {10.0, 20.0, 50.0, 100.0}) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(lambda) * 7919);
    std::poisson_distribution<int> pois(lambda);
    double s = 0.0, s2 = 0.0;
    const double n = 1e6;
    for (int i = 0; i < 1'000'000; ++i) {
      const double a = anscombe(pois(rng));
      s += a;
      s2 += a * a;
    }
    const double var = (s2 - s * s / n) / (n - 1.0);
    const double recovered = inverse_anscombe(s / n, InverseMode::ClosedFormUnbiased);
    const double rel = std::abs(recovered - lambda) / lambda;
    ok = ok && var >= 0.9 && var <= 1.1 && rel <= 0.01;
    detail << "; lambda " << lambda << " var " << fmt("%.4f", var) << " mean err " << fmt("%.3f", 100.0 * rel) << "%";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 60.0;
  detail << "; " << fmt("%.1f", secs) << " s";
  return verdict(ok, detail.str());
}

Outcome criterion_6() {
  const ImagePlane black(16, 16, Domain::PixelU8Range, 0.0);
  const ImagePlane white(16, 16, Domain::PixelU8Range, 255.0);
  const ImagePlane dim(16, 16, Domain::PixelU8Range, 25.5);
  const double p0 = psnr(black, white);
  const double p20 = psnr(black, dim);

  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> u(0, 255);
  ImagePlane x(32, 24, Domain::PixelU8Range);
  for (double& v : x.data()) v = u(rng);
  const double self = ssim(x, x);

  const ImagePlane a(16, 16, Domain::PixelU8Range, 100.0);
  const ImagePlane b(16, 16, Domain::PixelU8Range, 200.0);
  const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  const double hand = (2.0 * 100.0 * 200.0 + c1) / (100.0 * 100.0 + 200.0 * 200.0 + c1);
  const double consts = ssim(a, b);

  const bool ok = std::abs(p0) <= 1e-12 && std::abs(p20 - 20.0) <= 1e-9 && std::abs(self - 1.0) <= 1e-12 &&
                  std::abs(consts - hand) <= 1e-6;
  return verdict(ok, "PSNR(0,255) " + fmt("%.3g", p0) + " dB, 20 dB case error " + fmt("%.2g", std::abs(p20 - 20.0)) +
                         ", SSIM(x,x) " + fmt("%.15g", self) + ", constants " + fmt("%.9f", consts) + " vs " +
                         fmt("%.9f", hand));
}

Outcome criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int depth : {1, 2}) {
    UNetConfig cfg;
    cfg.depth = depth;
    cfg.base_channels = 2;
    UNet<double> net(cfg, 100 + static_cast<std::uint64_t>(depth));
    auto params = net.parameters();
    std::mt19937_64 rng(depth);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05), pix(0.0, 255.0);
    for (double& p : params) p += jitter(rng);
    const int h = 8, w = 8;
    std::vector<double> in(h * w), target(h * w);
    for (auto& v : in) v = pix(rng);
    for (auto& v : target) v = pix(rng);

    UNetWorkspace<double> ws;
    std::vector<double> out(in.size()), grad_out(in.size()), grads(params.size(), 0.0);
    auto loss = [&] {
      net.forward(in, h, w, out, ws);
      double acc = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) acc += (out[i] - target[i]) * (out[i] - target[i]);
      return acc / static_cast<double>(out.size());
    };
    loss();
    for (std::size_t i = 0; i < out.size(); ++i) grad_out[i] = 2.0 * (out[i] - target[i]) / static_cast<double>(out.size());
    net.backward(grad_out, ws, grads);
    const double step = 1e-5;
    for (std::size_t p = 0; p < params.size(); ++p) {
      const double saved = params[p];
      params[p] = saved + step;
      const double up = loss();
      params[p] = saved - step;
      const double down = loss();
      params[p] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double scale = std::max({std::abs(numeric), std::abs(grads[p]), 1e-3});
      worst = std::max(worst, std::abs(numeric - grads[p]) / scale);
    }
  }
  const double secs = seconds_since(t0);
  return verdict(worst < 1e-4 && secs < 60.0,
                 "max relative error " + fmt("%.2e", worst) + " (float64, depth 1 and 2), " + fmt("%.1f", secs) + " s");
}

Outcome criterion_8() {
  const double lr = 0.1, b1 = 0.9, b2 = 0.99, eps = 1e-8;
  Adam<double> adam(1, lr, b1, b2, eps);
  std::vector<double> w{1.0};
  const std::vector<double> g{2.0 * (w[0] - 3.0)};
  adam.step(w, g);
  const double m_hat = ((1 - b1) * g[0]) / (1 - b1);
  const double v_hat = ((1 - b2) * g[0] * g[0]) / (1 - b2);
  const double expected = 1.0 - lr * m_hat / (std::sqrt(v_hat) + eps);
  const double adam_err = std::abs(w[0] - expected);

  EarlyStopping tie(4, true);
  int stop_epoch = 0;
  const std::vector<double> series{5, 4, 4, 4, 4, 4};
  for (std::size_t i = 0; i < series.size() && !stop_epoch; ++i) {
    if (tie.observe(series[i]).stop) stop_epoch = static_cast<int>(i) + 1;
  }

  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> level(0, 4);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int patience = 1 + trial % 6;
    std::vector<double> s(30);
    for (auto& v : s) v = level(rng);
    int expect = 0, run = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int e = 1; e <= 30 && !expect; ++e) {
      if (s[e - 1] < best) {
        best = s[e - 1];
        run = 0;
      } else if (++run == patience) {
        expect = e;
      }
    }
    EarlyStopping es(patience, true);
    int got = 0;
    for (int e = 1; e <= 30 && !got; ++e) {
      if (es.observe(s[e - 1]).stop) got = e;
    }
    mismatches += got != expect;
  }
  const bool ok = adam_err <= 1e-12 && stop_epoch == 6 && tie.best_epoch() == 2 && mismatches == 0;
  return verdict(ok, "Adam step error " + fmt("%.2e", adam_err) + ", tie series stops after epoch " +
                         std::to_string(stop_epoch) + ", " + std::to_string(mismatches) +
                         " mismatches over 1000 simulated series");
}

Outcome criterion_9() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pix(0.0, 255.0);
  auto random_image = [&](int w, int h) {
    ImagePlane img(w, h, Domain::PixelU8Range);
    for (double& v : img.data()) v = pix(rng);
    return img;
  };

  double nlm_err = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const ImagePlane img = random_image(8, 8);
    const baselines::NlmParams p{1 + trial % 2, 2 + trial, 25.0 + 10.0 * trial};
    const ImagePlane got = baselines::nlm(img, p);
    const int n = 8;
    auto px = [&](int r, int c) { return img.at(reflect_index(r, n), reflect_index(c, n)); };
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        double wsum = 0.0, acc = 0.0;
        for (int qr = std::max(0, r - p.search_radius); qr <= std::min(n - 1, r + p.search_radius); ++qr) {
          for (int qc = std::max(0, c - p.search_radius); qc <= std::min(n - 1, c + p.search_radius); ++qc) {
            double d2 = 0.0;
            for (int a = -p.patch_radius; a <= p.patch_radius; ++a) {
              for (int b = -p.patch_radius; b <= p.patch_radius; ++b) {
                const double d = px(r + a, c + b) - px(qr + a, qc + b);
                d2 += d * d;
              }
            }
            d2 /= (2 * p.patch_radius + 1) * (2 * p.patch_radius + 1);
            const double wgt = std::exp(-d2 / (p.h * p.h));
            wsum += wgt;
            acc += wgt * img.at(qr, qc);
          }
        }
        nlm_err = std::max(nlm_err, std::abs(got.at(r, c) - acc / wsum));
      }
    }
  }

  bool tv_ok = true;
  const ImagePlane noisy = random_image(48, 40);
  const double tv_in = baselines::total_variation(noisy);
  double previous = tv_in;
  for (double weight : {1.0, 5.0, 20.0, 50.0}) {
    const double tv_out = baselines::total_variation(baselines::tv_chambolle(noisy, weight, 500, 1e-6).image);
    tv_ok = tv_ok && tv_out <= tv_in && tv_out <= previous;
    previous = tv_out;
  }

  const ImagePlane img = random_image(64, 48);
  const ImagePlane rec = baselines::wavelet_bayes_shrink(img, baselines::WaveletParams{3, 0.0});
  double wav_err = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) wav_err = std::max(wav_err, std::abs(rec[i] - img[i]));

  const bool ok = nlm_err <= 1e-10 && tv_ok && wav_err <= 1e-8;
  return verdict(ok, "NLM max error " + fmt("%.2e", nlm_err) + ", TV " + (tv_ok ? "decreasing" : "NOT decreasing") +
                         " (input " + fmt("%.0f", tv_in) + ", strongest " + fmt("%.0f", previous) +
                         "), wavelet reconstruction error " + fmt("%.2e", wav_err));
}

Outcome criterion_10() {
  const DeskRun& a = desk_run();
  if (!a.error.empty()) return {Status::Fail, "first desk run failed: " + a.error};
  const DeskRun b = run_desk_pipeline(scratch("desk_b"), false);
  if (!b.error.empty()) return {Status::Fail, "second desk run failed: " + b.error};

  std::vector<std::string> differing;
  auto same = [&](const fs::path& rel) {
    const fs::path pa = a.cfg.output_dir / rel, pb = b.cfg.output_dir / rel;
    if (!fs::exists(pa) || slurp(pa) != slurp(pb)) differing.push_back(rel.string());
  };
  const std::string digest_a = nlohmann::json::parse(slurp(a.cfg.dataset_dir() / "digest.json")).at("digest");
  const std::string digest_b = nlohmann::json::parse(slurp(b.cfg.dataset_dir() / "digest.json")).at("digest");
  if (digest_a != digest_b) differing.push_back("dataset digest");
  same("history.csv");
  same("history_supervised.csv");

  // Output images: every corpus image denoised with each run's model.
  int images = 0;
  std::ostringstream sink;
  const DatasetManifest manifest = load_manifest(a.cfg.manifest_path);
  for (const auto& e : manifest.entries) {
    const fs::path rel = fs::path("denoised") / (e.image_id + ".png");
    for (const DeskRun* run : {&a, &b}) {
      const fs::path noisy = run->cfg.manifest_path.parent_path() / e.noisy_path.filename();
      cmd_denoise(run->cfg.model_path(false), noisy, run->cfg.output_dir / rel, run->cfg.inference, std::nullopt, sink);
    }
    same(rel);
    ++images;
  }
  std::string detail = "digest " + digest_a.substr(0, 12) + "..., histories and " + std::to_string(images) +
                       " denoised images compared";
  if (!differing.empty()) {
    detail += "; differing:";
    for (const auto& d : differing) detail += " " + d;
  }
  return verdict(differing.empty(), detail);
}

Outcome criterion_11() {
  const DeskRun& run = desk_run();
  if (!run.error.empty()) return {Status::Fail, "desk pipeline failed: " + run.error};
  const TrainedModel model = load_model(run.cfg.model_path(false));
  const DatasetManifest manifest = load_manifest(run.cfg.manifest_path);
  const PatchDataset data = build_dataset(manifest, run.cfg.seeded_patches(), run.cfg.seeded_noise());
  double sum1 = 0.0, sum2 = 0.0;
  int n = 0;
  for (const auto& e : data.test) {
    if (!e.clean) continue;
    InferenceConfig icfg = run.cfg.inference;
    icfg.iterations = 2;
    const DenoiseResult r = denoise_with_trace(model, e.noisy, icfg);
    sum1 += psnr(*e.clean, quantize_u8(r.iterations[0]));
    sum2 += psnr(*e.clean, quantize_u8(r.iterations[1]));
    ++n;
  }
  if (n == 0) return {Status::Fail, "no test patches with clean references"};
  const double m1 = sum1 / n, m2 = sum2 / n;
  return verdict(m2 >= m1 - 0.1, "1 pass " + fmt("%.3f", m1) + " dB, 2 passes " + fmt("%.3f", m2) + " dB, delta " +
                                     fmt("%+.3f", m2 - m1) + " dB over " + std::to_string(n) + " test patches");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Table 1 reproduction on full data", criterion_1},
      {"desk-scale method ordering", criterion_2},
      {"denoising gain over the noisy input", criterion_3},
      {"conditional-expectation probe", criterion_4},
      {"Anscombe transform suite", criterion_5},
      {"metric oracles", criterion_6},
      {"gradient check", criterion_7},
      {"Adam step and early stopping", criterion_8},
      {"classical baseline oracles", criterion_9},
      {"pipeline determinism", criterion_10},
      {"two-pass inference", criterion_11},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = out.status == Status::Pass ? "PASS" : out.status == Status::Fail ? "FAIL" : "SKIP";
    std::cout << tag << " criterion " << number << " (" << criteria[i].first << "): " << out.detail << std::endl;
    failures += out.status == Status::Fail;
  }
  return failures == 0 ? 0 : 1;
}
