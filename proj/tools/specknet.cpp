// specknet: self-supervised speckle denoising experiments from the command line.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "specknet/errors.hpp"
#include "specknet/experiment.hpp"

namespace fs = std::filesystem;
using namespace specknet;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::optional<int> threads;
  std::optional<int> iterations;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "Experiment config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", f.seed, "Override global_seed");
  cmd->add_option("--output", f.output, "Override output_dir");
  cmd->add_option("--threads", f.threads, "Training worker threads");
  cmd->add_option("--iterations", f.iterations, "Inference passes through the network");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_experiment_config(f.config);
  if (f.seed) cfg.global_seed = *f.seed;
  if (!f.output.empty()) cfg.output_dir = f.output;
  if (f.threads) cfg.train.threads = *f.threads;
  if (f.iterations) cfg.inference.iterations = *f.iterations;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised speckle denoising: dataset preparation, training, inference and evaluation"};
  app.require_subcommand(1);

  CommonFlags common;
  bool resume = false;
  std::string model, supervised_model, ground_truth, input, out_path, prior = "uniform";
  std::uint64_t samples = 1'000'000;
  int bins = 40;
  double sigma1 = 50.0, sigma2 = 50.0, prior_mean = 128.0, prior_std = 40.0;
  std::optional<int> tile_size, tile_overlap;
  std::string inverse_mode;

  auto* prepare = app.add_subcommand("prepare", "Extract patches and write the dataset digest");
  add_common(prepare, common, true);

  auto* train_cmd = app.add_subcommand("train", "Train the model(s) on the prepared dataset");
  add_common(train_cmd, common, true);
  train_cmd->add_flag("--resume", resume, "Resume an interrupted run (not supported)");

  auto* denoise_cmd = app.add_subcommand("denoise", "Denoise one image with a trained model");
  add_common(denoise_cmd, common, false);
  denoise_cmd->add_option("--model", model, "Checkpoint")->required();
  denoise_cmd->add_option("input", input, "Noisy image (PNG/TIFF)")->required();
  denoise_cmd->add_option("--ground-truth", ground_truth, "Clean image; prints a per-iteration PSNR trace");
  denoise_cmd->add_option("--tile-size", tile_size, "Tile side (0 = training patch size)");
  denoise_cmd->add_option("--tile-overlap", tile_overlap, "Tile overlap in pixels");
  denoise_cmd->add_option("--inverse", inverse_mode, "algebraic | asymptotic | closed-form-unbiased");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Metrics of all methods on the test split");
  auto* compare_cmd = app.add_subcommand("compare", "Ranked comparison with example panels");
  for (auto* cmd : {evaluate_cmd, compare_cmd}) {
    add_common(cmd, common, true);
    cmd->add_option("--model", model, "Self-supervised checkpoint (default: <output>/model.ckpt)");
    cmd->add_option("--supervised-model", supervised_model,
                    "Supervised checkpoint (default: <output>/model_supervised.ckpt when present)");
  }

  auto* probe_cmd = app.add_subcommand("probe", "Monte-Carlo check of the conditional-expectation identity");
  probe_cmd->add_option("--prior", prior, "uniform | gaussian")->check(CLI::IsMember({"uniform", "gaussian"}));
  probe_cmd->add_option("--prior-mean", prior_mean, "Gaussian prior mean");
  probe_cmd->add_option("--prior-std", prior_std, "Gaussian prior standard deviation");
  probe_cmd->add_option("--samples", samples, "Number of Monte-Carlo samples");
  probe_cmd->add_option("--bins", bins, "Number of z bins");
  probe_cmd->add_option("--sigma1", sigma1, "First noise layer standard deviation");
  probe_cmd->add_option("--sigma2", sigma2, "Second noise layer standard deviation");
  probe_cmd->add_option("--seed", common.seed, "Random seed");
  probe_cmd->add_option("--output", common.output, "Output directory")->required();

  auto* synth_cmd = app.add_subcommand("synth", "Write a speckled corpus (phantoms or corpus.source_dir images) and its manifest");
  add_common(synth_cmd, common, false);
  synth_cmd->add_option("dir", out_path, "Target directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*prepare) {
      cmd_prepare(resolve(common), std::cout);
    } else if (*train_cmd) {
      cmd_train(resolve(common), std::cout, resume);
    } else if (*denoise_cmd) {
      ExperimentConfig cfg = resolve(common);
      InferenceConfig icfg = cfg.inference;
      if (tile_size) icfg.tile_size = *tile_size;
      if (tile_overlap) icfg.tile_overlap = *tile_overlap;
      if (!inverse_mode.empty()) icfg.inverse_mode = inverse_mode_from_string(inverse_mode);
      if (common.output.empty()) throw ConfigError("denoise needs --output <image path>");
      std::optional<fs::path> gt;
      if (!ground_truth.empty()) gt = ground_truth;
      cmd_denoise(model, input, common.output, icfg, gt, std::cout);
    } else if (*evaluate_cmd || *compare_cmd) {
      const ExperimentConfig cfg = resolve(common);
      const fs::path m = model.empty() ? cfg.model_path(false) : fs::path(model);
      std::optional<fs::path> sup;
      if (!supervised_model.empty()) {
        sup = supervised_model;
      } else if (cfg.evaluation.supervised && fs::exists(cfg.model_path(true))) {
        sup = cfg.model_path(true);
      }
      if (*evaluate_cmd) {
        cmd_evaluate(cfg, m, sup, std::cout);
      } else {
        cmd_compare(cfg, m, sup, std::cout);
      }
    } else if (*probe_cmd) {
      NoiseSpec spec{sigma1, sigma2, common.seed.value_or(0)};
      ScalarPrior p = UniformPixelPrior{};
      if (prior == "gaussian") p = GaussianScalarPrior{prior_mean, prior_std};
      cmd_probe(p, spec, samples, bins, common.output, std::cout);
    } else if (*synth_cmd) {
      cmd_synth(resolve(common), out_path, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
