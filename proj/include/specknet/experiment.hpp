#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

#include "specknet/baselines/tuning.hpp"
#include "specknet/checkpoint.hpp"
#include "specknet/inference.hpp"
#include "specknet/phantom.hpp"
#include "specknet/probe.hpp"
#include "specknet/report.hpp"

namespace specknet {

struct EvaluationOptions {
  bool supervised = true;        ///< also train/evaluate the paired upper-bound model
  bool tune_baselines = true;    ///< grid search on the validation split
  int tuning_images = 8;         ///< validation patches used by the grid search (0 = all)
  int panel_images = 3;          ///< test patches exported by compare
  baselines::BaselineGrid grid;
};

/// Module seeds, each derive_seed(global_seed, offset).
struct SeedPlan {
  static constexpr std::uint64_t kExtraction = 1;
  static constexpr std::uint64_t kNoise = 2;
  static constexpr std::uint64_t kInit = 3;
  static constexpr std::uint64_t kShuffle = 4;
  static constexpr std::uint64_t kSupervisedInit = 5;
  static constexpr std::uint64_t kSupervisedShuffle = 6;
  static constexpr std::uint64_t kCorpus = 7;
  static constexpr std::uint64_t kSpeckle = 8;

  std::uint64_t extraction, noise, init, shuffle, supervised_init, supervised_shuffle, corpus, speckle;
  static SeedPlan from(std::uint64_t global_seed);
};

struct ExperimentConfig {
  std::filesystem::path manifest_path;
  PatchConfig patches;
  NoiseSpec noise;
  UNetConfig unet;
  TrainConfig train;
  InferenceConfig inference;
  baselines::BaselineParams baselines;
  EvaluationOptions evaluation;
  CorpusConfig corpus;  ///< used by the synth command
  std::filesystem::path output_dir = "specknet-out";
  std::uint64_t global_seed = 0;

  void validate() const;
  SeedPlan seeds() const { return SeedPlan::from(global_seed); }
  /// Copies of the module configs with their seeds filled in from global_seed.
  PatchConfig seeded_patches() const;
  NoiseSpec seeded_noise() const;
  TrainConfig seeded_train(bool supervised) const;
  CorpusConfig seeded_corpus() const;

  std::filesystem::path dataset_dir() const { return output_dir / "dataset"; }
  std::filesystem::path model_path(bool supervised) const {
    return output_dir / (supervised ? "model_supervised.ckpt" : "model.ckpt");
  }
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// `base_dir` anchors a relative manifest path. Seed fields inside sections are rejected:
/// every seed derives from global_seed.
ExperimentConfig experiment_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct PrepareResult {
  std::string digest;
  std::size_t n_train = 0, n_val = 0, n_test = 0;
};

/// Builds the dataset and writes dataset/digest.json and dataset/patches.csv.
PrepareResult cmd_prepare(const ExperimentConfig& cfg, std::ostream& log);

/// Trains the self-supervised model (and the supervised one when enabled) on the prepared
/// dataset; writes checkpoints and history CSVs. Returns the self-supervised checkpoint path.
/// `resume` is refused: training is single-shot.
std::filesystem::path cmd_train(const ExperimentConfig& cfg, std::ostream& log, bool resume = false);

struct DenoiseSummary {
  int width = 0, height = 0;
  std::vector<double> psnr_trace;  ///< per iteration, filled when ground truth is given
  std::vector<std::filesystem::path> intermediates;
};

/// Denoises one image file. With ground truth, each pass is saved next to `out_path`
/// (<stem>_iterK.png) and its PSNR against the ground truth recorded.
DenoiseSummary cmd_denoise(const std::filesystem::path& model_path, const std::filesystem::path& image_path,
                           const std::filesystem::path& out_path, const InferenceConfig& icfg,
                           const std::optional<std::filesystem::path>& ground_truth, std::ostream& log);

/// Runs the proposed model, the supervised model (if given) and all enabled baselines on
/// the test split; writes metrics.csv, metrics.md and report.json into output_dir.
MetricsReport cmd_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& model_path,
                           const std::optional<std::filesystem::path>& supervised_model_path, std::ostream& log);

/// cmd_evaluate plus ranked table (comparison.md) and example panels under output_dir/panels.
MetricsReport cmd_compare(const ExperimentConfig& cfg, const std::filesystem::path& model_path,
                          const std::optional<std::filesystem::path>& supervised_model_path, std::ostream& log);

/// Writes probe.csv into `out_dir`.
ProbeReport cmd_probe(const ScalarPrior& prior, const NoiseSpec& nspec, std::uint64_t n_samples, int n_bins,
                      const std::filesystem::path& out_dir, std::ostream& log);

/// Writes a synthetic phantom corpus; returns the manifest path.
std::filesystem::path cmd_synth(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log);

/// Exit code for an exception: 2 config, 3 data, 4 numeric, 5 capability, 6 domain, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace specknet
