#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "specknet/dataset.hpp"
#include "specknet/unet.hpp"

namespace specknet {

struct TrainConfig {
  double learning_rate = 2e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  double adam_epsilon = 1e-8;
  int batch_size = 8;
  int patience_epochs = 4;
  int max_epochs = 500;
  /// A tie in validation loss counts as "no decrease" when true.
  bool strict_decrease = true;
  std::uint64_t seed = 0;
  /// Worker threads per batch. Results are bit-reproducible for a fixed value.
  int threads = 1;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

enum class TrainingMode { SelfSupervised, Supervised };
std::string_view to_string(TrainingMode m);
TrainingMode training_mode_from_string(std::string_view s);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainedModel {
  UNetConfig unet;
  TrainConfig train;
  TrainingMode mode = TrainingMode::SelfSupervised;
  int patch_size = 0;
  std::vector<float> weights;  ///< parameters of best_epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  std::string dataset_digest;

  UNet<float> network() const { return UNet<float>(unet, weights); }
};

/// Patience-based stopping on validation loss. Epochs are numbered from 1.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience, bool strict_decrease = true);

  struct Decision {
    bool improved = false;
    bool stop = false;
  };
  Decision observe(double val_loss);

  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }
  int epochs_seen() const { return epoch_; }

 private:
  int patience_;
  bool strict_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int stale_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

/// Same-sized (input, target) patch pairs in float.
struct PatchPairs {
  int height = 0;
  int width = 0;
  std::vector<std::vector<float>> inputs;
  std::vector<std::vector<float>> targets;

  std::size_t size() const { return inputs.size(); }
};

/// z -> y pairs from triples.
PatchPairs self_supervised_pairs(const std::vector<PatchEntry>& entries);
/// x_ans -> clean taken through the same Anscombe + rescale path. Throws DataError without clean crops.
PatchPairs supervised_pairs(const std::vector<PatchEntry>& entries);

using EpochCallback = std::function<void(const EpochRecord&, bool improved)>;

/// Mean-squared-error training with Adam and early stopping on the validation pairs.
/// On return `net` holds the best-epoch parameters, which are also stored in the model.
TrainedModel train_on_pairs(UNet<float>& net, const PatchPairs& train_set, const PatchPairs& val_set,
                            const TrainConfig& tcfg, const EpochCallback& on_epoch = {});

/// Self-supervised: learn z (noisier+) -> y (noisier).
TrainedModel train(UNet<float>& net, const PatchDataset& data, const TrainConfig& tcfg,
                   const EpochCallback& on_epoch = {});

/// Paired upper bound: learn x_ans -> clean_ans.
TrainedModel train_supervised(UNet<float>& net, const PatchDataset& data, const TrainConfig& tcfg,
                              const EpochCallback& on_epoch = {});

/// Mean over pairs of the per-pair MSE.
double evaluate_loss(const UNet<float>& net, const PatchPairs& pairs, int threads = 1);

}  // namespace specknet
