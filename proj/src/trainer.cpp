#include "specknet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "specknet/adam.hpp"
#include "specknet/errors.hpp"
#include "specknet/rng.hpp"
#include "specknet/transforms.hpp"

namespace specknet {

namespace {

constexpr std::uint64_t kShuffleStream = 0x7A11;

std::vector<float> to_float(const ImagePlane& img) {
  return std::vector<float>(img.data().begin(), img.data().end());
}

double pair_mse(std::span<const float> pred, std::span<const float> target) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

/// Contiguous split of [0, n) into `parts` slices; slice k is [bounds[k], bounds[k+1]).
std::vector<std::size_t> slice_bounds(std::size_t n, int parts) {
  std::vector<std::size_t> b(static_cast<std::size_t>(parts) + 1);
  for (int k = 0; k <= parts; ++k) b[k] = n * static_cast<std::size_t>(k) / static_cast<std::size_t>(parts);
  return b;
}

template <class Fn>
void run_slices(int threads, std::size_t n, Fn&& fn) {
  const int parts = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  const auto bounds = slice_bounds(n, parts);
  if (parts == 1) {
    fn(0, bounds[0], bounds[1]);
    return;
  }
  std::vector<std::thread> pool;
  for (int k = 0; k < parts; ++k) pool.emplace_back([&, k] { fn(k, bounds[k], bounds[k + 1]); });
  for (auto& t : pool) t.join();
}

struct Worker {
  UNetWorkspace<float> ws;
  AlignedVector<float> grads;
  AlignedVector<float> pred;
  AlignedVector<float> grad_out;
};

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and nonnegative");
  }
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in (0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (patience_epochs < 1) throw ConfigError("patience_epochs must be at least 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
}

std::string_view to_string(TrainingMode m) {
  return m == TrainingMode::Supervised ? "supervised" : "self-supervised";
}

TrainingMode training_mode_from_string(std::string_view s) {
  if (s == "supervised") return TrainingMode::Supervised;
  if (s == "self-supervised") return TrainingMode::SelfSupervised;
  throw ConfigError("unknown training mode '" + std::string(s) + "'");
}

EarlyStopping::EarlyStopping(int patience, bool strict_decrease)
    : patience_(patience), strict_(strict_decrease) {
  if (patience < 1) throw ConfigError("patience must be at least 1");
}

EarlyStopping::Decision EarlyStopping::observe(double val_loss) {
  ++epoch_;
  const bool improved = strict_ ? val_loss < best_loss_ : val_loss <= best_loss_;
  if (improved) {
    best_loss_ = val_loss;
    best_epoch_ = epoch_;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return {improved, stale_ >= patience_};
}

PatchPairs self_supervised_pairs(const std::vector<PatchEntry>& entries) {
  PatchPairs p;
  for (const auto& e : entries) {
    p.height = e.triple.z_noisier_plus.height();
    p.width = e.triple.z_noisier_plus.width();
    p.inputs.push_back(to_float(e.triple.z_noisier_plus));
    p.targets.push_back(to_float(e.triple.y_noisier));
  }
  return p;
}

PatchPairs supervised_pairs(const std::vector<PatchEntry>& entries) {
  PatchPairs p;
  for (const auto& e : entries) {
    if (!e.clean) {
      throw DataError("supervised training needs clean patches; patch " +
                      std::to_string(e.patch_index) + " of '" + e.source_id + "' has none");
    }
    p.height = e.triple.x_ans.height();
    p.width = e.triple.x_ans.width();
    p.inputs.push_back(to_float(e.triple.x_ans));
    p.targets.push_back(to_float(pixel_to_rescaled(*e.clean)));
  }
  return p;
}

double evaluate_loss(const UNet<float>& net, const PatchPairs& pairs, int threads) {
  if (pairs.size() == 0) return 0.0;
  std::vector<double> losses(pairs.size());
  run_slices(threads, pairs.size(), [&](int, std::size_t begin, std::size_t end) {
    UNetWorkspace<float> ws;
    std::vector<float> pred(pairs.inputs[0].size());
    for (std::size_t i = begin; i < end; ++i) {
      net.forward(pairs.inputs[i], pairs.height, pairs.width, pred, ws);
      losses[i] = pair_mse(pred, pairs.targets[i]);
    }
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

TrainedModel train_on_pairs(UNet<float>& net, const PatchPairs& train_set, const PatchPairs& val_set,
                            const TrainConfig& tcfg, const EpochCallback& on_epoch) {
  tcfg.validate();
  if (train_set.size() == 0) throw DataError("training set is empty");
  if (val_set.size() == 0) throw DataError("validation set is empty");

  const std::size_t n_params = net.parameter_count();
  const std::size_t pixels = static_cast<std::size_t>(train_set.height) * train_set.width;
  Adam<float> adam(n_params, tcfg.learning_rate, tcfg.adam_beta1, tcfg.adam_beta2,
                   tcfg.adam_epsilon);
  EarlyStopping stopper(tcfg.patience_epochs, tcfg.strict_decrease);

  TrainedModel model;
  model.unet = net.config();
  model.train = tcfg;
  model.patch_size = train_set.height;
  model.weights.assign(net.parameters().begin(), net.parameters().end());

  std::vector<Worker> workers(static_cast<std::size_t>(tcfg.threads));
  for (auto& w : workers) {
    w.grads.assign(n_params, 0.0f);
    w.pred.resize(pixels);
    w.grad_out.resize(pixels);
  }
  std::vector<float> grads(n_params);
  std::vector<double> sample_loss(train_set.size());
  std::vector<std::size_t> order(train_set.size());

  for (int epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(derive_seed(tcfg.seed, kShuffleStream), static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    int batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tcfg.batch_size)) {
      ++batch_no;
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(tcfg.batch_size));
      const float grad_scale = 2.0f / static_cast<float>(pixels * (end - start));
      run_slices(tcfg.threads, end - start, [&](int k, std::size_t b, std::size_t e) {
        Worker& w = workers[static_cast<std::size_t>(k)];
        std::fill(w.grads.begin(), w.grads.end(), 0.0f);
        for (std::size_t j = start + b; j < start + e; ++j) {
          const std::size_t idx = order[j];
          net.forward(train_set.inputs[idx], train_set.height, train_set.width, w.pred, w.ws);
          const auto& target = train_set.targets[idx];
          for (std::size_t p = 0; p < pixels; ++p) w.grad_out[p] = grad_scale * (w.pred[p] - target[p]);
          sample_loss[idx] = pair_mse(w.pred, target);
          net.backward(w.grad_out, w.ws, w.grads);
        }
      });
      const int used = std::max(1, std::min<int>(tcfg.threads, static_cast<int>(end - start)));
      std::copy(workers[0].grads.begin(), workers[0].grads.end(), grads.begin());
      for (int k = 1; k < used; ++k) {
        const auto& g = workers[static_cast<std::size_t>(k)].grads;
        for (std::size_t i = 0; i < n_params; ++i) grads[i] += g[i];
      }
      for (std::size_t j = start; j < end; ++j) {
        if (!std::isfinite(sample_loss[order[j]])) {
          throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_no));
        }
      }
      adam.step(net.parameters(), grads);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = std::accumulate(sample_loss.begin(), sample_loss.end(), 0.0) /
                     static_cast<double>(sample_loss.size());
    rec.val_loss = evaluate_loss(net, val_set, tcfg.threads);
    if (!std::isfinite(rec.val_loss)) {
      throw NumericError("training diverged: non-finite validation loss at epoch " +
                         std::to_string(epoch));
    }
    model.history.push_back(rec);
    const auto decision = stopper.observe(rec.val_loss);
    if (decision.improved) model.weights.assign(net.parameters().begin(), net.parameters().end());
    if (on_epoch) on_epoch(rec, decision.improved);
    if (decision.stop) break;
  }
  model.best_epoch = stopper.best_epoch();
  std::copy(model.weights.begin(), model.weights.end(), net.parameters().begin());
  return model;
}

TrainedModel train(UNet<float>& net, const PatchDataset& data, const TrainConfig& tcfg,
                   const EpochCallback& on_epoch) {
  TrainedModel m = train_on_pairs(net, self_supervised_pairs(data.train),
                                  self_supervised_pairs(data.val), tcfg, on_epoch);
  m.mode = TrainingMode::SelfSupervised;
  m.dataset_digest = data.digest();
  return m;
}

TrainedModel train_supervised(UNet<float>& net, const PatchDataset& data, const TrainConfig& tcfg,
                              const EpochCallback& on_epoch) {
  TrainedModel m = train_on_pairs(net, supervised_pairs(data.train), supervised_pairs(data.val),
                                  tcfg, on_epoch);
  m.mode = TrainingMode::Supervised;
  m.dataset_digest = data.digest();
  return m;
}

}  // namespace specknet
