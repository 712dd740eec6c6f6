#include "specknet/config_json.hpp"

#include <exception>
#include <set>
#include <string>

#include "specknet/errors.hpp"

namespace specknet {

using nlohmann::json;

namespace {

/// Reads optional keys of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j.is_object()) throw ConfigError("config section '" + section_ + "' must be an object");
  }
  ~ObjectReader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + key + "' in config section '" + section_ + "'");
    }
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + section_ + "." + key + "': " + e.what());
    }
  }

 private:
  const json& j_;
  std::string section_;
  std::set<std::string> seen_;
};

}  // namespace

void to_json(json& j, const NoiseSpec& v) {
  j = json{{"sigma1", v.sigma1}, {"sigma2", v.sigma2}, {"seed", v.seed}};
}
void from_json(const json& j, NoiseSpec& v) {
  ObjectReader r(j, "noise");
  r.get("sigma1", v.sigma1);
  r.get("sigma2", v.sigma2);
  r.get("seed", v.seed);
}

void to_json(json& j, const SpeckleSpec& v) {
  j = json{{"shape", v.shape}, {"scale", v.scale}, {"seed", v.seed}, {"normalize_mean", v.normalize_mean}};
}
void from_json(const json& j, SpeckleSpec& v) {
  ObjectReader r(j, "speckle");
  r.get("shape", v.shape);
  r.get("scale", v.scale);
  r.get("seed", v.seed);
  r.get("normalize_mean", v.normalize_mean);
}

void to_json(json& j, const PatchConfig& v) {
  j = json{{"patch_size", v.patch_size}, {"total_patches", v.total_patches},
           {"n_train", v.n_train},       {"n_val", v.n_val},
           {"n_test", v.n_test},         {"extraction_seed", v.extraction_seed},
           {"retain_clean", v.retain_clean}};
}
void from_json(const json& j, PatchConfig& v) {
  ObjectReader r(j, "patches");
  r.get("patch_size", v.patch_size);
  r.get("total_patches", v.total_patches);
  r.get("n_train", v.n_train);
  r.get("n_val", v.n_val);
  r.get("n_test", v.n_test);
  r.get("extraction_seed", v.extraction_seed);
  r.get("retain_clean", v.retain_clean);
}

void to_json(json& j, const UNetConfig& v) {
  j = json{{"depth", v.depth},
           {"base_channels", v.base_channels},
           {"kernel_size", v.kernel_size},
           {"intensity_center", v.intensity_center},
           {"intensity_scale", v.intensity_scale}};
}
void from_json(const json& j, UNetConfig& v) {
  ObjectReader r(j, "unet");
  r.get("depth", v.depth);
  r.get("base_channels", v.base_channels);
  r.get("kernel_size", v.kernel_size);
  r.get("intensity_center", v.intensity_center);
  r.get("intensity_scale", v.intensity_scale);
}

void to_json(json& j, const TrainConfig& v) {
  j = json{{"learning_rate", v.learning_rate},
           {"adam_beta1", v.adam_beta1},
           {"adam_beta2", v.adam_beta2},
           {"adam_epsilon", v.adam_epsilon},
           {"batch_size", v.batch_size},
           {"patience_epochs", v.patience_epochs},
           {"max_epochs", v.max_epochs},
           {"strict_decrease", v.strict_decrease},
           {"seed", v.seed},
           {"threads", v.threads}};
}
void from_json(const json& j, TrainConfig& v) {
  ObjectReader r(j, "train");
  r.get("learning_rate", v.learning_rate);
  r.get("adam_beta1", v.adam_beta1);
  r.get("adam_beta2", v.adam_beta2);
  r.get("adam_epsilon", v.adam_epsilon);
  r.get("batch_size", v.batch_size);
  r.get("patience_epochs", v.patience_epochs);
  r.get("max_epochs", v.max_epochs);
  r.get("strict_decrease", v.strict_decrease);
  r.get("seed", v.seed);
  r.get("threads", v.threads);
}

void to_json(json& j, const InferenceConfig& v) {
  j = json{{"iterations", v.iterations},
           {"tile_size", v.tile_size},
           {"tile_overlap", v.tile_overlap},
           {"inverse_mode", std::string(to_string(v.inverse_mode))}};
}
void from_json(const json& j, InferenceConfig& v) {
  ObjectReader r(j, "inference");
  r.get("iterations", v.iterations);
  r.get("tile_size", v.tile_size);
  r.get("tile_overlap", v.tile_overlap);
  std::string mode(to_string(v.inverse_mode));
  r.get("inverse_mode", mode);
  v.inverse_mode = inverse_mode_from_string(mode);
}

void to_json(json& j, const CorpusConfig& v) {
  j = json{{"count", v.count}, {"width", v.width}, {"height", v.height}, {"seed", v.seed}, {"speckle", v.speckle}};
  if (!v.source_dir.empty()) j["source_dir"] = v.source_dir.string();
}
void from_json(const json& j, CorpusConfig& v) {
  ObjectReader r(j, "corpus");
  r.get("count", v.count);
  r.get("width", v.width);
  r.get("height", v.height);
  r.get("seed", v.seed);
  r.get("speckle", v.speckle);
  std::string source_dir;
  r.get("source_dir", source_dir);
  v.source_dir = source_dir;
}

void to_json(json& j, const EpochRecord& v) {
  j = json{{"epoch", v.epoch}, {"train_loss", v.train_loss}, {"val_loss", v.val_loss}};
}
void from_json(const json& j, EpochRecord& v) {
  ObjectReader r(j, "history");
  r.get("epoch", v.epoch);
  r.get("train_loss", v.train_loss);
  r.get("val_loss", v.val_loss);
}

namespace baselines {

void to_json(json& j, const BaselineParams& v) {
  j = json{{"tv", {{"weight", v.tv.weight}, {"max_iter", v.tv.max_iter}, {"tol", v.tv.tol}}},
           {"wavelet",
            {{"family", "db4"}, {"levels", v.wavelet.levels}, {"threshold_scale", v.wavelet.threshold_scale}}},
           {"nlm", {{"patch_radius", v.nlm.patch_radius}, {"search_radius", v.nlm.search_radius}, {"h", v.nlm.h}}},
           {"bm3d", {{"sigma", v.bm3d.sigma}, {"enabled", v.bm3d.enabled}}}};
}

void from_json(const json& j, BaselineParams& v) {
  ObjectReader r(j, "baselines");
  json tv = json::object(), wav = json::object(), nl = json::object(), bm = json::object();
  r.get("tv", tv);
  r.get("wavelet", wav);
  r.get("nlm", nl);
  r.get("bm3d", bm);
  {
    ObjectReader t(tv, "baselines.tv");
    t.get("weight", v.tv.weight);
    t.get("max_iter", v.tv.max_iter);
    t.get("tol", v.tv.tol);
  }
  {
    ObjectReader w(wav, "baselines.wavelet");
    std::string family = "db4";
    w.get("family", family);
    if (family != "db4") throw ConfigError("only the db4 wavelet family is supported, got '" + family + "'");
    w.get("levels", v.wavelet.levels);
    w.get("threshold_scale", v.wavelet.threshold_scale);
  }
  {
    ObjectReader n(nl, "baselines.nlm");
    n.get("patch_radius", v.nlm.patch_radius);
    n.get("search_radius", v.nlm.search_radius);
    n.get("h", v.nlm.h);
  }
  {
    ObjectReader b(bm, "baselines.bm3d");
    b.get("sigma", v.bm3d.sigma);
    b.get("enabled", v.bm3d.enabled);
  }
}

}  // namespace baselines

}  // namespace specknet
