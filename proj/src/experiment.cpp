#include "specknet/experiment.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include "specknet/config_json.hpp"
#include "specknet/digest.hpp"
#include "specknet/errors.hpp"
#include "specknet/image_io.hpp"
#include "specknet/rng.hpp"

namespace specknet {

using nlohmann::json;
namespace fs = std::filesystem;

SeedPlan SeedPlan::from(std::uint64_t g) {
  return {derive_seed(g, kExtraction),     derive_seed(g, kNoise),
          derive_seed(g, kInit),           derive_seed(g, kShuffle),
          derive_seed(g, kSupervisedInit), derive_seed(g, kSupervisedShuffle),
          derive_seed(g, kCorpus),         derive_seed(g, kSpeckle)};
}

void ExperimentConfig::validate() const {
  patches.validate(unet.depth);
  noise.validate();
  unet.validate();
  train.validate();
  inference.validate(unet.depth);
  baselines.validate();
  if (evaluation.tuning_images < 0 || evaluation.panel_images < 0) {
    throw ConfigError("evaluation.tuning_images and evaluation.panel_images must be nonnegative");
  }
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

PatchConfig ExperimentConfig::seeded_patches() const {
  PatchConfig p = patches;
  p.extraction_seed = seeds().extraction;
  return p;
}

NoiseSpec ExperimentConfig::seeded_noise() const {
  NoiseSpec n = noise;
  n.seed = seeds().noise;
  return n;
}

TrainConfig ExperimentConfig::seeded_train(bool supervised) const {
  TrainConfig t = train;
  t.seed = supervised ? seeds().supervised_shuffle : seeds().shuffle;
  return t;
}

CorpusConfig ExperimentConfig::seeded_corpus() const {
  CorpusConfig c = corpus;
  c.seed = seeds().corpus;
  c.speckle.seed = seeds().speckle;
  return c;
}

namespace {

json strip_seed(json j, const char* key) {
  if (j.is_object()) j.erase(key);
  return j;
}

void reject_seed(const json& section, const std::string& name, const char* key) {
  if (section.is_object() && section.contains(key)) {
    throw ConfigError("'" + name + "." + key + "' is not configurable; all seeds derive from global_seed");
  }
}

void write_history_csv(const TrainedModel& m, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "epoch,train_loss,val_loss,best\n";
  char buf[128];
  for (const auto& r : m.history) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d\n", r.epoch, r.train_loss, r.val_loss,
                  r.epoch == m.best_epoch ? 1 : 0);
    out << buf;
  }
}

std::string read_prepared_digest(const ExperimentConfig& cfg) {
  const fs::path p = cfg.dataset_dir() / "digest.json";
  std::ifstream in(p);
  if (!in) throw DataError("prepared dataset not found: '" + p.string() + "' (run prepare first)");
  try {
    return json::parse(in).at("digest").get<std::string>();
  } catch (const json::exception& e) {
    throw DataError("malformed '" + p.string() + "': " + e.what());
  }
}

PatchDataset build_from_config(const ExperimentConfig& cfg) {
  const DatasetManifest manifest = load_manifest(cfg.manifest_path);
  return build_dataset(manifest, cfg.seeded_patches(), cfg.seeded_noise());
}

std::string patch_id(const PatchEntry& e) {
  return e.source_id + "#" + std::to_string(e.patch_index);
}

}  // namespace

json to_json(const ExperimentConfig& cfg) {
  json eval{{"supervised", cfg.evaluation.supervised},
            {"tune_baselines", cfg.evaluation.tune_baselines},
            {"tuning_images", cfg.evaluation.tuning_images},
            {"panel_images", cfg.evaluation.panel_images},
            {"grid",
             {{"tv_weight", cfg.evaluation.grid.tv_weight},
              {"wavelet_threshold_scale", cfg.evaluation.grid.wavelet_threshold_scale},
              {"nlm_h", cfg.evaluation.grid.nlm_h},
              {"bm3d_sigma", cfg.evaluation.grid.bm3d_sigma}}}};
  json speckle = cfg.corpus.speckle;
  json corpus = cfg.corpus;
  corpus["speckle"] = strip_seed(speckle, "seed");
  return json{{"manifest", cfg.manifest_path.string()},
              {"output_dir", cfg.output_dir.string()},
              {"global_seed", cfg.global_seed},
              {"patches", strip_seed(cfg.patches, "extraction_seed")},
              {"noise", strip_seed(cfg.noise, "seed")},
              {"unet", cfg.unet},
              {"train", strip_seed(cfg.train, "seed")},
              {"inference", cfg.inference},
              {"baselines", cfg.baselines},
              {"evaluation", eval},
              {"corpus", strip_seed(corpus, "seed")}};
}

ExperimentConfig experiment_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"manifest", "output_dir", "global_seed", "patches",
                                           "noise",    "unet",       "train",       "inference",
                                           "baselines", "evaluation", "corpus"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("manifest")) {
      fs::path m = j.at("manifest").get<std::string>();
      cfg.manifest_path = m.is_relative() ? base_dir / m : m;
    }
    if (j.contains("output_dir")) {
      fs::path o = j.at("output_dir").get<std::string>();
      cfg.output_dir = o.is_relative() ? base_dir / o : o;
    }
    if (j.contains("global_seed")) cfg.global_seed = j.at("global_seed").get<std::uint64_t>();
    if (j.contains("patches")) {
      reject_seed(j["patches"], "patches", "extraction_seed");
      cfg.patches = j["patches"].get<PatchConfig>();
    }
    if (j.contains("noise")) {
      reject_seed(j["noise"], "noise", "seed");
      cfg.noise = j["noise"].get<NoiseSpec>();
    }
    if (j.contains("unet")) cfg.unet = j["unet"].get<UNetConfig>();
    if (j.contains("train")) {
      reject_seed(j["train"], "train", "seed");
      cfg.train = j["train"].get<TrainConfig>();
    }
    if (j.contains("inference")) cfg.inference = j["inference"].get<InferenceConfig>();
    if (j.contains("baselines")) cfg.baselines = j["baselines"].get<baselines::BaselineParams>();
    if (j.contains("corpus")) {
      reject_seed(j["corpus"], "corpus", "seed");
      if (j["corpus"].contains("speckle")) reject_seed(j["corpus"]["speckle"], "corpus.speckle", "seed");
      cfg.corpus = j["corpus"].get<CorpusConfig>();
      if (cfg.corpus.source_dir.is_relative() && !cfg.corpus.source_dir.empty()) {
        cfg.corpus.source_dir = base_dir / cfg.corpus.source_dir;
      }
    }
    if (j.contains("evaluation")) {
      const json& e = j["evaluation"];
      if (!e.is_object()) throw ConfigError("config section 'evaluation' must be an object");
      for (const auto& [key, _] : e.items()) {
        if (key != "supervised" && key != "tune_baselines" && key != "tuning_images" && key != "panel_images" &&
            key != "grid") {
          throw ConfigError("unknown key '" + key + "' in config section 'evaluation'");
        }
      }
      auto& ev = cfg.evaluation;
      if (e.contains("supervised")) ev.supervised = e["supervised"].get<bool>();
      if (e.contains("tune_baselines")) ev.tune_baselines = e["tune_baselines"].get<bool>();
      if (e.contains("tuning_images")) ev.tuning_images = e["tuning_images"].get<int>();
      if (e.contains("panel_images")) ev.panel_images = e["panel_images"].get<int>();
      if (e.contains("grid")) {
        const json& g = e["grid"];
        for (const auto& [key, _] : g.items()) {
          if (key != "tv_weight" && key != "wavelet_threshold_scale" && key != "nlm_h" && key != "bm3d_sigma") {
            throw ConfigError("unknown key '" + key + "' in config section 'evaluation.grid'");
          }
        }
        if (g.contains("tv_weight")) ev.grid.tv_weight = g["tv_weight"].get<std::vector<double>>();
        if (g.contains("wavelet_threshold_scale")) {
          ev.grid.wavelet_threshold_scale = g["wavelet_threshold_scale"].get<std::vector<double>>();
        }
        if (g.contains("nlm_h")) ev.grid.nlm_h = g["nlm_h"].get<std::vector<double>>();
        if (g.contains("bm3d_sigma")) ev.grid.bm3d_sigma = g["bm3d_sigma"].get<std::vector<double>>();
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path.string() + "': " + e.what());
  }
  return experiment_from_json(j, path.parent_path());
}

PrepareResult cmd_prepare(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.manifest_path.empty()) throw ConfigError("config does not name a manifest");
  const PatchDataset data = build_from_config(cfg);
  PrepareResult r{data.digest(), data.train.size(), data.val.size(), data.test.size()};

  const fs::path dir = cfg.dataset_dir();
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "digest.json");
    if (!out) throw DataError("cannot write '" + (dir / "digest.json").string() + "'");
    json j{{"digest", r.digest},
           {"counts", {{"train", r.n_train}, {"val", r.n_val}, {"test", r.n_test}}},
           {"config", to_json(cfg)}};
    out << j.dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "patches.csv");
    out << "split,source_id,patch_index,row,col\n";
    auto dump = [&](const char* split, const std::vector<PatchEntry>& entries) {
      for (const auto& e : entries) {
        out << split << ',' << e.source_id << ',' << e.patch_index << ',' << e.origin.row << ','
            << e.origin.col << '\n';
      }
    };
    dump("train", data.train);
    dump("val", data.val);
    dump("test", data.test);
  }
  log << "prepared " << r.n_train << "/" << r.n_val << "/" << r.n_test << " patches, digest " << r.digest
      << '\n';
  return r;
}

fs::path cmd_train(const ExperimentConfig& cfg, std::ostream& log, bool resume) {
  if (resume) {
    throw ConfigError("training is single-shot: resuming an interrupted run is not supported; rerun train");
  }
  cfg.validate();
  const std::string prepared = read_prepared_digest(cfg);
  const PatchDataset data = build_from_config(cfg);
  if (data.digest() != prepared) {
    throw DataError("dataset digest mismatch: prepared " + prepared + ", rebuilt " + data.digest() +
                    " (config or data changed since prepare)");
  }

  auto run = [&](bool supervised) {
    const char* label = supervised ? "supervised" : "self-supervised";
    UNet<float> net(cfg.unet, supervised ? cfg.seeds().supervised_init : cfg.seeds().init);
    auto progress = [&](const EpochRecord& r, bool improved) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "[%s] epoch %d train %.6g val %.6g%s\n", label, r.epoch, r.train_loss,
                    r.val_loss, improved ? " *" : "");
      log << buf << std::flush;
    };
    const TrainConfig tcfg = cfg.seeded_train(supervised);
    TrainedModel m = supervised ? train_supervised(net, data, tcfg, progress) : train(net, data, tcfg, progress);
    save_model(m, cfg.model_path(supervised));
    write_history_csv(m, cfg.output_dir / (supervised ? "history_supervised.csv" : "history.csv"));
    log << "[" << label << "] best epoch " << m.best_epoch << ", saved " << cfg.model_path(supervised).string()
        << '\n';
  };
  run(false);
  if (cfg.evaluation.supervised) run(true);
  return cfg.model_path(false);
}

DenoiseSummary cmd_denoise(const fs::path& model_path, const fs::path& image_path, const fs::path& out_path,
                           const InferenceConfig& icfg, const std::optional<fs::path>& ground_truth,
                           std::ostream& log) {
  const TrainedModel model = load_model(model_path);
  icfg.validate(model.unet.depth);
  const ImagePlane noisy = read_image(image_path);
  std::optional<ImagePlane> truth;
  if (ground_truth) {
    truth = read_image(*ground_truth);
    require_same_shape(noisy, *truth, "denoise --ground-truth");
  }
  const DenoiseResult res = denoise_with_trace(model, noisy, icfg);
  write_image(res.output, out_path);

  DenoiseSummary s{res.output.width(), res.output.height(), {}, {}};
  if (truth) {
    for (std::size_t k = 0; k < res.iterations.size(); ++k) {
      fs::path p = out_path;
      p.replace_filename(out_path.stem().string() + "_iter" + std::to_string(k + 1) + ".png");
      write_image(res.iterations[k], p);
      const double v = psnr(*truth, quantize_u8(res.iterations[k]));
      s.psnr_trace.push_back(v);
      s.intermediates.push_back(p);
      char buf[96];
      std::snprintf(buf, sizeof(buf), "iteration %zu: PSNR %.4f dB\n", k + 1, v);
      log << buf;
    }
  }
  log << "wrote " << out_path.string() << " (" << s.width << "x" << s.height << ", " << res.seconds << " s)\n";
  return s;
}

namespace {

MetricsReport evaluate_impl(const ExperimentConfig& cfg, const fs::path& model_path,
                            const std::optional<fs::path>& supervised_path, std::ostream& log,
                            const fs::path* panel_dir) {
  cfg.validate();
  MetricsReport report;
  report.started_at = utc_timestamp();
  report.config = to_json(cfg);

  const TrainedModel model = load_model(model_path, cfg.unet);
  std::optional<TrainedModel> sup;
  if (supervised_path) sup = load_model(*supervised_path, cfg.unet);

  const PatchDataset data = build_from_config(cfg);
  report.dataset_digest = data.digest();
  if (model.dataset_digest != report.dataset_digest) {
    log << "warning: model was trained on dataset " << model.dataset_digest << ", evaluating on "
        << report.dataset_digest << '\n';
  }

  baselines::BaselineParams params = cfg.baselines;
  const bool bm3d_on = params.bm3d.enabled && baselines::bm3d_available();
  if (cfg.evaluation.tune_baselines) {
    std::vector<baselines::ImagePair> val;
    for (const auto& e : data.val) {
      if (!e.clean) continue;
      val.push_back({e.noisy, *e.clean});
      if (cfg.evaluation.tuning_images > 0 && static_cast<int>(val.size()) >= cfg.evaluation.tuning_images) break;
    }
    if (val.empty()) {
      log << "warning: no validation ground truth, baselines keep configured parameters\n";
    } else {
      log << "tuning baselines on " << val.size() << " validation patches\n";
      params = baselines::tune_baselines(val, params, cfg.evaluation.grid);
    }
  }
  report.parameters = json{{"baselines", params}, {"inference", cfg.inference}};

  std::vector<std::string> methods{"Noisy", "TV", "Wavelet", "NLM"};
  if (bm3d_on) methods.push_back("BM3D");
  methods.push_back("Ours");
  if (sup) methods.push_back("Supervised");
  if (!bm3d_on) report.footnotes.push_back("BM3D omitted: baseline disabled or not compiled in.");
  for (const auto& m : methods) report.methods.push_back({m, {}, {}});

  auto run_method = [&](const std::string& method, const ImagePlane& noisy) -> ImagePlane {
    if (method == "Noisy") return noisy;
    if (method == "TV") return baselines::run_baseline(baselines::Baseline::TV, noisy, params);
    if (method == "Wavelet") return baselines::run_baseline(baselines::Baseline::Wavelet, noisy, params);
    if (method == "NLM") return baselines::run_baseline(baselines::Baseline::NLM, noisy, params);
    if (method == "BM3D") return baselines::run_baseline(baselines::Baseline::BM3D, noisy, params);
    if (method == "Ours") return denoise(model, noisy, cfg.inference);
    return denoise(*sup, noisy, cfg.inference);
  };

  int panels_written = 0;
  std::size_t done = 0;
  for (const auto& e : data.test) {
    ++done;
    const std::string id = patch_id(e);
    if (!e.clean) {
      log << "warning: no ground truth for test patch " << id << ", skipped\n";
      report.skipped_images.push_back(id);
      continue;
    }
    const bool panel = panel_dir && panels_written < cfg.evaluation.panel_images;
    fs::path pdir;
    if (panel) {
      char name[32];
      std::snprintf(name, sizeof(name), "%02d_", panels_written);
      pdir = *panel_dir / (name + e.source_id + "_" + std::to_string(e.patch_index));
      write_image(e.noisy, pdir / "input_noisy.png");
      write_image(*e.clean, pdir / "input_clean.png");
      ++panels_written;
    }
    for (std::size_t k = 0; k < methods.size(); ++k) {
      const ImagePlane out = quantize_u8(run_method(methods[k], e.noisy));
      report.methods[k].add(id, evaluate_pair(*e.clean, out));
      if (panel) write_image(out, pdir / (methods[k] + ".png"));
    }
    if (done % 10 == 0 || done == data.test.size()) {
      log << "evaluated " << done << "/" << data.test.size() << " test patches\n" << std::flush;
    }
  }
  for (auto& m : report.methods) m.finalize();
  report.finished_at = utc_timestamp();

  write_metrics_csv(report, cfg.output_dir / "metrics.csv");
  write_metrics_markdown(report, cfg.output_dir / "metrics.md");
  write_report_json(report, cfg.output_dir / "report.json");
  return report;
}

}  // namespace

MetricsReport cmd_evaluate(const ExperimentConfig& cfg, const fs::path& model_path,
                           const std::optional<fs::path>& supervised_model_path, std::ostream& log) {
  MetricsReport r = evaluate_impl(cfg, model_path, supervised_model_path, log, nullptr);
  log << metrics_markdown(r);
  return r;
}

MetricsReport cmd_compare(const ExperimentConfig& cfg, const fs::path& model_path,
                          const std::optional<fs::path>& supervised_model_path, std::ostream& log) {
  const fs::path panels = cfg.output_dir / "panels";
  if (fs::exists(panels)) fs::remove_all(panels);
  MetricsReport r = evaluate_impl(cfg, model_path, supervised_model_path, log, &panels);
  std::ofstream out(cfg.output_dir / "comparison.md");
  out << "# Method comparison\n\nRanked by mean PSNR over the test split (mean ± sample std).\n\n"
      << metrics_markdown(r) << "\nExample outputs: `panels/`\n";
  log << metrics_markdown(r);
  return r;
}

ProbeReport cmd_probe(const ScalarPrior& prior, const NoiseSpec& nspec, std::uint64_t n_samples, int n_bins,
                      const fs::path& out_dir, std::ostream& log) {
  const ProbeReport r = conditional_expectation_probe(prior, nspec, n_samples, n_bins);
  write_probe_csv(r, out_dir / "probe.csv");
  log << "probe: " << r.bins() << " bins written to " << (out_dir / "probe.csv").string() << '\n';
  return r;
}

fs::path cmd_synth(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& log) {
  const CorpusConfig c = cfg.seeded_corpus();
  const fs::path manifest = write_synthetic_corpus(c, dir);
  log << "wrote " << load_manifest(manifest).entries.size() << " speckled images and " << manifest.string() << '\n';
  return manifest;
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::Config: return 2;
      case ErrorKind::Data: return 3;
      case ErrorKind::Numeric: return 4;
      case ErrorKind::Capability: return 5;
      case ErrorKind::Domain: return 6;
    }
  }
  return 1;
}

}  // namespace specknet
