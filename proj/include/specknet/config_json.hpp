#pragma once

#include "json.hpp"

#include "specknet/baselines/tuning.hpp"
#include "specknet/dataset.hpp"
#include "specknet/inference.hpp"
#include "specknet/phantom.hpp"
#include "specknet/trainer.hpp"
#include "specknet/unet.hpp"

namespace specknet {

// JSON mappings for the configuration structs. Missing keys keep their defaults;
// unknown keys are rejected with ConfigError.

void to_json(nlohmann::json& j, const NoiseSpec& v);
void from_json(const nlohmann::json& j, NoiseSpec& v);
void to_json(nlohmann::json& j, const SpeckleSpec& v);
void from_json(const nlohmann::json& j, SpeckleSpec& v);
void to_json(nlohmann::json& j, const PatchConfig& v);
void from_json(const nlohmann::json& j, PatchConfig& v);
void to_json(nlohmann::json& j, const UNetConfig& v);
void from_json(const nlohmann::json& j, UNetConfig& v);
void to_json(nlohmann::json& j, const TrainConfig& v);
void from_json(const nlohmann::json& j, TrainConfig& v);
void to_json(nlohmann::json& j, const InferenceConfig& v);
void from_json(const nlohmann::json& j, InferenceConfig& v);
void to_json(nlohmann::json& j, const CorpusConfig& v);
void from_json(const nlohmann::json& j, CorpusConfig& v);
void to_json(nlohmann::json& j, const EpochRecord& v);
void from_json(const nlohmann::json& j, EpochRecord& v);

namespace baselines {
void to_json(nlohmann::json& j, const BaselineParams& v);
void from_json(const nlohmann::json& j, BaselineParams& v);
}  // namespace baselines

}  // namespace specknet
