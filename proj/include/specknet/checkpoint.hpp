#pragma once

#include <filesystem>
#include <optional>

#include "specknet/trainer.hpp"

namespace specknet {

/// Binary layout: "SPKNCKPT", u32 version, u64 header length, JSON header, u64 parameter count,
/// float32 parameters, then the lowercase hex SHA-256 (64 bytes) of everything before it.
/// Numbers are little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_model(const TrainedModel& model, const std::filesystem::path& path);

/// Throws DataError "corrupt checkpoint" on truncation or digest mismatch,
/// "unsupported checkpoint version" on a version change and ConfigError "config mismatch"
/// when `expected` is given and differs from the stored architecture.
TrainedModel load_model(const std::filesystem::path& path,
                        const std::optional<UNetConfig>& expected = std::nullopt);

}  // namespace specknet
