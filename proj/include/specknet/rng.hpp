#pragma once

#include <cstdint>
#include <random>

namespace specknet {

using Rng = std::mt19937_64;

/// XOR salt separating the M2 noise stream from the M1 stream of one NoiseSpec.
inline constexpr std::uint64_t kSecondNoiseSalt = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t x);

/// Independent child seed for stream `stream` of `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace specknet
