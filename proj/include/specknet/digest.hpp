#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace specknet {

/// Incremental SHA-256 (OpenSSL EVP). Numbers are hashed in little-endian byte order.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::span<const unsigned char> bytes);
  void update(std::string_view text);
  void update(std::span<const double> values);
  void update_u64(std::uint64_t v);

  /// Lowercase hex digest. The object cannot be updated afterwards.
  std::string hex();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::span<const unsigned char> bytes);

}  // namespace specknet
