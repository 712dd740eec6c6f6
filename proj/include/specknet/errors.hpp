#pragma once

#include <stdexcept>
#include <string>

namespace specknet {

/// Coarse error category. The CLI maps each category to its own exit code.
enum class ErrorKind { Config, Data, Domain, Numeric, Capability };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Invalid configuration or parameter values.
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// Missing, malformed or inconsistent input data (files, manifests, checkpoints).
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// A value-domain precondition was violated (wrong domain tag, negative pixel, ...).
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

/// Non-finite values during training or inference.
struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

/// A feature that is not available in this build or configuration.
struct CapabilityError : Error {
  explicit CapabilityError(const std::string& what) : Error(ErrorKind::Capability, what) {}
};

}  // namespace specknet
