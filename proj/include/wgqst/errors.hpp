#pragma once

#include <stdexcept>
#include <string>

namespace wgqst {

/// Base of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the physically meaningful domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A dispersion relation cannot be inverted on the requested window.
class NonInvertibleError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine failed or produced a non-finite result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Dimension or layout mismatch between objects.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration file or key.
class ConfigError : public DomainError {
 public:
  ConfigError(const std::string& what, std::string key = {})
      : DomainError(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace wgqst
