#pragma once

#include <stdexcept>
#include <string>

namespace wkam {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-domain arguments.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration. `key()` names the offending setting.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// An iterative method failed to meet its tolerance.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace wkam
