#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hwdmd {

/// Broad failure classes. The CLI maps each one to an exit code and a
/// machine-readable category string.
enum class ErrorCategory { config, data, numeric, io };

std::string_view to_string(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Bad parameters or inconsistent configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

/// Input data that violates a documented precondition.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// Rank deficiency, dimension mismatch after an update, and similar.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCategory::numeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

}  // namespace hwdmd
