#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nmt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable category ("config", "diverged", ...).
  virtual const char* kind() const noexcept { return "error"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

/// A single offending key found while validating a configuration.
struct ValidationIssue {
  std::string key;
  std::string message;
};

/// Raised when a configuration fails schema validation. Carries every issue,
/// not only the first one.
class ValidationError : public ConfigError {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);
  const char* kind() const noexcept override { return "validation"; }
  const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

/// A loss or gradient became non-finite. `stage` is 1-based, `iteration` is
/// the iteration within that stage.
class DivergedError : public Error {
 public:
  DivergedError(int stage, std::size_t iteration, const std::string& what);
  const char* kind() const noexcept override { return "diverged"; }
  int stage() const noexcept { return stage_; }
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  int stage_;
  std::size_t iteration_;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract"; }
};

/// Brute-force verification requested on a problem that is too large.
class UnsupportedScaleError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported_scale"; }
};

/// A metric is undefined for the given input (e.g. AUC with one class only).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "undefined_metric"; }
};

}  // namespace nmt
