#include "nmt/errors.hpp"

namespace nmt {

namespace {

std::string join_issues(const std::vector<ValidationIssue>& issues) {
  std::string out = "invalid configuration:";
  for (const auto& issue : issues) {
    out += " [" + issue.key + ": " + issue.message + "]";
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : ConfigError(join_issues(issues)), issues_(std::move(issues)) {}

DivergedError::DivergedError(int stage, std::size_t iteration,
                             const std::string& what)
    : Error("stage " + std::to_string(stage) + " diverged at iteration " +
            std::to_string(iteration) + ": " + what),
      stage_(stage),
      iteration_(iteration) {}

}  // namespace nmt
