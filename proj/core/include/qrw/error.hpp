#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qrw {

// Precondition violated by the caller.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed persisted artifact. line() is 0 for binary formats.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Bad user input (empty query, unknown label, bad config value).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Embedding provider failure; retryable at the batch level.
class ProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A training pipeline stage failed; carries the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what),
        stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace qrw
