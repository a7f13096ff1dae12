#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvrl {

/// Operand shapes do not line up (tensor ops, network layers, model inputs).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation was called in a state or for a variant it does not support.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed binary input; carries the byte offset where decoding failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Input data is missing, inconsistent, or cannot support the request.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value surfaced during training or optimization.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration validation failed; holds every problem found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors)
      : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& errors) {
    std::string out = "invalid configuration:";
    for (const auto& e : errors) out += "\n  - " + e;
    return out;
  }

  std::vector<std::string> errors_;
};

}  // namespace mvrl
