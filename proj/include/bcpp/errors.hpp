#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace bcpp {

// Bad user input: invalid parameters, unknown keys, lattice too small.
// Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::optional<int> line = std::nullopt,
                       std::string key = {})
      : std::runtime_error(what), line_(line), key_(std::move(key)) {}

  std::optional<int> line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  std::optional<int> line_;
  std::string key_;
};

// A formula evaluated outside the region where it is meaningful
// (e.g. an escape probability <= 1/2). Treated as a configuration error.
class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A numerical procedure could not reach its tolerance (series budget,
// solver stagnation, large negative kernel entries).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated internal contract, e.g. a CSV row that does not match its schema.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace bcpp
