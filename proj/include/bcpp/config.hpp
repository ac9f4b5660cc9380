#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bcpp/errors.hpp"
#include "bcpp/hydro.hpp"

namespace bcpp {

enum class ValueType { integer, real, text, int_list, real_list };

std::string_view to_string(ValueType type);

struct KeySpec {
  std::string key;  // "section.name" for keys under a [section] header
  ValueType type;
  std::string fallback;  // default value text; empty means "derived"
  std::string help;
};

using Schema = std::vector<KeySpec>;

struct ConfigEntry {
  std::string value;
  std::optional<int> line;  // nullopt for command-line and environment values
};

// Flat key-value document:
//
//   # comment
//   key = value
//   [section]
//   key = [1, 2, 3]    # becomes section.key
//
// Parsing checks syntax only; keys and types are checked against a Schema.
class ConfigDocument {
 public:
  // Throws ConfigError with the line number on malformed lines or duplicate
  // keys.
  static ConfigDocument parse(std::string_view text);

  void set(const std::string& key, std::string value, std::optional<int> line = std::nullopt);
  const ConfigEntry* find(const std::string& key) const;
  std::optional<int> line_of(const std::string& key) const;
  const std::map<std::string, ConfigEntry>& entries() const { return entries_; }

  // Throws ConfigError for the first key not in the schema.
  void check_known(const Schema& schema) const;

 private:
  std::map<std::string, ConfigEntry> entries_;
};

// Typed access with schema defaults. Type mismatches throw ConfigError naming
// the key and its line.
class ConfigReader {
 public:
  ConfigReader(const ConfigDocument& doc, const Schema& schema);

  bool has(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  double real(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;
  std::vector<double> real_list(const std::string& key) const;

  // Sorted "key = value" lines for every schema key with its effective value.
  std::string canonical() const;

  // Rethrows e with the line of its key attached, when known.
  [[noreturn]] void rethrow_with_line(const ConfigError& e) const;

 private:
  const KeySpec& spec(const std::string& key) const;
  std::string raw(const std::string& key) const;
  [[noreturn]] void mismatch(const std::string& key, std::string_view expected, const std::string& value) const;

  const ConfigDocument& doc_;
  const Schema& schema_;
};

// Value parsers shared with the command line.
std::optional<std::int64_t> parse_integer(std::string_view s);
std::optional<double> parse_real(std::string_view s);
std::optional<std::vector<std::string>> split_list(std::string_view s);

const Schema& experiment_schema();
ExperimentConfig experiment_from(const ConfigReader& reader);

// Parses and validates an experiment description. Errors carry line numbers.
ExperimentConfig parse_config(std::string_view text);

}  // namespace bcpp
