#include "bcpp/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "bcpp/errors.hpp"

namespace bcpp {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

std::string where(std::optional<int> line) {
  return line ? "line " + std::to_string(*line) : std::string("command line");
}

}  // namespace

std::string_view to_string(ValueType type) {
  switch (type) {
    case ValueType::integer: return "integer";
    case ValueType::real: return "real";
    case ValueType::text: return "text";
    case ValueType::int_list: return "integer list";
    case ValueType::real_list: return "real list";
  }
  return "?";
}

std::optional<std::int64_t> parse_integer(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::vector<std::string>> split_list(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') return std::nullopt;
    s = trim(s.substr(1, s.size() - 2));
  }
  std::vector<std::string> items;
  if (s.empty()) return items;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    const std::string_view item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (item.empty()) return std::nullopt;
    items.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

ConfigDocument ConfigDocument::parse(std::string_view text) {
  ConfigDocument doc;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || !valid_name(trim(line.substr(1, line.size() - 2)))) {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header '" + std::string(line) + "'",
                          line_no);
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
    } else {
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" + std::string(line) +
                              "'",
                          line_no);
      }
      const std::string_view name = trim(line.substr(0, eq));
      const std::string_view value = trim(line.substr(eq + 1));
      if (!valid_name(name)) {
        throw ConfigError("line " + std::to_string(line_no) + ": invalid key '" + std::string(name) + "'", line_no);
      }
      if (value.empty()) {
        throw ConfigError("line " + std::to_string(line_no) + ": key '" + std::string(name) + "' has no value",
                          line_no, std::string(name));
      }
      const std::string key = section.empty() ? std::string(name) : section + "." + std::string(name);
      if (doc.entries_.count(key) != 0) {
        throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "' (first set on line " +
                              std::to_string(*doc.entries_[key].line) + ")",
                          line_no, key);
      }
      doc.entries_[key] = {std::string(value), line_no};
    }
    if (end == text.size()) break;
  }
  return doc;
}

void ConfigDocument::set(const std::string& key, std::string value, std::optional<int> line) {
  entries_[key] = {std::move(value), line};
}

const ConfigEntry* ConfigDocument::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<int> ConfigDocument::line_of(const std::string& key) const {
  const ConfigEntry* e = find(key);
  return e ? e->line : std::nullopt;
}

void ConfigDocument::check_known(const Schema& schema) const {
  for (const auto& [key, entry] : entries_) {
    const bool known = std::any_of(schema.begin(), schema.end(), [&](const KeySpec& s) { return s.key == key; });
    if (!known) {
      throw ConfigError(where(entry.line) + ": unknown key '" + key + "'", entry.line, key);
    }
  }
}

ConfigReader::ConfigReader(const ConfigDocument& doc, const Schema& schema) : doc_(doc), schema_(schema) {
  doc_.check_known(schema_);
}

const KeySpec& ConfigReader::spec(const std::string& key) const {
  for (const KeySpec& s : schema_) {
    if (s.key == key) return s;
  }
  throw InternalError("config key '" + key + "' is not in the schema");
}

bool ConfigReader::has(const std::string& key) const {
  spec(key);
  return doc_.find(key) != nullptr || !spec(key).fallback.empty();
}

std::string ConfigReader::raw(const std::string& key) const {
  const KeySpec& s = spec(key);
  if (const ConfigEntry* e = doc_.find(key)) return e->value;
  return s.fallback;
}

void ConfigReader::mismatch(const std::string& key, std::string_view expected, const std::string& value) const {
  const std::optional<int> line = doc_.line_of(key);
  throw ConfigError(where(line) + ": type mismatch for '" + key + "': expected " + std::string(expected) + ", got '" +
                        value + "'",
                    line, key);
}

std::int64_t ConfigReader::integer(const std::string& key) const {
  const std::string v = raw(key);
  const auto parsed = parse_integer(v);
  if (!parsed) mismatch(key, "integer", v);
  return *parsed;
}

std::uint64_t ConfigReader::unsigned_integer(const std::string& key) const {
  const std::string v = raw(key);
  const std::string_view s = trim(v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) mismatch(key, "non-negative integer", v);
  return out;
}

double ConfigReader::real(const std::string& key) const {
  const std::string v = raw(key);
  const auto parsed = parse_real(v);
  if (!parsed) mismatch(key, "real", v);
  return *parsed;
}

std::string ConfigReader::text(const std::string& key) const { return std::string(trim(raw(key))); }

std::vector<int> ConfigReader::int_list(const std::string& key) const {
  const std::string v = raw(key);
  const auto items = split_list(v);
  if (!items) mismatch(key, "integer list", v);
  std::vector<int> out;
  for (const std::string& item : *items) {
    const auto parsed = parse_integer(item);
    if (!parsed || *parsed < std::numeric_limits<int>::min() || *parsed > std::numeric_limits<int>::max()) {
      mismatch(key, "integer list", v);
    }
    out.push_back(static_cast<int>(*parsed));
  }
  return out;
}

std::vector<double> ConfigReader::real_list(const std::string& key) const {
  const std::string v = raw(key);
  const auto items = split_list(v);
  if (!items) mismatch(key, "real list", v);
  std::vector<double> out;
  for (const std::string& item : *items) {
    const auto parsed = parse_real(item);
    if (!parsed) mismatch(key, "real list", v);
    out.push_back(*parsed);
  }
  return out;
}

std::string ConfigReader::canonical() const {
  std::vector<std::string> lines;
  for (const KeySpec& s : schema_) lines.push_back(s.key + " = " + std::string(trim(raw(s.key))));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const std::string& l : lines) out += l + "\n";
  return out;
}

void ConfigReader::rethrow_with_line(const ConfigError& e) const {
  const std::optional<int> line = e.line() ? e.line() : doc_.line_of(e.key());
  std::string msg = e.what();
  if (line && !e.line()) msg = "line " + std::to_string(*line) + ": " + msg;
  if (dynamic_cast<const DomainError*>(&e) != nullptr) throw DomainError(msg, line, e.key());
  throw ConfigError(msg, line, e.key());
}

const Schema& experiment_schema() {
  static const Schema schema = {
      {"d", ValueType::integer, "3", "lattice dimension"},
      {"lambda", ValueType::real, "0.6", "infection rate per directed edge"},
      {"N_list", ValueType::int_list, "[4, 8, 16]", "scale parameters N"},
      {"t_list", ValueType::real_list, "[0.05]", "macroscopic times"},
      {"replicas", ValueType::integer, "200", "replicas per N"},
      {"c_L", ValueType::integer, "8", "torus side L = c_L * N"},
      {"master_seed", ValueType::integer, "1", "master seed"},
      {"output", ValueType::text, "out", "output directory"},
      {"workers", ValueType::integer, "1", "worker threads"},
      {"profile.kind", ValueType::text, "gaussian_bump", "constant_bump, gaussian_bump or smooth_box"},
      {"profile.center", ValueType::real_list, "", "profile center (default: origin)"},
      {"profile.radius", ValueType::real, "0.5", "bump radius"},
      {"profile.width", ValueType::real, "0.25", "gaussian width or fall-off width"},
      {"profile.height", ValueType::real, "1", "profile height"},
      {"test_fn.kind", ValueType::text, "cosine_bump", "cosine_bump or polynomial_bump"},
      {"test_fn.center", ValueType::real_list, "", "test function center (default: origin)"},
      {"test_fn.radius", ValueType::real, "0.5", "support radius"},
      {"test_fn.inner_radius", ValueType::real, "0.25", "quadratic core radius (polynomial_bump)"},
      {"quadrature.gh_order", ValueType::integer, "20", "Gauss-Hermite order of the heat solution"},
      {"quadrature.radial_order", ValueType::integer, "16", "radial Gauss-Legendre order"},
      {"quadrature.angular_order", ValueType::integer, "24", "angular points"},
  };
  return schema;
}

namespace {

int to_int(const ConfigReader& r, const std::string& key) {
  const std::int64_t v = r.integer(key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError("value of '" + key + "' is out of range", std::nullopt, key);
  }
  return static_cast<int>(v);
}

std::vector<double> center_or_origin(const ConfigReader& r, const std::string& key, int d) {
  if (!r.has(key)) return std::vector<double>(static_cast<std::size_t>(std::max(d, 0)), 0.0);
  return r.real_list(key);
}

template <class Fn>
auto keyed(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    if (!e.key().empty()) throw;
    throw ConfigError(e.what(), e.line(), key);
  }
}

}  // namespace

ExperimentConfig experiment_from(const ConfigReader& r) {
  try {
    ExperimentConfig cfg;
    cfg.d = to_int(r, "d");
    cfg.lambda = r.real("lambda");
    cfg.N_list = r.int_list("N_list");
    cfg.t_list = r.real_list("t_list");
    const std::int64_t replicas = r.integer("replicas");
    if (replicas < 2) throw ConfigError("replicas must be >= 2", std::nullopt, "replicas");
    cfg.replicas = static_cast<std::uint64_t>(replicas);
    cfg.c_L = to_int(r, "c_L");
    cfg.master_seed = static_cast<std::uint64_t>(r.integer("master_seed"));
    cfg.output = r.text("output");
    cfg.workers = to_int(r, "workers");
    cfg.profile.kind = keyed("profile.kind", [&] { return parse_profile_kind(r.text("profile.kind")); });
    cfg.profile.center = center_or_origin(r, "profile.center", cfg.d);
    cfg.profile.radius = r.real("profile.radius");
    cfg.profile.width = r.real("profile.width");
    cfg.profile.height = r.real("profile.height");
    cfg.test_fn.kind = keyed("test_fn.kind", [&] { return parse_test_function_kind(r.text("test_fn.kind")); });
    cfg.test_fn.center = center_or_origin(r, "test_fn.center", cfg.d);
    cfg.test_fn.radius = r.real("test_fn.radius");
    cfg.test_fn.inner_radius = r.real("test_fn.inner_radius");
    cfg.quadrature.gh_order = to_int(r, "quadrature.gh_order");
    cfg.quadrature.radial_order = to_int(r, "quadrature.radial_order");
    cfg.quadrature.angular_order = to_int(r, "quadrature.angular_order");
    cfg.validate();
    return cfg;
  } catch (const ConfigError& e) {
    r.rethrow_with_line(e);
  }
}

ExperimentConfig parse_config(std::string_view text) {
  const ConfigDocument doc = ConfigDocument::parse(text);
  const ConfigReader reader(doc, experiment_schema());
  return experiment_from(reader);
}

}  // namespace bcpp
