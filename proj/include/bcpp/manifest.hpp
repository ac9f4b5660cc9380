#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace bcpp {

struct CheckResult {
  std::string name;
  bool passed;
  double value;
  double threshold;
  std::string detail;
};

struct RunManifest {
  std::string config_hash;  // SHA-256 of the canonical config text
  std::string subcommand;
  std::string started;      // UTC, ISO 8601
  std::string finished;
  std::string version;
  std::vector<std::string> outputs;  // file names relative to the manifest
  std::vector<CheckResult> checks;
  std::string canonical_config;

  bool all_passed() const;
};

std::string sha256_hex(const std::string& data);
std::string utc_timestamp();
const char* code_version();

std::string manifest_json(const RunManifest& m);
RunManifest parse_manifest(const std::string& json_text);

void write_manifest(const RunManifest& m, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

// Every *.manifest.json directly under dir, sorted by file name.
std::vector<std::filesystem::path> find_manifests(const std::filesystem::path& dir);

}  // namespace bcpp
