#include "bcpp/manifest.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include <json.hpp>

#ifndef BCPP_VERSION
#define BCPP_VERSION "0.0.0"
#endif

namespace bcpp {

using nlohmann::json;

bool RunManifest::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* code_version() { return BCPP_VERSION; }

std::string manifest_json(const RunManifest& m) {
  json checks = json::array();
  for (const CheckResult& c : m.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold},
                      {"detail", c.detail}});
  }
  const json j = {{"config_hash", m.config_hash}, {"subcommand", m.subcommand}, {"started", m.started},
                  {"finished", m.finished},       {"version", m.version},       {"outputs", m.outputs},
                  {"checks", checks},             {"config", m.canonical_config}};
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& json_text) {
  const json j = json::parse(json_text);
  RunManifest m;
  m.config_hash = j.at("config_hash").get<std::string>();
  m.subcommand = j.at("subcommand").get<std::string>();
  m.started = j.at("started").get<std::string>();
  m.finished = j.at("finished").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  m.canonical_config = j.value("config", std::string());
  for (const json& c : j.at("checks")) {
    m.checks.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(), c.at("value").get<double>(),
                        c.at("threshold").get<double>(), c.value("detail", std::string())});
  }
  return m;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << manifest_json(m);
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_manifest(ss.str());
}

std::vector<std::filesystem::path> find_manifests(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 14 && name.ends_with(".manifest.json")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace bcpp
