#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "json.hpp"

#include "crisiskit/rng.hpp"

namespace crisiskit {

/// FNV-1a over file bytes, hex encoded; stable fingerprint for manifests.
inline std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing input: " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 15];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

/// Every CLI stage writes one of these: the fully resolved config, the
/// seed, and fingerprints of inputs and outputs. Enough to re-run the
/// stage exactly; no timestamps, so identical runs give identical bytes.
struct RunManifest {
  std::string subcommand;
  std::uint64_t seed = 0;
  std::string out_base;  // outputs are keyed relative to this directory
  nlohmann::json config;
  std::map<std::string, std::string> inputs;   // path -> hash
  std::map<std::string, std::string> outputs;  // relative path -> hash

  void add_input(const std::string& path) { inputs[path] = hash_file(path); }

  void add_output(const std::string& path) {
    std::string key = path;
    if (!out_base.empty()) {
      std::error_code ec;
      auto rel = std::filesystem::relative(path, out_base, ec);
      if (!ec && !rel.empty()) key = rel.string();
    }
    outputs[key] = hash_file(path);
  }

  void write(const std::string& path) const {
    nlohmann::json j = {{"subcommand", subcommand},
                        {"seed", seed},
                        {"config", config},
                        {"inputs", inputs},
                        {"outputs", outputs}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
  }
};

}  // namespace crisiskit
