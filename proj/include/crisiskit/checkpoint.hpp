#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "crisiskit/autograd.hpp"

namespace crisiskit::num {

/// Checkpoints are a flat little-endian f32 blob plus a JSON manifest
/// mapping tensor name -> shape and byte offset.
template <class Real>
void save_checkpoint(const std::string& bin_path, const std::string& manifest_path,
                     const std::vector<NamedParam<Real>>& params) {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + bin_path);
  nlohmann::json manifest;
  manifest["dtype"] = "f32";
  nlohmann::json tensors = nlohmann::json::object();
  std::uint64_t offset = 0;
  for (const auto& [name, node] : params) {
    std::vector<float> buf(node->value.data.size());
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = float(node->value.data[i]);
    bin.write(reinterpret_cast<const char*>(buf.data()),
              std::streamsize(buf.size() * sizeof(float)));
    tensors[name] = {{"shape", node->value.shape}, {"offset", offset}};
    offset += buf.size() * sizeof(float);
  }
  manifest["tensors"] = std::move(tensors);
  manifest["total_bytes"] = offset;
  std::ofstream mf(manifest_path);
  if (!mf) throw std::runtime_error("cannot write " + manifest_path);
  mf << manifest.dump(2) << "\n";
}

template <class Real>
void load_checkpoint(const std::string& bin_path, const std::string& manifest_path,
                     const std::vector<NamedParam<Real>>& params) {
  std::ifstream mf(manifest_path);
  if (!mf) throw std::runtime_error("cannot open " + manifest_path);
  nlohmann::json manifest = nlohmann::json::parse(mf);
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + bin_path);

  const auto& tensors = manifest.at("tensors");
  for (const auto& [name, node] : params) {
    if (!tensors.contains(name))
      throw std::runtime_error("checkpoint is missing tensor " + name);
    const auto& entry = tensors.at(name);
    const auto shape = entry.at("shape").template get<std::vector<int>>();
    if (shape != node->value.shape)
      throw std::runtime_error("checkpoint shape mismatch for " + name);
    bin.seekg(std::streamoff(entry.at("offset").template get<std::uint64_t>()));
    std::vector<float> buf(node->value.data.size());
    bin.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * sizeof(float)));
    if (!bin) throw std::runtime_error("checkpoint truncated at " + name);
    for (size_t i = 0; i < buf.size(); ++i) node->value.data[i] = Real(buf[i]);
  }
}

}  // namespace crisiskit::num
