#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "json.hpp"

#include "crisiskit/bpe_tokenizer.hpp"
#include "crisiskit/checkpoint.hpp"
#include "crisiskit/encoder.hpp"

namespace crisiskit {

/// Model directory layout: config.json + model.bin/model.json (checkpoint)
/// + vocab.tsv/merges.txt (tokenizer).
namespace modeldir {

inline std::string config_path(const std::string& dir) { return dir + "/config.json"; }
inline std::string bin_path(const std::string& dir) { return dir + "/model.bin"; }
inline std::string manifest_path(const std::string& dir) { return dir + "/model.json"; }
inline std::string vocab_path(const std::string& dir) { return dir + "/vocab.tsv"; }
inline std::string merges_path(const std::string& dir) { return dir + "/merges.txt"; }

}  // namespace modeldir

template <class Real>
void save_encoder_dir(const std::string& dir, const EncoderModel<Real>& model,
                      const BpeTokenizer& tok) {
  std::filesystem::create_directories(dir);
  nlohmann::json cfg;
  to_json(cfg, model.cfg);
  cfg["has_head"] = false;
  std::ofstream(modeldir::config_path(dir)) << cfg.dump(2) << "\n";
  num::save_checkpoint(modeldir::bin_path(dir), modeldir::manifest_path(dir),
                       model.named_params());
  tok.save(modeldir::vocab_path(dir), modeldir::merges_path(dir));
}

template <class Real>
void save_classifier_dir(const std::string& dir, const Classifier<Real>& clf,
                         const BpeTokenizer& tok) {
  std::filesystem::create_directories(dir);
  nlohmann::json cfg;
  to_json(cfg, clf.encoder.cfg);
  cfg["has_head"] = true;
  cfg["pooling"] = to_string(clf.pooling);
  std::ofstream(modeldir::config_path(dir)) << cfg.dump(2) << "\n";
  num::save_checkpoint(modeldir::bin_path(dir), modeldir::manifest_path(dir),
                       clf.named_params());
  tok.save(modeldir::vocab_path(dir), modeldir::merges_path(dir));
}

inline nlohmann::json read_model_config(const std::string& dir) {
  std::ifstream in(modeldir::config_path(dir));
  if (!in) throw std::runtime_error("missing input: " + modeldir::config_path(dir));
  return nlohmann::json::parse(in);
}

inline BpeTokenizer load_tokenizer_dir(const std::string& dir) {
  return BpeTokenizer::load(modeldir::vocab_path(dir), modeldir::merges_path(dir));
}

template <class Real>
EncoderModel<Real> load_encoder_dir(const std::string& dir) {
  nlohmann::json j = read_model_config(dir);
  EncoderConfig cfg = j.template get<EncoderConfig>();
  Rng rng(0);
  EncoderModel<Real> model = EncoderModel<Real>::init(cfg, rng);
  num::load_checkpoint(modeldir::bin_path(dir), modeldir::manifest_path(dir),
                       model.named_params());
  return model;
}

template <class Real>
Classifier<Real> load_classifier_dir(const std::string& dir) {
  nlohmann::json j = read_model_config(dir);
  if (!j.value("has_head", false))
    throw std::runtime_error(dir + " holds a bare encoder, not a classifier");
  EncoderConfig cfg = j.template get<EncoderConfig>();
  Rng rng(0);
  Classifier<Real> clf = Classifier<Real>::init(
      cfg, rng, pooling_from_string(j.value("pooling", std::string("mean"))));
  num::load_checkpoint(modeldir::bin_path(dir), modeldir::manifest_path(dir),
                       clf.named_params());
  return clf;
}

/// Saved beside a generic-distillation student.
template <class Real>
void save_projection(const std::string& dir, const DownsampleProjection<Real>& proj) {
  std::filesystem::create_directories(dir);
  num::save_checkpoint(dir + "/projection.bin", dir + "/projection.json",
                       proj.named_params());
}

}  // namespace crisiskit
