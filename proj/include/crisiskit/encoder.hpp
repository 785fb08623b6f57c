#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "crisiskit/autograd.hpp"
#include "crisiskit/bpe_tokenizer.hpp"
#include "crisiskit/rng.hpp"

namespace crisiskit {

/// Transformer encoder shape: hidden size H, layers L, heads A,
/// intermediate size I, plus vocabulary, positions, and head width.
struct EncoderConfig {
  int hidden_size = 128;
  int num_layers = 4;
  int num_heads = 4;
  int intermediate_size = 512;
  int vocab_size = 8192;
  int max_positions = 64;
  int num_classes = 4;

  void validate() const {
    num::check(hidden_size > 0 && num_layers >= 0 && num_heads > 0 &&
                   intermediate_size > 0 && vocab_size > 0 && max_positions > 0,
               "encoder config fields must be positive");
    num::check(hidden_size % num_heads == 0, "hidden size must divide by head count");
    num::check(intermediate_size >= hidden_size, "intermediate size must be >= hidden");
  }

  bool operator==(const EncoderConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const EncoderConfig& c) {
  j = {{"hidden_size", c.hidden_size},
       {"num_layers", c.num_layers},
       {"num_heads", c.num_heads},
       {"intermediate_size", c.intermediate_size},
       {"vocab_size", c.vocab_size},
       {"max_positions", c.max_positions},
       {"num_classes", c.num_classes}};
}

inline void from_json(const nlohmann::json& j, EncoderConfig& c) {
  j.at("hidden_size").get_to(c.hidden_size);
  j.at("num_layers").get_to(c.num_layers);
  j.at("num_heads").get_to(c.num_heads);
  j.at("intermediate_size").get_to(c.intermediate_size);
  j.at("vocab_size").get_to(c.vocab_size);
  j.at("max_positions").get_to(c.max_positions);
  if (j.contains("num_classes")) j.at("num_classes").get_to(c.num_classes);
}

/// Closed-form parameter count: embeddings, embedding norm, and per layer
/// the four attention projections, the two FFN mats, and two norms.
/// The classifier head is not part of the encoder and is excluded.
inline std::int64_t count_params(const EncoderConfig& c) {
  c.validate();
  const std::int64_t h = c.hidden_size, i = c.intermediate_size;
  const std::int64_t embeddings = std::int64_t(c.vocab_size) * h +
                                  std::int64_t(c.max_positions) * h + 2 * h;
  const std::int64_t attention = 4 * h * h + 4 * h;
  const std::int64_t ffn = 2 * h * i + i + h;
  const std::int64_t norms = 4 * h;
  return embeddings + std::int64_t(c.num_layers) * (attention + ffn + norms);
}

/// Desk-scale reference shapes: a compact-encoder ladder with the usual
/// teacher:student ratios, sized so everything trains on one CPU core.
inline EncoderConfig desk_shape(const std::string& tag, int vocab_size = 8192,
                                int max_positions = 64, int num_classes = 4) {
  EncoderConfig c;
  c.vocab_size = vocab_size;
  c.max_positions = max_positions;
  c.num_classes = num_classes;
  if (tag == "teacher") {
    c.hidden_size = 128, c.num_layers = 4, c.num_heads = 4, c.intermediate_size = 512;
  } else if (tag == "s_m") {
    c.hidden_size = 64, c.num_layers = 2, c.num_heads = 2, c.intermediate_size = 256;
  } else if (tag == "s_s") {
    c.hidden_size = 48, c.num_layers = 2, c.num_heads = 2, c.intermediate_size = 192;
  } else if (tag == "s_t") {
    c.hidden_size = 32, c.num_layers = 1, c.num_heads = 1, c.intermediate_size = 128;
  } else {
    throw std::invalid_argument("unknown model shape tag: " + tag);
  }
  return c;
}

/// A padded batch of id sequences with the 0/1 attention mask.
struct TokenBatch {
  int batch = 0;
  int seq = 0;
  std::vector<int> ids;
  std::vector<int> mask;

  static TokenBatch from(std::span<const TokenSequence> seqs) {
    num::check(!seqs.empty(), "empty batch");
    TokenBatch b;
    b.batch = int(seqs.size());
    b.seq = int(seqs[0].ids.size());
    b.ids.reserve(size_t(b.batch) * b.seq);
    b.mask.reserve(size_t(b.batch) * b.seq);
    for (const auto& s : seqs) {
      num::check(int(s.ids.size()) == b.seq, "batch sequences must share one length");
      num::check(s.attention_mask.size() == s.ids.size(), "mask length mismatch");
      b.ids.insert(b.ids.end(), s.ids.begin(), s.ids.end());
      b.mask.insert(b.mask.end(), s.attention_mask.begin(), s.attention_mask.end());
    }
    return b;
  }

  template <class Real>
  num::Tensor<Real> mask_tensor() const {
    num::Tensor<Real> m({batch, seq});
    for (size_t i = 0; i < mask.size(); ++i) m.data[i] = Real(mask[i]);
    return m;
  }
};

enum class PoolingMode { MeanPool, ClsToken };

inline const char* to_string(PoolingMode m) {
  return m == PoolingMode::MeanPool ? "mean" : "cls";
}

inline PoolingMode pooling_from_string(const std::string& s) {
  if (s == "mean" || s == "mean_pool") return PoolingMode::MeanPool;
  if (s == "cls" || s == "cls_token") return PoolingMode::ClsToken;
  throw std::invalid_argument("unknown pooling mode: " + s);
}

/// Post-layer-norm residual encoder with learned absolute positions and an
/// embedding layer norm ahead of the first block.
template <class Real>
struct EncoderModel {
  struct Layer {
    num::NodePtr<Real> wq, bq, wk, bk, wv, bv, wo, bo;
    num::NodePtr<Real> norm1_gamma, norm1_beta;
    num::NodePtr<Real> w1, b1, w2, b2;
    num::NodePtr<Real> norm2_gamma, norm2_beta;
  };

  EncoderConfig cfg;
  num::NodePtr<Real> token_emb, pos_emb;
  num::NodePtr<Real> emb_norm_gamma, emb_norm_beta;
  std::vector<Layer> layers;

  /// Truncated-normal(0.02) weights, zero biases, identity norms.
  static EncoderModel init(const EncoderConfig& cfg, Rng& rng) {
    cfg.validate();
    EncoderModel m;
    m.cfg = cfg;
    const int h = cfg.hidden_size, i = cfg.intermediate_size;
    m.token_emb = randn_param({cfg.vocab_size, h}, rng);
    m.pos_emb = randn_param({cfg.max_positions, h}, rng);
    m.emb_norm_gamma = const_param({h}, Real(1));
    m.emb_norm_beta = const_param({h}, Real(0));
    for (int l = 0; l < cfg.num_layers; ++l) {
      Layer lay;
      lay.wq = randn_param({h, h}, rng);
      lay.bq = const_param({h}, Real(0));
      lay.wk = randn_param({h, h}, rng);
      lay.bk = const_param({h}, Real(0));
      lay.wv = randn_param({h, h}, rng);
      lay.bv = const_param({h}, Real(0));
      lay.wo = randn_param({h, h}, rng);
      lay.bo = const_param({h}, Real(0));
      lay.norm1_gamma = const_param({h}, Real(1));
      lay.norm1_beta = const_param({h}, Real(0));
      lay.w1 = randn_param({h, i}, rng);
      lay.b1 = const_param({i}, Real(0));
      lay.w2 = randn_param({i, h}, rng);
      lay.b2 = const_param({h}, Real(0));
      lay.norm2_gamma = const_param({h}, Real(1));
      lay.norm2_beta = const_param({h}, Real(0));
      m.layers.push_back(std::move(lay));
    }
    return m;
  }

  /// Token embeddings for the batch: [B, S, H]. PAD keys are masked out of
  /// attention; PAD queries still produce (ignored) outputs.
  num::NodePtr<Real> forward(const TokenBatch& batch) const {
    num::check(batch.seq <= cfg.max_positions, "sequence longer than max positions");
    const num::Tensor<Real> mask = batch.template mask_tensor<Real>();
    auto x = num::embedding(token_emb, batch.ids, batch.batch, batch.seq);
    x = num::add_position(x, pos_emb);
    x = num::layer_norm(x, emb_norm_gamma, emb_norm_beta);
    const Real inv_sqrt_dh = Real(1.0 / std::sqrt(double(cfg.hidden_size / cfg.num_heads)));
    for (const auto& lay : layers) {
      auto q = num::split_heads(num::affine(x, lay.wq, lay.bq), cfg.num_heads);
      auto k = num::split_heads(num::affine(x, lay.wk, lay.bk), cfg.num_heads);
      auto v = num::split_heads(num::affine(x, lay.wv, lay.bv), cfg.num_heads);
      auto scores = num::scale(num::bmm_nt(q, k), inv_sqrt_dh);
      auto att = num::masked_softmax(scores, mask, cfg.num_heads);
      auto ctx = num::merge_heads(num::bmm_nn(att, v), cfg.num_heads);
      auto attn_out = num::affine(ctx, lay.wo, lay.bo);
      x = num::layer_norm(num::add(x, attn_out), lay.norm1_gamma, lay.norm1_beta);
      auto ffn = num::affine(num::gelu(num::affine(x, lay.w1, lay.b1)), lay.w2, lay.b2);
      x = num::layer_norm(num::add(x, ffn), lay.norm2_gamma, lay.norm2_beta);
    }
    return x;
  }

  std::vector<num::NodePtr<Real>> params() const {
    std::vector<num::NodePtr<Real>> out;
    for (const auto& [name, node] : named_params()) out.push_back(node);
    return out;
  }

  std::vector<num::NamedParam<Real>> named_params() const {
    std::vector<num::NamedParam<Real>> out;
    out.push_back({"embeddings.token", token_emb});
    out.push_back({"embeddings.position", pos_emb});
    out.push_back({"embeddings.norm.gamma", emb_norm_gamma});
    out.push_back({"embeddings.norm.beta", emb_norm_beta});
    for (size_t l = 0; l < layers.size(); ++l) {
      const auto& lay = layers[l];
      const std::string p = "layers." + std::to_string(l) + ".";
      out.push_back({p + "attn.wq", lay.wq});
      out.push_back({p + "attn.bq", lay.bq});
      out.push_back({p + "attn.wk", lay.wk});
      out.push_back({p + "attn.bk", lay.bk});
      out.push_back({p + "attn.wv", lay.wv});
      out.push_back({p + "attn.bv", lay.bv});
      out.push_back({p + "attn.wo", lay.wo});
      out.push_back({p + "attn.bo", lay.bo});
      out.push_back({p + "norm1.gamma", lay.norm1_gamma});
      out.push_back({p + "norm1.beta", lay.norm1_beta});
      out.push_back({p + "ffn.w1", lay.w1});
      out.push_back({p + "ffn.b1", lay.b1});
      out.push_back({p + "ffn.w2", lay.w2});
      out.push_back({p + "ffn.b2", lay.b2});
      out.push_back({p + "norm2.gamma", lay.norm2_gamma});
      out.push_back({p + "norm2.beta", lay.norm2_beta});
    }
    return out;
  }

  std::int64_t param_count() const {
    std::int64_t n = 0;
    for (const auto& p : params()) n += p->value.numel();
    return n;
  }

  void set_trainable(bool trainable) const {
    for (const auto& p : params()) p->requires_grad = trainable;
  }

  template <class Other>
  EncoderModel<Other> cast() const {
    EncoderModel<Other> out;
    out.cfg = cfg;
    auto src = named_params();
    Rng dummy(0);
    out = EncoderModel<Other>::init(cfg, dummy);
    auto dst = out.named_params();
    for (size_t i = 0; i < src.size(); ++i)
      dst[i].node->value = src[i].node->value.template cast<Other>();
    return out;
  }

 private:
  static num::NodePtr<Real> randn_param(std::vector<int> shape, Rng& rng) {
    num::Tensor<Real> t(std::move(shape));
    for (auto& v : t.data) v = Real(rng.truncated_normal(0.02));
    return num::make_param(std::move(t));
  }
  static num::NodePtr<Real> const_param(std::vector<int> shape, Real fill) {
    num::Tensor<Real> t(std::move(shape), fill);
    return num::make_param(std::move(t));
  }
};

/// Sentence embedding per the configured mode.
template <class Real>
num::NodePtr<Real> pool(const num::NodePtr<Real>& embeddings, const num::Tensor<Real>& mask,
                        PoolingMode mode) {
  return mode == PoolingMode::MeanPool ? num::mean_pool(embeddings, mask)
                                       : num::cls_pool(embeddings);
}

/// Linear prediction layer over pooled embeddings; no activation.
template <class Real>
struct ClassifierHead {
  num::NodePtr<Real> weight;  // [H, num_classes]
  num::NodePtr<Real> bias;    // [num_classes]

  static ClassifierHead init(int hidden, int classes, Rng& rng) {
    ClassifierHead h;
    num::Tensor<Real> w({hidden, classes});
    for (auto& v : w.data) v = Real(rng.truncated_normal(0.02));
    h.weight = num::make_param(std::move(w));
    h.bias = num::make_param(num::Tensor<Real>({classes}, Real(0)));
    return h;
  }

  num::NodePtr<Real> logits(const num::NodePtr<Real>& pooled) const {
    return num::affine(pooled, weight, bias);
  }

  std::vector<num::NamedParam<Real>> named_params() const {
    return {{"head.weight", weight}, {"head.bias", bias}};
  }

  void set_trainable(bool trainable) const {
    weight->requires_grad = trainable;
    bias->requires_grad = trainable;
  }
};

/// Trainable affine map from the teacher's width down to a student's.
template <class Real>
struct DownsampleProjection {
  num::NodePtr<Real> weight;  // [d_teacher, d_student]
  num::NodePtr<Real> bias;    // [d_student]

  static DownsampleProjection init(int d_teacher, int d_student, Rng& rng) {
    num::check(d_student < d_teacher, "projection must reduce dimension");
    DownsampleProjection d;
    num::Tensor<Real> w({d_teacher, d_student});
    for (auto& v : w.data) v = Real(rng.truncated_normal(0.02));
    d.weight = num::make_param(std::move(w));
    d.bias = num::make_param(num::Tensor<Real>({d_student}, Real(0)));
    return d;
  }

  num::NodePtr<Real> project(const num::NodePtr<Real>& pooled) const {
    return num::affine(pooled, weight, bias);
  }

  std::vector<num::NamedParam<Real>> named_params() const {
    return {{"proj.weight", weight}, {"proj.bias", bias}};
  }
};

/// Encoder plus head plus the pooling choice: a complete classifier.
template <class Real>
struct Classifier {
  EncoderModel<Real> encoder;
  ClassifierHead<Real> head;
  PoolingMode pooling = PoolingMode::MeanPool;

  static Classifier init(const EncoderConfig& cfg, Rng& rng,
                         PoolingMode mode = PoolingMode::MeanPool) {
    Classifier c;
    c.encoder = EncoderModel<Real>::init(cfg, rng);
    c.head = ClassifierHead<Real>::init(cfg.hidden_size, cfg.num_classes, rng);
    c.pooling = mode;
    return c;
  }

  num::NodePtr<Real> logits(const TokenBatch& batch) const {
    auto emb = encoder.forward(batch);
    auto pooled = pool(emb, batch.template mask_tensor<Real>(), pooling);
    return head.logits(pooled);
  }

  std::vector<num::NodePtr<Real>> params() const {
    auto out = encoder.params();
    out.push_back(head.weight);
    out.push_back(head.bias);
    return out;
  }

  std::vector<num::NamedParam<Real>> named_params() const {
    auto out = encoder.named_params();
    for (auto& p : head.named_params()) out.push_back(p);
    return out;
  }

  void set_trainable(bool trainable) const {
    encoder.set_trainable(trainable);
    head.set_trainable(trainable);
  }
};

/// Deep value snapshot of a parameter list (used to restore best epochs).
template <class Real>
std::vector<num::Tensor<Real>> snapshot(const std::vector<num::NodePtr<Real>>& params) {
  std::vector<num::Tensor<Real>> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p->value);
  return out;
}

template <class Real>
void restore(const std::vector<num::NodePtr<Real>>& params,
             const std::vector<num::Tensor<Real>>& values) {
  num::check(params.size() == values.size(), "snapshot size mismatch");
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace crisiskit
