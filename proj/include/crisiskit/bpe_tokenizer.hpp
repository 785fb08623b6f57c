#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crisiskit/text_normalizer.hpp"

namespace crisiskit {

/// CLS-prefixed, PAD-padded id sequence with its attention mask.
struct TokenSequence {
  std::vector<int> ids;
  std::vector<int> attention_mask;
};

namespace bpedetail {

/// GPT-2 style byte <-> printable-codepoint bijection, used only for the
/// on-disk vocab/merges files so arbitrary bytes serialize as text.
inline const std::array<std::uint32_t, 256>& byte_to_unicode() {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    std::uint32_t next = 256;
    for (int b = 0; b < 256; ++b) {
      const bool printable =
          (b >= 33 && b <= 126) || (b >= 161 && b <= 172) || (b >= 174 && b <= 255);
      t[b] = printable ? std::uint32_t(b) : next++;
    }
    return t;
  }();
  return table;
}

inline const std::unordered_map<std::uint32_t, unsigned char>& unicode_to_byte() {
  static const std::unordered_map<std::uint32_t, unsigned char> table = [] {
    std::unordered_map<std::uint32_t, unsigned char> t;
    const auto& fwd = byte_to_unicode();
    for (int b = 0; b < 256; ++b) t[fwd[b]] = static_cast<unsigned char>(b);
    return t;
  }();
  return table;
}

inline std::string bytes_to_repr(std::string_view bytes) {
  std::string out;
  for (unsigned char b : bytes) normdetail::append_utf8(out, byte_to_unicode()[b]);
  return out;
}

inline std::string repr_to_bytes(std::string_view repr) {
  std::string out;
  size_t i = 0;
  while (i < repr.size()) {
    const std::uint32_t cp = normdetail::next_codepoint(repr, i);
    auto it = unicode_to_byte().find(cp);
    if (it == unicode_to_byte().end())
      throw std::runtime_error("bad token representation in tokenizer file");
    out.push_back(char(it->second));
  }
  return out;
}

struct Chunk {
  int special_id = -1;  // >= 0 for atomic special tokens
  std::string bytes;    // raw bytes otherwise (may carry a leading space)
};

}  // namespace bpedetail

/// Byte-level pair-merge subword tokenizer. Special tokens are atomic: they
/// are cut out before merge learning and always encode to a single id.
class BpeTokenizer {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;
  static constexpr int kClsId = 2;
  static constexpr int kSepId = 3;
  static constexpr int kMaskId = 4;
  static constexpr int kUrlId = 5;
  static constexpr int kUserId = 6;
  static constexpr int kNumSpecials = 7;
  static constexpr int kNumByteTokens = 256;
  static constexpr int kBaseVocab = kNumSpecials + kNumByteTokens;

  static const char* special_name(int id) {
    static const char* names[kNumSpecials] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]",
                                              "[MASK]", "HTTPURL", "@USER"};
    return names[id];
  }

  /// Learns merges from normalized text. `vocab_size` caps the vocabulary;
  /// learning stops early once no adjacent pair occurs twice.
  static BpeTokenizer train(std::span<const CleanText> corpus, int vocab_size) {
    if (corpus.empty()) throw std::runtime_error("empty corpus");
    if (vocab_size <= kBaseVocab)
      throw std::invalid_argument("vocab_size must exceed " + std::to_string(kBaseVocab));

    BpeTokenizer tok;

    // unique word chunks with counts; specials are excluded from learning
    std::map<std::string, std::int64_t> chunk_counts;
    bool any_text = false;
    for (const auto& doc : corpus) {
      if (!doc.text.empty()) any_text = true;
      for (const auto& ch : tok.chunk_text(doc.text))
        if (ch.special_id < 0) chunk_counts[ch.bytes] += 1;
    }
    if (!any_text) throw std::runtime_error("empty corpus");

    struct Entry {
      std::vector<int> symbols;
      std::int64_t count;
    };
    std::vector<Entry> entries;
    entries.reserve(chunk_counts.size());
    for (const auto& [bytes, count] : chunk_counts) {
      Entry e;
      e.count = count;
      for (unsigned char b : bytes) e.symbols.push_back(kNumSpecials + b);
      entries.push_back(std::move(e));
    }

    while (int(tok.token_bytes_.size()) < vocab_size) {
      std::map<std::pair<int, int>, std::int64_t> pair_counts;
      for (const auto& e : entries)
        for (size_t i = 0; i + 1 < e.symbols.size(); ++i)
          pair_counts[{e.symbols[i], e.symbols[i + 1]}] += e.count;

      std::pair<int, int> best{-1, -1};
      std::int64_t best_count = 0;
      for (const auto& [pair, count] : pair_counts) {
        if (count > best_count) {  // ties fall to the smallest id pair (map order)
          best_count = count;
          best = pair;
        }
      }
      if (best_count < 2) break;

      const int new_id = int(tok.token_bytes_.size());
      tok.token_bytes_.push_back(tok.token_bytes_[best.first] +
                                 tok.token_bytes_[best.second]);
      tok.merges_.push_back(best);
      tok.merge_lookup_[key(best)] = {int(tok.merges_.size()) - 1, new_id};

      for (auto& e : entries) {
        auto& sym = e.symbols;
        size_t w = 0;
        for (size_t r = 0; r < sym.size();) {
          if (r + 1 < sym.size() && sym[r] == best.first && sym[r + 1] == best.second) {
            sym[w++] = new_id;
            r += 2;
          } else {
            sym[w++] = sym[r++];
          }
        }
        sym.resize(w);
      }
    }
    return tok;
  }

  static BpeTokenizer train(const std::vector<CleanText>& corpus, int vocab_size) {
    return train(std::span<const CleanText>(corpus.data(), corpus.size()), vocab_size);
  }

  int vocab_size() const { return int(token_bytes_.size()); }

  /// Subword ids for a piece of text, no CLS/padding.
  std::vector<int> encode_ids(std::string_view text) const {
    std::vector<int> out;
    for (const auto& ch : chunk_text(text)) {
      if (ch.special_id >= 0) {
        out.push_back(ch.special_id);
        continue;
      }
      std::vector<int> sym;
      sym.reserve(ch.bytes.size());
      for (unsigned char b : ch.bytes) sym.push_back(kNumSpecials + b);
      merge_chunk(sym);
      out.insert(out.end(), sym.begin(), sym.end());
    }
    return out;
  }

  TokenSequence encode(const CleanText& text, int max_length) const {
    if (max_length < 1) throw std::invalid_argument("max_length must be positive");
    TokenSequence seq;
    seq.ids.reserve(max_length);
    seq.ids.push_back(kClsId);
    std::vector<int> body = encode_ids(text.text);
    for (int id : body) {
      if (int(seq.ids.size()) >= max_length) break;
      seq.ids.push_back(id);
    }
    seq.attention_mask.assign(seq.ids.size(), 1);
    while (int(seq.ids.size()) < max_length) {
      seq.ids.push_back(kPadId);
      seq.attention_mask.push_back(0);
    }
    return seq;
  }

  /// Inverse of encode_ids on byte tokens; control specials decode to "".
  std::string decode(std::span<const int> ids) const {
    std::string out;
    for (int id : ids) {
      if (id == kUrlId) out += kUrlToken;
      else if (id == kUserId) out += kUserToken;
      else if (id >= kNumSpecials && id < int(token_bytes_.size())) out += token_bytes_[id];
    }
    return out;
  }

  void save(const std::string& vocab_path, const std::string& merges_path) const {
    std::ofstream vf(vocab_path);
    if (!vf) throw std::runtime_error("cannot write " + vocab_path);
    for (int id = 0; id < int(token_bytes_.size()); ++id) {
      if (id < kNumSpecials) vf << special_name(id);
      else vf << bpedetail::bytes_to_repr(token_bytes_[id]);
      vf << '\t' << id << '\n';
    }
    std::ofstream mf(merges_path);
    if (!mf) throw std::runtime_error("cannot write " + merges_path);
    for (const auto& [left, right] : merges_)
      mf << bpedetail::bytes_to_repr(token_bytes_[left]) << ' '
         << bpedetail::bytes_to_repr(token_bytes_[right]) << '\n';
  }

  static BpeTokenizer load(const std::string& vocab_path, const std::string& merges_path) {
    BpeTokenizer tok;
    tok.token_bytes_.clear();
    std::ifstream vf(vocab_path);
    if (!vf) throw std::runtime_error("cannot open " + vocab_path);
    std::string line;
    std::vector<std::pair<std::string, int>> rows;
    while (std::getline(vf, line)) {
      if (line.empty()) continue;
      auto tab = line.rfind('\t');
      if (tab == std::string::npos) throw std::runtime_error("bad vocab line: " + line);
      rows.emplace_back(line.substr(0, tab), std::stoi(line.substr(tab + 1)));
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    for (const auto& [repr, id] : rows) {
      if (id != int(tok.token_bytes_.size()))
        throw std::runtime_error("vocab ids are not contiguous");
      if (id < kNumSpecials) {
        if (repr != special_name(id))
          throw std::runtime_error("unexpected special token " + repr);
        tok.token_bytes_.push_back("");
      } else {
        tok.token_bytes_.push_back(bpedetail::repr_to_bytes(repr));
      }
    }
    if (int(tok.token_bytes_.size()) < kBaseVocab)
      throw std::runtime_error("vocab file is missing base byte tokens");

    std::unordered_map<std::string, int> by_bytes;
    for (int id = kNumSpecials; id < int(tok.token_bytes_.size()); ++id)
      by_bytes.emplace(tok.token_bytes_[id], id);

    std::ifstream mf(merges_path);
    if (!mf) throw std::runtime_error("cannot open " + merges_path);
    while (std::getline(mf, line)) {
      if (line.empty()) continue;
      auto sp = line.find(' ');
      if (sp == std::string::npos) throw std::runtime_error("bad merges line: " + line);
      const std::string lb = bpedetail::repr_to_bytes(line.substr(0, sp));
      const std::string rb = bpedetail::repr_to_bytes(line.substr(sp + 1));
      auto li = by_bytes.find(lb), ri = by_bytes.find(rb), mi = by_bytes.find(lb + rb);
      if (li == by_bytes.end() || ri == by_bytes.end() || mi == by_bytes.end())
        throw std::runtime_error("merge references unknown token: " + line);
      tok.merges_.push_back({li->second, ri->second});
      tok.merge_lookup_[key({li->second, ri->second})] = {int(tok.merges_.size()) - 1,
                                                          mi->second};
    }
    return tok;
  }

  /// Splits text into atomic special-token chunks and space-prefixed word
  /// chunks; concatenating chunk bytes reproduces the input exactly.
  std::vector<bpedetail::Chunk> chunk_text(std::string_view text) const {
    std::vector<bpedetail::Chunk> chunks;
    size_t i = 0;
    auto flush_segment = [&chunks](std::string_view seg) {
      size_t p = 0;
      while (p < seg.size()) {
        bpedetail::Chunk c;
        if (seg[p] == ' ') {
          c.bytes.push_back(' ');
          ++p;
          if (p < seg.size() && seg[p] == ' ') {  // lone space before more spaces
            chunks.push_back(std::move(c));
            continue;
          }
        }
        while (p < seg.size() && seg[p] != ' ') c.bytes.push_back(seg[p++]);
        chunks.push_back(std::move(c));
      }
    };
    size_t seg_start = 0;
    while (i < text.size()) {
      int special = -1;
      size_t len = 0;
      if (text.compare(i, kUrlToken.size(), kUrlToken) == 0) {
        special = kUrlId;
        len = kUrlToken.size();
      } else if (text.compare(i, kUserToken.size(), kUserToken) == 0) {
        special = kUserId;
        len = kUserToken.size();
      }
      if (special >= 0) {
        if (i > seg_start) flush_segment(text.substr(seg_start, i - seg_start));
        bpedetail::Chunk c;
        c.special_id = special;
        c.bytes = std::string(text.substr(i, len));
        chunks.push_back(std::move(c));
        i += len;
        seg_start = i;
      } else {
        ++i;
      }
    }
    if (i > seg_start) flush_segment(text.substr(seg_start, i - seg_start));
    return chunks;
  }

 private:
  BpeTokenizer() {
    token_bytes_.reserve(kBaseVocab);
    for (int s = 0; s < kNumSpecials; ++s) token_bytes_.push_back("");
    for (int b = 0; b < 256; ++b) token_bytes_.push_back(std::string(1, char(b)));
  }

  static std::uint64_t key(std::pair<int, int> p) {
    return (std::uint64_t(std::uint32_t(p.first)) << 32) | std::uint32_t(p.second);
  }

  void merge_chunk(std::vector<int>& sym) const {
    while (sym.size() >= 2) {
      int best_rank = INT32_MAX, best_pos = -1, best_new = -1;
      for (size_t i = 0; i + 1 < sym.size(); ++i) {
        auto it = merge_lookup_.find(key({sym[i], sym[i + 1]}));
        if (it != merge_lookup_.end() && it->second.first < best_rank) {
          best_rank = it->second.first;
          best_pos = int(i);
          best_new = it->second.second;
        }
      }
      if (best_pos < 0) break;
      const int left = sym[best_pos], right = sym[best_pos + 1];
      size_t w = 0;
      for (size_t r = 0; r < sym.size();) {
        if (r + 1 < sym.size() && sym[r] == left && sym[r + 1] == right) {
          sym[w++] = best_new;
          r += 2;
        } else {
          sym[w++] = sym[r++];
        }
      }
      sym.resize(w);
    }
  }

  std::vector<std::string> token_bytes_;
  std::vector<std::pair<int, int>> merges_;
  std::unordered_map<std::uint64_t, std::pair<int, int>> merge_lookup_;  // pair -> (rank, id)
};

}  // namespace crisiskit
