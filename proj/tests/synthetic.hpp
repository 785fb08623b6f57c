#pragma once

// Synthetic data generators shared by the unit and acceptance suites.

#include <string>
#include <vector>

#include "crisiskit/records.hpp"
#include "crisiskit/rng.hpp"

namespace crisiskit::testdata {

/// Linearly separable 4-class text task: every class owns a disjoint pool
/// of marker words, records mix one or two markers with shared fillers.
inline std::vector<RawRecord> separable_records(int n, std::uint64_t seed) {
  static const std::vector<std::vector<std::string>> markers = {
      {"reqaid", "reqfood", "reqwater", "reqmeds", "reqshelter"},
      {"offaid", "offfood", "offwater", "offmeds", "offshelter"},
      {"bothaid", "bothfood", "bothwater", "bothmeds", "bothshelter"},
      {"miscnews", "miscchat", "miscmood", "miscinfo", "miscsport"},
  };
  static const std::vector<std::string> fillers = {"the", "a",    "in",   "today",
                                                   "city", "near", "area", "please"};
  Rng rng(seed);
  std::vector<RawRecord> out;
  out.reserve(size_t(n));
  for (int i = 0; i < n; ++i) {
    const int cls = i % 4;
    const auto& pool = markers[size_t(cls)];
    std::string text = pool[rng.next_below(pool.size())];
    const int extra = 2 + int(rng.next_below(4));
    for (int w = 0; w < extra; ++w) {
      if (rng.next_double() < 0.34) text += " " + pool[rng.next_below(pool.size())];
      else text += " " + fillers[rng.next_below(fillers.size())];
    }
    RawRecord r;
    r.id = "rec-" + std::to_string(i);
    r.text = text;
    r.label = Label(cls);
    out.push_back(std::move(r));
  }
  return out;
}

/// Unlabelled filler-word corpus for embedding distillation.
inline std::vector<RawRecord> filler_corpus(int n, std::uint64_t seed) {
  static const std::vector<std::string> words = {
      "storm",  "flood",  "water", "help",   "food",    "shelter", "road",  "power",
      "rescue", "update", "city",  "people", "tonight", "support", "medic", "supply",
      "bridge", "north",  "south", "camp",   "family",  "urgent",  "safe",  "warning"};
  Rng rng(seed);
  std::vector<RawRecord> out;
  out.reserve(size_t(n));
  for (int i = 0; i < n; ++i) {
    const int len = 4 + int(rng.next_below(8));
    std::string text = words[rng.next_below(words.size())];
    for (int w = 1; w < len; ++w) text += " " + words[rng.next_below(words.size())];
    RawRecord r;
    r.id = "c-" + std::to_string(i);
    r.text = text;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace crisiskit::testdata
