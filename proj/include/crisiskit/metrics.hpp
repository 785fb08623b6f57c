#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace crisiskit {

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::int64_t support = 0;
};

/// Per-class precision/recall/F1 over integer class ids. The class set is
/// `classes` when given, otherwise the classes observed in gold. A class
/// with no predicted and no actual positives scores F1 = 0 by convention.
inline std::map<int, ClassMetrics> per_class_metrics(std::span<const int> predictions,
                                                     std::span<const int> gold,
                                                     std::vector<int> classes = {}) {
  if (predictions.size() != gold.size()) throw std::invalid_argument("length mismatch");
  if (classes.empty()) {
    for (int g : gold)
      if (std::find(classes.begin(), classes.end(), g) == classes.end()) classes.push_back(g);
    std::sort(classes.begin(), classes.end());
  }
  std::map<int, ClassMetrics> out;
  for (int c : classes) {
    std::int64_t tp = 0, fp = 0, fn = 0, support = 0;
    for (size_t i = 0; i < gold.size(); ++i) {
      const bool p = predictions[i] == c, g = gold[i] == c;
      if (g) ++support;
      if (p && g) ++tp;
      else if (p && !g) ++fp;
      else if (!p && g) ++fn;
    }
    ClassMetrics m;
    m.support = support;
    m.precision = (tp + fp) > 0 ? double(tp) / double(tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? double(tp) / double(tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    out[c] = m;
  }
  return out;
}

/// Unweighted mean of per-class F1.
inline double macro_f1(std::span<const int> predictions, std::span<const int> gold,
                       std::vector<int> classes = {}) {
  auto per_class = per_class_metrics(predictions, gold, std::move(classes));
  if (per_class.empty()) throw std::invalid_argument("no classes to score");
  double sum = 0;
  for (const auto& [c, m] : per_class) sum += m.f1;
  return sum / double(per_class.size());
}

/// w_c = N / (K * n_c) over the classes present; balanced data gets all 1s.
inline std::map<int, double> class_weights(std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("class_weights needs labels");
  std::map<int, std::int64_t> counts;
  for (int l : labels) counts[l] += 1;
  const double n = double(labels.size());
  const double k = double(counts.size());
  std::map<int, double> out;
  for (const auto& [c, count] : counts) out[c] = n / (k * double(count));
  return out;
}

}  // namespace crisiskit
