#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "crisiskit/adam.hpp"
#include "crisiskit/bpe_tokenizer.hpp"
#include "crisiskit/encoder.hpp"
#include "crisiskit/metrics.hpp"
#include "crisiskit/records.hpp"
#include "crisiskit/rng.hpp"
#include "crisiskit/stats.hpp"
#include "crisiskit/text_normalizer.hpp"

namespace crisiskit {

// ------------------------------------------------------------- splits ----

struct SplitSpec {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
  std::uint64_t seed = 42;

  void validate() const {
    num::check(train > 0 && val > 0 && test > 0, "split fractions must be positive");
    num::check(std::abs(train + val + test - 1.0) < 1e-9, "split fractions must sum to 1");
  }
};

struct Splits {
  std::vector<size_t> train, val, test;
};

/// Two-stage stratified split: train vs holdout first, then the holdout
/// into val and test, both stages by largest-remainder allocation per class
/// with a seeded shuffle. Every class needs at least 3 members and at
/// least one member stays in train.
inline Splits split_stratified(std::span<const int> labels, const SplitSpec& spec) {
  spec.validate();
  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  if (by_class.size() < 2)
    throw std::invalid_argument("cannot stratify: need at least two classes");
  for (const auto& [c, members] : by_class)
    if (members.size() < 3) throw std::invalid_argument("class too small to stratify");

  const auto n = std::int64_t(labels.size());
  std::map<int, std::int64_t> counts, train_caps;
  for (const auto& [c, members] : by_class) {
    counts[c] = std::int64_t(members.size());
    train_caps[c] = std::int64_t(members.size()) - 1;  // keep >= 1 in train
  }

  const auto hold_total = std::int64_t(std::llround(double(n) * (spec.val + spec.test)));
  auto hold_alloc = largest_remainder_allocation(counts, hold_total, train_caps);

  Rng rng = named_stream(spec.seed, "stratified-split");
  std::map<int, std::vector<size_t>> holdouts;
  Splits out;
  for (auto& [c, members] : by_class) {
    rng.shuffle(members.begin(), members.end());
    const auto h = size_t(hold_alloc[c]);
    holdouts[c].assign(members.end() - std::ptrdiff_t(h), members.end());
    out.train.insert(out.train.end(), members.begin(), members.end() - std::ptrdiff_t(h));
  }

  std::map<int, std::int64_t> hold_counts;
  std::int64_t held = 0;
  for (const auto& [c, members] : holdouts) {
    hold_counts[c] = std::int64_t(members.size());
    held += std::int64_t(members.size());
  }
  const auto val_total =
      std::int64_t(std::llround(double(held) * spec.val / (spec.val + spec.test)));
  auto val_alloc = largest_remainder_allocation(hold_counts, val_total);
  for (auto& [c, members] : holdouts) {
    const auto v = size_t(val_alloc[c]);
    out.val.insert(out.val.end(), members.begin(), members.begin() + std::ptrdiff_t(v));
    out.test.insert(out.test.end(), members.begin() + std::ptrdiff_t(v), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

// ----------------------------------------------------------- datasets ----

/// Tokenized text with integer labels (-1 when unlabelled).
struct TextDataset {
  std::vector<std::string> ids;
  std::vector<TokenSequence> sequences;
  std::vector<int> labels;

  size_t size() const { return sequences.size(); }
};

inline TextDataset encode_dataset(const BpeTokenizer& tok, std::span<const RawRecord> records,
                                  int max_length, bool require_labels) {
  TextDataset ds;
  ds.ids.reserve(records.size());
  ds.sequences.reserve(records.size());
  ds.labels.reserve(records.size());
  for (const auto& r : records) {
    if (require_labels && !r.label)
      throw std::runtime_error("record " + r.id + " is missing a label");
    ds.ids.push_back(r.id);
    ds.sequences.push_back(tok.encode(normalize_text(r.text), max_length));
    ds.labels.push_back(r.label ? int(*r.label) : -1);
  }
  return ds;
}

template <class Real>
TokenBatch gather_batch(const TextDataset& ds, std::span<const size_t> idx) {
  std::vector<TokenSequence> seqs;
  seqs.reserve(idx.size());
  for (size_t i : idx) seqs.push_back(ds.sequences[i]);
  return TokenBatch::from(seqs);
}

// ------------------------------------------------------ early stopping ----

/// Stops after `patience` consecutive epochs without improvement strictly
/// greater than `min_improvement`.
class EarlyStopper {
 public:
  EarlyStopper(int patience, double min_improvement)
      : patience_(patience), min_improvement_(min_improvement) {}

  /// Feed one epoch's validation metric; true means stop now.
  bool observe(double metric) {
    ++epoch_;
    if (metric > best_ + min_improvement_ || epoch_ == 1) {
      best_ = metric;
      best_epoch_ = epoch_;
      streak_ = 0;
      improved_ = true;
    } else {
      ++streak_;
      improved_ = false;
    }
    return streak_ >= patience_;
  }

  bool improved_last() const { return improved_; }
  int best_epoch() const { return best_epoch_; }
  double best() const { return best_; }
  int epochs_seen() const { return epoch_; }

 private:
  int patience_;
  double min_improvement_;
  double best_ = -std::numeric_limits<double>::infinity();
  int best_epoch_ = 0;
  int epoch_ = 0;
  int streak_ = 0;
  bool improved_ = false;
};

// ---------------------------------------------------------- fine-tune ----

struct FinetuneConfig {
  int max_epochs = 30;
  double learning_rate = 1e-5;
  int batch_size = 32;
  int patience = 5;
  double min_improvement = 1e-4;
  int repeats = 3;
  std::uint64_t seed = 42;

  void validate() const {
    num::check(max_epochs >= 1 && batch_size >= 1 && repeats >= 1,
               "finetune config fields must be positive");
    num::check(patience < max_epochs, "patience must be below max epochs");
  }
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0;
  double val_f1 = 0;
};

struct FinetuneRunResult {
  double best_val_f1 = 0;
  int best_epoch = 0;
  int epochs_run = 0;
  std::vector<EpochLog> log;
};

template <class Real>
std::vector<int> predict(const Classifier<Real>& clf, const TextDataset& ds,
                         std::span<const size_t> idx, int batch_size) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (size_t start = 0; start < idx.size(); start += size_t(batch_size)) {
    const size_t end = std::min(idx.size(), start + size_t(batch_size));
    auto batch = gather_batch<Real>(ds, idx.subspan(start, end - start));
    auto logits = clf.logits(batch);
    const int c = logits->value.shape[1];
    for (int i = 0; i < logits->value.shape[0]; ++i) {
      int arg = 0;
      for (int j = 1; j < c; ++j)
        if (logits->value.at(i, j) > logits->value.at(i, arg)) arg = j;
      out.push_back(arg);
    }
  }
  return out;
}

template <class Real>
double evaluate_macro_f1(const Classifier<Real>& clf, const TextDataset& ds,
                         std::span<const size_t> idx, int batch_size) {
  auto preds = predict(clf, ds, idx, batch_size);
  std::vector<int> gold;
  gold.reserve(idx.size());
  for (size_t i : idx) gold.push_back(ds.labels[i]);
  return macro_f1(preds, gold);
}

/// One fine-tuning run: weighted cross-entropy over mean-pooled sentence
/// embeddings, validation macro F1 after each epoch, early stopping, and
/// restoration of the best epoch's parameters.
template <class Real>
FinetuneRunResult finetune_run(Classifier<Real>& clf, const TextDataset& ds,
                               const Splits& splits, const FinetuneConfig& cfg,
                               std::uint64_t run_seed) {
  cfg.validate();
  num::check(!splits.train.empty() && !splits.val.empty(), "empty train or val split");
  clf.set_trainable(true);

  std::vector<int> train_labels;
  for (size_t i : splits.train) train_labels.push_back(ds.labels[i]);
  const auto weights_by_class = class_weights(train_labels);

  num::Adam<Real> opt(clf.params(), {.lr = cfg.learning_rate});
  Rng order_rng = named_stream(run_seed, "batch-order");
  EarlyStopper stopper(cfg.patience, cfg.min_improvement);

  FinetuneRunResult result;
  std::vector<num::Tensor<Real>> best_params = snapshot(clf.params());
  std::vector<size_t> order = splits.train;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    order_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0;
    std::int64_t batches = 0;
    for (size_t start = 0; start < order.size(); start += size_t(cfg.batch_size)) {
      const size_t end = std::min(order.size(), start + size_t(cfg.batch_size));
      std::span<const size_t> idx(order.data() + start, end - start);
      auto batch = gather_batch<Real>(ds, idx);
      std::vector<int> labels;
      std::vector<double> weights;
      for (size_t i : idx) {
        labels.push_back(ds.labels[i]);
        weights.push_back(weights_by_class.at(ds.labels[i]));
      }
      opt.zero_grad();
      auto loss = num::cross_entropy_loss(clf.logits(batch), labels, weights);
      if (!std::isfinite(double(loss->value.data[0])))
        throw std::runtime_error("diverged");
      num::backward(loss);
      opt.step();
      loss_sum += double(loss->value.data[0]);
      ++batches;
    }

    const double val_f1 = evaluate_macro_f1(clf, ds, splits.val, cfg.batch_size);
    result.log.push_back({epoch, loss_sum / double(batches), val_f1});
    result.epochs_run = epoch;
    const bool stop = stopper.observe(val_f1);
    if (stopper.improved_last()) best_params = snapshot(clf.params());
    if (stop) break;
  }
  restore(clf.params(), best_params);
  result.best_val_f1 = stopper.best();
  result.best_epoch = stopper.best_epoch();
  return result;
}

// ------------------------------------------------- repeats with a CI ----

struct MetricsReport {
  double mean_f1 = 0;
  double ci_half_width = 0;    // t-based 95% CI half-width
  double ci_relative_pct = 0;  // half-width as a percentage of the mean
  bool ci_defined = false;
  std::vector<double> per_run_f1;
  std::map<int, ClassMetrics> per_class;  // averaged over runs
  int repeats = 0;
};

/// Repeats fine-tuning with fresh model/batch seeds on fixed splits and
/// reports mean test macro F1 with a Student-t confidence interval.
template <class Real>
MetricsReport repeat_with_ci(
    const std::function<Classifier<Real>(std::uint64_t)>& make_classifier,
    const TextDataset& ds, const Splits& splits, const FinetuneConfig& cfg) {
  cfg.validate();
  MetricsReport report;
  report.repeats = cfg.repeats;

  std::vector<int> gold;
  for (size_t i : splits.test) gold.push_back(ds.labels[i]);

  for (int r = 0; r < cfg.repeats; ++r) {
    const std::uint64_t run_seed = splitmix64(cfg.seed + std::uint64_t(r));
    Classifier<Real> clf = make_classifier(run_seed);
    finetune_run(clf, ds, splits, cfg, run_seed);
    auto preds = predict(clf, ds, splits.test, cfg.batch_size);
    report.per_run_f1.push_back(macro_f1(preds, gold));
    auto pc = per_class_metrics(preds, gold);
    for (const auto& [c, m] : pc) {
      auto& acc = report.per_class[c];
      acc.precision += m.precision / cfg.repeats;
      acc.recall += m.recall / cfg.repeats;
      acc.f1 += m.f1 / cfg.repeats;
      acc.support = m.support;
    }
  }

  report.mean_f1 = mean(report.per_run_f1);
  report.ci_half_width = ci95_half_width(report.per_run_f1);
  report.ci_defined = cfg.repeats >= 2;
  report.ci_relative_pct =
      report.mean_f1 > 0 ? 100.0 * report.ci_half_width / report.mean_f1 : 0.0;
  return report;
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [c, m] : r.per_class)
    per_class[to_string(Label(c))] = {{"precision", m.precision},
                                      {"recall", m.recall},
                                      {"f1", m.f1},
                                      {"support", m.support}};
  return {{"mean_macro_f1", r.mean_f1},
          {"ci95_half_width", r.ci_half_width},
          {"ci95_relative_pct", r.ci_relative_pct},
          {"ci_defined", r.ci_defined},
          {"per_run_macro_f1", r.per_run_f1},
          {"repeats", r.repeats},
          {"per_class", per_class}};
}

/// One-line TSV row: model, task, mean F1, +/-CI.
inline std::string tsv_row(const std::string& model, const std::string& task,
                           const MetricsReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s\t%s\t%.4f\t±%.4f (±%.2f%%)", model.c_str(),
                task.c_str(), r.mean_f1, r.ci_half_width, r.ci_relative_pct);
  return buf;
}

}  // namespace crisiskit
