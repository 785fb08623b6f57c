#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "crisiskit/common.hpp"
#include "crisiskit/csv.hpp"
#include "crisiskit/records.hpp"
#include "crisiskit/rng.hpp"
#include "crisiskit/stats.hpp"

namespace crisiskit {

/// Per-record labels from M annotators. A cell that failed to parse stays
/// nullopt and counts as disagreement for its row.
struct AnnotationMatrix {
  std::vector<std::string> annotator_names;
  std::vector<std::string> ids;
  std::vector<std::vector<std::optional<Label>>> cells;  // [row][annotator]

  size_t annotators() const { return annotator_names.size(); }
  size_t rows() const { return ids.size(); }

  /// CSV with header `id,annotator_1,...,annotator_M`.
  static AnnotationMatrix from_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    if (t.header.size() < 3 || t.header[0] != "id")
      throw std::runtime_error(path + ": expected header id,annotator_1,...,annotator_M");
    AnnotationMatrix m;
    m.annotator_names.assign(t.header.begin() + 1, t.header.end());
    for (const auto& row : t.rows) {
      m.ids.push_back(row[0]);
      std::vector<std::optional<Label>> labels;
      for (size_t c = 1; c < row.size(); ++c) labels.push_back(parse_label(row[c]));
      m.cells.push_back(std::move(labels));
    }
    return m;
  }
};

struct LabelledId {
  std::string id;
  Label label;
};

struct AgreementResult {
  std::vector<LabelledId> agreed;              // input order preserved
  std::int64_t dropped = 0;
  std::map<Label, std::int64_t> class_counts;  // over the agreed set
};

/// Keeps exactly the rows where every annotator assigned the same label.
inline AgreementResult agreement_filter(const AnnotationMatrix& m) {
  num::check(m.annotators() >= 2, "agreement filter needs at least two annotators");
  AgreementResult out;
  for (size_t r = 0; r < m.rows(); ++r) {
    const auto& row = m.cells[r];
    bool agree = row[0].has_value();
    for (size_t a = 1; agree && a < row.size(); ++a)
      agree = row[a].has_value() && *row[a] == *row[0];
    if (agree) {
      out.agreed.push_back({m.ids[r], *row[0]});
      out.class_counts[*row[0]] += 1;
    } else {
      ++out.dropped;
    }
  }
  return out;
}

/// Cochran's sample size with p = 0.5 and finite-population correction,
/// rounded up and capped at the population.
inline std::int64_t sample_size(std::int64_t population, double margin, double confidence) {
  num::check(population >= 1, "population must be >= 1");
  num::check(margin > 0 && margin < 1, "margin of error must be in (0,1)");
  num::check(confidence > 0 && confidence < 1, "confidence must be in (0,1)");
  const double z = probit(1.0 - (1.0 - confidence) / 2.0);
  const double n0 = z * z * 0.25 / (margin * margin);
  const double corrected = n0 / (1.0 + (n0 - 1.0) / double(population));
  const auto n = std::int64_t(std::ceil(corrected - 1e-9));
  return std::max<std::int64_t>(1, std::min(n, population));
}

struct SamplePlan {
  std::int64_t population = 0;
  double margin = 0.03;
  double confidence = 0.95;
  std::int64_t n = 0;
  std::vector<Label> forced_classes;  // classes included whole
};

/// Builds the validation-sampling plan: n from Cochran + FPC, and every
/// class whose proportional share lands below 5 marked for full inclusion.
inline SamplePlan make_sample_plan(const std::vector<LabelledId>& records, double margin,
                                   double confidence) {
  num::check(!records.empty(), "cannot plan a sample from no records");
  SamplePlan plan;
  plan.population = std::int64_t(records.size());
  plan.margin = margin;
  plan.confidence = confidence;
  plan.n = sample_size(plan.population, margin, confidence);
  std::map<Label, std::int64_t> counts;
  for (const auto& r : records) counts[r.label] += 1;
  auto alloc = largest_remainder_allocation(counts, plan.n);
  for (const auto& [label, a] : alloc)
    if (a < 5) plan.forced_classes.push_back(label);
  return plan;
}

/// Proportional stratified sample of size plan.n, unioned with every member
/// of the forced-inclusion classes. Deterministic for a given seed.
inline std::vector<LabelledId> stratified_validation_sample(
    const std::vector<LabelledId>& records, const SamplePlan& plan, std::uint64_t seed) {
  num::check(plan.n <= std::int64_t(records.size()), "sample size exceeds population");
  std::map<Label, std::vector<size_t>> by_class;
  for (size_t i = 0; i < records.size(); ++i) by_class[records[i].label].push_back(i);

  std::map<Label, std::int64_t> counts;
  for (const auto& [label, members] : by_class) counts[label] = std::int64_t(members.size());
  auto alloc = largest_remainder_allocation(counts, plan.n);

  auto is_forced = [&plan](Label l) {
    return std::find(plan.forced_classes.begin(), plan.forced_classes.end(), l) !=
           plan.forced_classes.end();
  };

  std::vector<size_t> chosen;
  Rng rng = named_stream(seed, "validation-sample");
  for (auto& [label, members] : by_class) {
    if (is_forced(label)) {
      chosen.insert(chosen.end(), members.begin(), members.end());
      continue;
    }
    rng.shuffle(members.begin(), members.end());
    const auto take = size_t(std::min<std::int64_t>(alloc[label], std::int64_t(members.size())));
    chosen.insert(chosen.end(), members.begin(), members.begin() + take);
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<LabelledId> out;
  out.reserve(chosen.size());
  for (size_t i : chosen) out.push_back(records[i]);
  return out;
}

struct KappaReport {
  double kappa = 0;
  double p_observed = 0;
  double p_expected = 0;
  std::vector<Label> classes;
  std::vector<std::vector<std::int64_t>> confusion;  // [a-class][b-class]
};

inline KappaReport cohens_kappa(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  num::check(!a.empty(), "kappa needs at least one pair");

  std::vector<Label> classes;
  auto note = [&classes](Label l) {
    if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
  };
  for (size_t i = 0; i < a.size(); ++i) {
    note(a[i]);
    note(b[i]);
  }
  std::sort(classes.begin(), classes.end());
  auto index = [&classes](Label l) {
    return size_t(std::find(classes.begin(), classes.end(), l) - classes.begin());
  };

  KappaReport rep;
  rep.classes = classes;
  rep.confusion.assign(classes.size(), std::vector<std::int64_t>(classes.size(), 0));
  for (size_t i = 0; i < a.size(); ++i) rep.confusion[index(a[i])][index(b[i])] += 1;

  const double n = double(a.size());
  double trace = 0, pe = 0;
  for (size_t i = 0; i < classes.size(); ++i) {
    trace += double(rep.confusion[i][i]);
    double row = 0, col = 0;
    for (size_t j = 0; j < classes.size(); ++j) {
      row += double(rep.confusion[i][j]);
      col += double(rep.confusion[j][i]);
    }
    pe += (row / n) * (col / n);
  }
  rep.p_observed = trace / n;
  rep.p_expected = pe;
  if (std::abs(1.0 - pe) < 1e-12) {
    // both raters constant on one class: complete degenerate agreement
    rep.kappa = 1.0;
  } else {
    rep.kappa = (rep.p_observed - pe) / (1.0 - pe);
  }
  return rep;
}

/// Landis-Koch style interpretation; >= 0.81 reads "almost perfect".
inline const char* kappa_band(double kappa) {
  if (kappa < 0) return "poor";
  if (kappa <= 0.20) return "slight";
  if (kappa <= 0.40) return "fair";
  if (kappa <= 0.60) return "moderate";
  if (kappa <= 0.80) return "substantial";
  return "almost perfect";
}

struct HumanValidation {
  std::string annotator;
  KappaReport report;
  std::string band;
};

/// One kappa per human annotator against the machine labels. Every human
/// set must cover exactly the sampled ids.
inline std::vector<HumanValidation> validation_report(
    const std::vector<LabelledId>& machine,
    const std::vector<std::pair<std::string, std::vector<LabelledId>>>& humans) {
  std::map<std::string, Label> machine_by_id;
  for (const auto& r : machine) machine_by_id[r.id] = r.label;

  std::vector<HumanValidation> out;
  for (const auto& [annotator, labels] : humans) {
    if (labels.size() != machine.size())
      throw std::runtime_error("id misalignment: " + annotator + " labelled " +
                               std::to_string(labels.size()) + " of " +
                               std::to_string(machine.size()) + " records");
    std::vector<Label> a, b;
    a.reserve(labels.size());
    b.reserve(labels.size());
    for (const auto& h : labels) {
      auto it = machine_by_id.find(h.id);
      if (it == machine_by_id.end())
        throw std::runtime_error("id misalignment: unknown id " + h.id + " from " + annotator);
      a.push_back(it->second);
      b.push_back(h.label);
    }
    HumanValidation v;
    v.annotator = annotator;
    v.report = cohens_kappa(a, b);
    v.band = kappa_band(v.report.kappa);
    out.push_back(std::move(v));
  }
  return out;
}

inline nlohmann::json to_json(const KappaReport& r) {
  nlohmann::json classes = nlohmann::json::array();
  for (Label l : r.classes) classes.push_back(to_string(l));
  return {{"kappa", r.kappa},
          {"p_observed", r.p_observed},
          {"p_expected", r.p_expected},
          {"classes", classes},
          {"confusion", r.confusion}};
}

}  // namespace crisiskit
