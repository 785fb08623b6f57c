#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crisiskit/csv.hpp"
#include "crisiskit/finetune.hpp"
#include "crisiskit/records.hpp"

namespace crisiskit {

enum class GroupBy { Country, City };

inline GroupBy group_by_from_string(const std::string& s) {
  if (s == "country") return GroupBy::Country;
  if (s == "city") return GroupBy::City;
  throw std::invalid_argument("unknown group key: " + s);
}

namespace analyticsdetail {

inline std::string region_key(const RawRecord& r, GroupBy by) {
  const auto& field = by == GroupBy::Country ? r.country : r.city;
  return field ? *field : std::string("(unknown)");
}

}  // namespace analyticsdetail

/// Classifies every record with a frozen classifier, preserving order and
/// ids. Records gain a predicted label; existing labels are overwritten.
template <class Real>
std::vector<RawRecord> label_corpus(const Classifier<Real>& clf, const BpeTokenizer& tok,
                                    std::vector<RawRecord> records, int max_length,
                                    int batch_size = 64) {
  clf.set_trainable(false);
  TextDataset ds = encode_dataset(tok, records, max_length, /*require_labels=*/false);
  std::vector<size_t> idx(records.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto preds = predict(clf, ds, idx, batch_size);
  for (size_t i = 0; i < records.size(); ++i) records[i].label = Label(preds[i]);
  return records;
}

/// Tags Request/Offer records with one of the six resource types using a
/// 6-class classifier; other records never carry a resource tag.
template <class Real>
std::vector<RawRecord> tag_resources(const Classifier<Real>& clf, const BpeTokenizer& tok,
                                     std::vector<RawRecord> records, int max_length,
                                     int batch_size = 64) {
  num::check(clf.encoder.cfg.num_classes == kNumResources,
             "resource classifier must have six output units");
  clf.set_trainable(false);
  std::vector<size_t> actionable;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].label &&
        (*records[i].label == Label::Request || *records[i].label == Label::Offer))
      actionable.push_back(i);
    else
      records[i].resource.reset();
  }
  if (actionable.empty()) return records;

  std::vector<RawRecord> subset;
  subset.reserve(actionable.size());
  for (size_t i : actionable) subset.push_back(records[i]);
  TextDataset ds = encode_dataset(tok, subset, max_length, /*require_labels=*/false);
  std::vector<size_t> idx(subset.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto preds = predict(clf, ds, idx, batch_size);
  for (size_t k = 0; k < actionable.size(); ++k)
    records[actionable[k]].resource = Resource(preds[k]);
  return records;
}

struct RoRow {
  std::string region;
  std::int64_t requests = 0;
  std::int64_t offers = 0;
  bool ratio_defined = false;
  double ratio = 0;  // requests / offers when offers > 0
};

/// Request and Offer counts per region, sorted by exact ratio descending.
/// Rows with zero offers keep their counts and an undefined ratio; they
/// sort after the defined rows.
inline std::vector<RoRow> ro_ratio(std::span<const RawRecord> records, GroupBy by) {
  std::map<std::string, RoRow> rows;
  for (const auto& r : records) {
    if (!r.label) continue;
    if (*r.label != Label::Request && *r.label != Label::Offer) continue;
    auto& row = rows[analyticsdetail::region_key(r, by)];
    if (*r.label == Label::Request) row.requests += 1;
    else row.offers += 1;
  }
  std::vector<RoRow> out;
  out.reserve(rows.size());
  for (auto& [region, row] : rows) {
    row.region = region;
    row.ratio_defined = row.offers > 0;
    if (row.ratio_defined) row.ratio = double(row.requests) / double(row.offers);
    out.push_back(std::move(row));
  }
  std::sort(out.begin(), out.end(), [](const RoRow& a, const RoRow& b) {
    if (a.ratio_defined != b.ratio_defined) return a.ratio_defined;
    if (a.ratio_defined) {
      if (a.ratio != b.ratio) return a.ratio > b.ratio;
    } else if (a.requests != b.requests) {
      return a.requests > b.requests;
    }
    return a.region < b.region;
  });
  return out;
}

inline CsvTable ro_table(const std::vector<RoRow>& rows) {
  CsvTable t;
  t.header = {"region", "requests", "offers", "ro_ratio"};
  for (const auto& r : rows) {
    char ratio[32];
    if (r.ratio_defined) std::snprintf(ratio, sizeof(ratio), "%.2f", r.ratio);
    else std::snprintf(ratio, sizeof(ratio), "undefined");
    t.rows.push_back({r.region, std::to_string(r.requests), std::to_string(r.offers), ratio});
  }
  return t;
}

enum class TrendKey { Resource, ByLabel };

struct TrendTable {
  std::vector<std::string> months;  // "YYYY-MM", contiguous range
  std::map<std::string, std::vector<std::int64_t>> series;
  std::int64_t untimed = 0;
};

/// Counts per UTC calendar month per key, zero-filled over the full range
/// so all series align. Records without a timestamp land in `untimed`.
inline TrendTable monthly_trend(std::span<const RawRecord> records, TrendKey by,
                                const std::vector<std::string>& key_filter = {}) {
  auto key_of = [by](const RawRecord& r) -> std::optional<std::string> {
    if (by == TrendKey::Resource) {
      // resource tags are only meaningful on actionable records
      if (!r.resource || !r.label ||
          (*r.label != Label::Request && *r.label != Label::Offer))
        return std::nullopt;
      return std::string(to_string(*r.resource));
    }
    if (!r.label) return std::nullopt;
    return std::string(to_string(*r.label));
  };
  auto keep = [&key_filter](const std::string& k) {
    return key_filter.empty() ||
           std::find(key_filter.begin(), key_filter.end(), k) != key_filter.end();
  };

  TrendTable table;
  std::map<std::string, std::map<int, std::int64_t>> raw;  // key -> month index -> count
  int lo = INT32_MAX, hi = INT32_MIN;
  for (const auto& r : records) {
    auto key = key_of(r);
    if (!key || !keep(*key)) continue;
    if (!r.timestamp) {
      table.untimed += 1;
      continue;
    }
    const int m = r.timestamp->year * 12 + (r.timestamp->month - 1);
    raw[*key][m] += 1;
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  if (raw.empty()) return table;

  for (int m = lo; m <= hi; ++m) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", m / 12, m % 12 + 1);
    table.months.push_back(buf);
  }
  for (auto& [key, counts] : raw) {
    std::vector<std::int64_t> row(table.months.size(), 0);
    for (const auto& [m, c] : counts) row[size_t(m - lo)] = c;
    table.series[key] = std::move(row);
  }
  return table;
}

inline CsvTable trend_table_csv(const TrendTable& t) {
  CsvTable out;
  out.header = {"month"};
  for (const auto& [key, row] : t.series) out.header.push_back(key);
  for (size_t m = 0; m < t.months.size(); ++m) {
    std::vector<std::string> row = {t.months[m]};
    for (const auto& [key, counts] : t.series) row.push_back(std::to_string(counts[m]));
    out.rows.push_back(std::move(row));
  }
  return out;
}

struct RegionShare {
  std::string region;
  std::int64_t count = 0;
  double percent = 0;  // share of the label's corpus-wide total
};

/// Top-k regions for one label with percentage of the label total;
/// k beyond the distinct regions returns them all.
inline std::vector<RegionShare> top_regions(std::span<const RawRecord> records, Label label,
                                            int k, GroupBy by = GroupBy::City) {
  std::map<std::string, std::int64_t> counts;
  std::int64_t total = 0;
  for (const auto& r : records) {
    if (!r.label || *r.label != label) continue;
    counts[analyticsdetail::region_key(r, by)] += 1;
    ++total;
  }
  std::vector<RegionShare> out;
  for (const auto& [region, count] : counts)
    out.push_back({region, count, total > 0 ? 100.0 * double(count) / double(total) : 0.0});
  std::sort(out.begin(), out.end(), [](const RegionShare& a, const RegionShare& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.region < b.region;
  });
  if (k >= 0 && int(out.size()) > k) out.resize(size_t(k));
  return out;
}

inline CsvTable top_regions_csv(const std::vector<RegionShare>& shares) {
  CsvTable t;
  t.header = {"region", "count", "percent"};
  for (const auto& s : shares) {
    char pct[32];
    std::snprintf(pct, sizeof(pct), "%.2f", s.percent);
    t.rows.push_back({s.region, std::to_string(s.count), pct});
  }
  return t;
}

}  // namespace crisiskit
