#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"

namespace crisiskit {

/// The four-way label set for help/offer classification.
enum class Label { Request, Offer, RequestAndOffer, Irrelevant };

constexpr int kNumLabels = 4;

inline const char* to_string(Label l) {
  switch (l) {
    case Label::Request: return "Request";
    case Label::Offer: return "Offer";
    case Label::RequestAndOffer: return "Request and Offer";
    case Label::Irrelevant: return "Irrelevant";
  }
  return "?";
}

inline std::string lowercase_ascii(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// Tolerant label parsing; anything unrecognized yields nullopt and is
/// treated by callers as disagreement.
inline std::optional<Label> parse_label(const std::string& raw) {
  std::string s = lowercase_ascii(trim(raw));
  std::string compact;
  for (char c : s)
    if (c != ' ' && c != '_' && c != '-') compact.push_back(c);
  if (compact == "request") return Label::Request;
  if (compact == "offer") return Label::Offer;
  if (compact == "requestandoffer") return Label::RequestAndOffer;
  if (compact == "irrelevant") return Label::Irrelevant;
  return std::nullopt;
}

enum class Resource { Money, Volunteers, Clothing, Shelter, MedicalAid, Food };

constexpr int kNumResources = 6;

inline const char* to_string(Resource r) {
  switch (r) {
    case Resource::Money: return "Money";
    case Resource::Volunteers: return "Volunteers";
    case Resource::Clothing: return "Clothing";
    case Resource::Shelter: return "Shelter";
    case Resource::MedicalAid: return "Medical Aid";
    case Resource::Food: return "Food";
  }
  return "?";
}

inline std::optional<Resource> parse_resource(const std::string& raw) {
  std::string s = lowercase_ascii(trim(raw));
  std::string compact;
  for (char c : s)
    if (c != ' ' && c != '_' && c != '-') compact.push_back(c);
  if (compact == "money") return Resource::Money;
  if (compact == "volunteers" || compact == "volunteer") return Resource::Volunteers;
  if (compact == "clothing") return Resource::Clothing;
  if (compact == "shelter") return Resource::Shelter;
  if (compact == "medicalaid") return Resource::MedicalAid;
  if (compact == "food") return Resource::Food;
  return std::nullopt;
}

struct UtcTime {
  int year = 0;
  int month = 0;  // 1..12
  int day = 1;
  int hour = 0;
  int minute = 0;
  int second = 0;
};

/// Accepts "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SS" with optional trailing "Z".
inline std::optional<UtcTime> parse_utc(const std::string& s) {
  UtcTime t;
  int n = std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d", &t.year, &t.month, &t.day,
                      &t.hour, &t.minute, &t.second);
  if (n < 3) return std::nullopt;
  if (t.month < 1 || t.month > 12 || t.day < 1 || t.day > 31) return std::nullopt;
  return t;
}

inline std::string format_utc(const UtcTime& t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", t.year, t.month,
                t.day, t.hour, t.minute, t.second);
  return buf;
}

/// One social-media record. Only id and text are required; the rest are
/// present when the source provides them.
struct RawRecord {
  std::string id;
  std::string text;
  std::optional<Label> label;
  std::optional<std::string> country;  // ISO-3166 alpha-3
  std::optional<std::string> city;
  std::optional<UtcTime> timestamp;
  std::optional<Resource> resource;
};

inline nlohmann::json to_json(const RawRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["text"] = r.text;
  if (r.label) j["label"] = to_string(*r.label);
  if (r.country) j["country"] = *r.country;
  if (r.city) j["city"] = *r.city;
  if (r.timestamp) j["timestamp"] = format_utc(*r.timestamp);
  if (r.resource) j["resource"] = to_string(*r.resource);
  return j;
}

inline RawRecord record_from_json(const nlohmann::json& j) {
  RawRecord r;
  r.id = j.at("id").get<std::string>();
  if (j.contains("text")) r.text = j.at("text").get<std::string>();
  if (j.contains("label") && !j["label"].is_null()) {
    auto l = parse_label(j["label"].get<std::string>());
    if (!l) throw std::runtime_error("unknown label: " + j["label"].get<std::string>());
    r.label = *l;
  }
  if (j.contains("country") && !j["country"].is_null())
    r.country = j["country"].get<std::string>();
  if (j.contains("city") && !j["city"].is_null()) r.city = j["city"].get<std::string>();
  if (j.contains("timestamp") && !j["timestamp"].is_null()) {
    auto ts = parse_utc(j["timestamp"].get<std::string>());
    if (ts) r.timestamp = *ts;
  }
  if (j.contains("resource") && !j["resource"].is_null()) {
    auto res = parse_resource(j["resource"].get<std::string>());
    if (res) r.resource = *res;
  }
  return r;
}

/// Reads a JSONL corpus. Ids must be non-empty and unique; with
/// `require_text` every record must have non-empty text after trimming.
inline std::vector<RawRecord> read_jsonl(const std::string& path, bool require_text = false) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<RawRecord> out;
  std::unordered_set<std::string> seen;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    RawRecord r = record_from_json(nlohmann::json::parse(line));
    if (r.id.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty id");
    if (!seen.insert(r.id).second)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": duplicate id " + r.id);
    if (require_text && trim(r.text).empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty text");
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_jsonl(const std::string& path, const std::vector<RawRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& r : records) out << to_json(r).dump() << "\n";
}

}  // namespace crisiskit
