#pragma once

#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "commprof/core/error.hpp"
#include "commprof/cost/types.hpp"
#include "commprof/ir/aggregate.hpp"
#include "commprof/ir/label.hpp"

namespace commprof {

/// Result of profiling one program under one framework.
struct ProfileReport {
  std::string framework;
  SecurityParams params;
  CostMap entries;

  CostTuple total() const {
    CostTuple t;
    for (const auto& [label, cost] : entries) t += cost;
    return t;
  }

  CostTuple at(const std::string& label) const {
    const CostTuple* c = entries.find(label);
    return c ? *c : CostTuple{};
  }

  // Sum over entries whose label starts with `prefix` on a segment boundary.
  CostTuple query_prefix(std::string_view prefix) const {
    CostTuple t;
    for (const auto& [label, cost] : entries) {
      if (label_has_prefix(label, prefix)) t += cost;
    }
    return t;
  }

  // Sum over entries whose label contains `needle` as a run of whole segments.
  CostTuple query_contains(std::string_view needle) const {
    CostTuple t;
    for (const auto& [label, cost] : entries) {
      if (label_contains(label, needle)) t += cost;
    }
    return t;
  }

  friend bool operator==(const ProfileReport&, const ProfileReport&) = default;
};

inline nlohmann::ordered_json params_to_json(const SecurityParams& p) {
  return {{"k", p.k}, {"kappa_s", p.kappa_s}, {"kappa", p.kappa}, {"f", p.f}, {"m", p.m}};
}

inline SecurityParams params_from_json(const nlohmann::ordered_json& j) {
  SecurityParams p;
  auto field = [&](const char* key, std::uint64_t& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::uint64_t>();
  };
  field("k", p.k);
  field("kappa_s", p.kappa_s);
  field("kappa", p.kappa);
  field("f", p.f);
  field("m", p.m);
  return p;
}

inline nlohmann::ordered_json report_to_json(const ProfileReport& r) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::object();
  for (const auto& [label, c] : r.entries) {
    entries[label] = {c.online_bits, c.online_rounds, c.offline_bits, c.offline_rounds};
  }
  return {{"framework", r.framework}, {"params", params_to_json(r.params)}, {"entries", entries}};
}

inline ProfileReport report_from_json(const nlohmann::ordered_json& j) {
  ProfileReport r;
  try {
    r.framework = j.at("framework").get<std::string>();
    r.params = params_from_json(j.at("params"));
    for (const auto& [label, v] : j.at("entries").items()) {
      if (!v.is_array() || v.size() != 4) throw ValidationError("report entry '" + label + "' must have four values");
      r.entries[label] = {v[0].get<std::uint64_t>(), v[1].get<std::uint64_t>(), v[2].get<std::uint64_t>(),
                          v[3].get<std::uint64_t>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return r;
}

inline constexpr std::string_view kCsvHeader = "label,online_bits,online_rounds,offline_bits,offline_rounds";

inline std::string report_to_csv(const ProfileReport& r) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& [label, c] : r.entries) {
    os << label << ',' << c.online_bits << ',' << c.online_rounds << ',' << c.offline_bits << ','
       << c.offline_rounds << '\n';
  }
  return os.str();
}

// Labels never contain commas, so no quoting is needed.
inline CostMap entries_from_csv(std::string_view text) {
  CostMap out;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ValidationError("CSV report has an unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string col;
    while (std::getline(ls, col, ',')) cols.push_back(col);
    if (cols.size() != 5) throw ValidationError("CSV report row '" + line + "' must have five columns");
    try {
      out[cols[0]] = {std::stoull(cols[1]), std::stoull(cols[2]), std::stoull(cols[3]), std::stoull(cols[4])};
    } catch (const std::logic_error&) {
      throw ValidationError("CSV report row '" + line + "' has a non-numeric value");
    }
  }
  return out;
}

}  // namespace commprof
