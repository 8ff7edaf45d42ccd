#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "commprof/core/error.hpp"
#include "commprof/ir/label.hpp"
#include "commprof/ir/report.hpp"

namespace commprof::report {

enum class Grouping { label, op, fb };
enum class Phase { online, offline, both };

inline Grouping parse_grouping(std::string_view s) {
  if (s == "label") return Grouping::label;
  if (s == "operator") return Grouping::op;
  if (s == "fb") return Grouping::fb;
  throw ValidationError("grouping must be label, operator or fb, got '" + std::string(s) + "'");
}

inline Phase parse_phase(std::string_view s) {
  if (s == "online") return Phase::online;
  if (s == "offline") return Phase::offline;
  if (s == "both") return Phase::both;
  throw ValidationError("phase must be online, offline or both, got '" + std::string(s) + "'");
}

inline bool is_phase_segment(std::string_view s) { return s == "forward" || s == "backward" || s == "step"; }

/// Operator an entry belongs to: the segment before the innermost
/// forward/backward/step marker, or the last segment when there is none.
inline std::string operator_of(std::string_view label) {
  auto segs = split_label(label);
  for (std::size_t i = segs.size(); i-- > 1;) {
    if (is_phase_segment(segs[i])) return std::string(segs[i - 1]);
  }
  return std::string(segs.back());
}

inline std::string direction_of(std::string_view label) {
  auto segs = split_label(label);
  for (std::size_t i = segs.size(); i-- > 0;) {
    if (segs[i] == "forward" || segs[i] == "backward") return std::string(segs[i]);
  }
  return "other";
}

inline std::string bucket_of(std::string_view label, Grouping g) {
  switch (g) {
    case Grouping::label:
      return std::string(label);
    case Grouping::op:
      return operator_of(label);
    case Grouping::fb:
      return direction_of(label);
  }
  return std::string(label);
}

/// Disjoint, total partition of the entries.
inline CostMap group_report(const ProfileReport& r, Grouping g) {
  CostMap out;
  if (g == Grouping::fb) {
    out["forward"];
    out["backward"];
  }
  for (const auto& [label, cost] : r.entries) out[bucket_of(label, g)] += cost;
  return out;
}

inline std::uint64_t phase_bits(const CostTuple& c, Phase p) {
  switch (p) {
    case Phase::online:
      return c.online_bits;
    case Phase::offline:
      return c.offline_bits;
    case Phase::both:
      return c.online_bits + c.offline_bits;
  }
  return 0;
}

inline std::string format_table(const CostMap& rows, Phase phase, std::string_view first_column = "label") {
  std::vector<CostMap::Entry> sorted(rows.begin(), rows.end());
  std::stable_sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) {
    return phase_bits(a.second, phase) > phase_bits(b.second, phase);
  });
  CostTuple total;
  for (const auto& [_, c] : sorted) total += c;

  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{std::string(first_column)};
  if (phase != Phase::offline) header.insert(header.end(), {"online_bits", "online_rounds"});
  if (phase != Phase::online) header.insert(header.end(), {"offline_bits", "offline_rounds"});
  cells.push_back(header);
  auto row = [&](const std::string& name, const CostTuple& c) {
    std::vector<std::string> r{name};
    if (phase != Phase::offline) r.insert(r.end(), {std::to_string(c.online_bits), std::to_string(c.online_rounds)});
    if (phase != Phase::online) r.insert(r.end(), {std::to_string(c.offline_bits), std::to_string(c.offline_rounds)});
    cells.push_back(r);
  };
  for (const auto& [name, c] : sorted) row(name, c);
  row("total", total);

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : cells) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream os;
  for (std::size_t ri = 0; ri < cells.size(); ++ri) {
    if (ri + 1 == cells.size()) {
      for (std::size_t i = 0; i < width.size(); ++i) os << (i ? "  " : "") << std::string(width[i], '-');
      os << '\n';
    }
    const auto& r = cells[ri];
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i == 0) {
        os << std::left << std::setw(static_cast<int>(width[i])) << r[i];
      } else {
        os << "  " << std::right << std::setw(static_cast<int>(width[i])) << r[i];
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace commprof::report
