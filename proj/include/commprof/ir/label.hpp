#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "commprof/core/error.hpp"

namespace commprof {

inline constexpr std::string_view kRootLabel = "initial";
inline constexpr char kLabelSeparator = '-';

inline std::vector<std::string_view> split_label(std::string_view label) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = label.find(kLabelSeparator, start);
    out.push_back(label.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

/// Throws unless `segment` is usable as one user label segment.
inline void validate_segment(std::string_view segment) {
  if (segment.empty()) throw ValidationError("label segment must be non-empty");
  if (segment.find(kLabelSeparator) != std::string_view::npos) {
    throw ValidationError("label segment '" + std::string(segment) + "' must not contain '-'");
  }
}

/// True when `label` is "initial" followed by zero or more non-empty segments.
inline bool is_well_formed_label(std::string_view label) {
  auto segs = split_label(label);
  if (segs.front() != kRootLabel) return false;
  for (auto s : segs) {
    if (s.empty()) return false;
  }
  return true;
}

/// Segment-aligned prefix test: "initial-exp" is a prefix of "initial-exp-forward"
/// but not of "initial-expanded".
inline bool label_has_prefix(std::string_view label, std::string_view prefix) {
  if (prefix.empty()) return true;
  if (label.size() < prefix.size() || label.substr(0, prefix.size()) != prefix) return false;
  return label.size() == prefix.size() || label[prefix.size()] == kLabelSeparator;
}

/// Segment-aligned substring test: "exp-forward" occurs in "initial-net-exp-forward"
/// but not in "initial-myexp-forward".
inline bool label_contains(std::string_view label, std::string_view needle) {
  if (needle.empty()) return true;
  auto hay = split_label(label);
  auto pat = split_label(needle);
  if (pat.size() > hay.size()) return false;
  for (std::size_t i = 0; i + pat.size() <= hay.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < pat.size() && match; ++j) match = hay[i + j] == pat[j];
    if (match) return true;
  }
  return false;
}

/// Stack of label segments rooted at "initial".
class LabelStack {
 public:
  LabelStack() { segments_.emplace_back(kRootLabel); }

  void push(std::string segment) { segments_.push_back(std::move(segment)); }

  void pop() {
    if (segments_.size() <= 1) throw CompileError("label stack underflow");
    segments_.pop_back();
  }

  std::size_t depth() const { return segments_.size(); }

  std::string current() const {
    std::string out;
    for (const auto& s : segments_) {
      if (!out.empty()) out.push_back(kLabelSeparator);
      out += s;
    }
    return out;
  }

 private:
  std::vector<std::string> segments_;
};

}  // namespace commprof
