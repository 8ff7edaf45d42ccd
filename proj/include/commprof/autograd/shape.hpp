#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "commprof/core/error.hpp"

namespace commprof::autograd {

using Shape = std::vector<std::uint64_t>;

inline std::string to_string(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

inline void validate_shape(const Shape& s) {
  if (s.empty()) throw ValidationError("tensor shape must have at least one dimension");
  for (auto d : s) {
    if (d == 0) throw ValidationError("tensor shape " + to_string(s) + " has a zero dimension");
  }
}

inline std::uint64_t numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::uint64_t{1}, std::multiplies<>());
}

// Negative axes count from the end.
inline std::size_t normalize_axis(std::int64_t axis, std::size_t rank) {
  const auto r = static_cast<std::int64_t>(rank);
  if (axis < -r || axis >= r) {
    throw ValidationError("axis " + std::to_string(axis) + " out of range for rank " + std::to_string(rank));
  }
  return static_cast<std::size_t>(axis < 0 ? axis + r : axis);
}

/// Right-aligned broadcasting.
inline Shape broadcast_shapes(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::uint64_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::uint64_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw ValidationError("shapes " + to_string(a) + " and " + to_string(b) + " do not broadcast");
    }
    out[i] = std::max(da, db);
  }
  return out;
}

/// An operand broadcast to `out`, viewed as [1, |operand|] against
/// [rho, |operand|] after moving the broadcast dimensions to the front.
struct Broadcast2D {
  std::uint64_t rho = 1;  // reduction factor |out| / |operand|
  std::uint64_t cols = 1;

  Shape operand_shape() const { return {1, cols}; }
  Shape result_shape() const { return {rho, cols}; }
};

inline Broadcast2D normalize_broadcast(const Shape& operand, const Shape& out) {
  if (broadcast_shapes(operand, out) != out) {
    throw ValidationError("shape " + to_string(operand) + " does not broadcast to " + to_string(out));
  }
  return {numel(out) / numel(operand), numel(operand)};
}

}  // namespace commprof::autograd
