#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "commprof/core/error.hpp"

namespace commprof {

namespace detail {
inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }
}  // namespace detail

struct CiphertextCount {
  std::uint64_t send = 0;      // ciphertexts sent by the key holder
  std::uint64_t response = 0;  // ciphertexts returned by the evaluator

  friend bool operator==(const CiphertextCount&, const CiphertextCount&) = default;
};

/// Ciphertext counts for an HE matrix product p x q x r under the partition
/// that minimizes (send + response) * bp + num_1 * lp + num_2 * lp / 10.
///
/// The search visits d1 in [1, min(deg, p + 1)) and, for each, d2 = 1, 2, 4, ...
/// while d2 <= q and d1 * d2 <= deg. Ties keep the later candidate.
inline CiphertextCount cheetah_matmul_ct_count(std::uint64_t p, std::uint64_t q, std::uint64_t r,
                                               std::uint64_t deg, double lp, double bp) {
  if (p == 0 || q == 0 || r == 0) throw ValidationError("cheetah ciphertext count: zero dimension");
  if (deg == 0) throw ValidationError("cheetah ciphertext count: zero polynomial degree");

  double min_cost = std::numeric_limits<double>::max();
  CiphertextCount best;
  const std::uint64_t d1_end = std::min(deg, p + 1);
  for (std::uint64_t d1 = 1; d1 < d1_end; ++d1) {
    const std::uint64_t blocks_p = detail::ceil_div(p, d1);
    for (std::uint64_t d2 = 1; d2 <= q && d1 * d2 <= deg; d2 *= 2) {
      const std::uint64_t blocks_q = detail::ceil_div(q, d2);
      const std::uint64_t d3 = std::min(r, detail::ceil_div(deg, d1 * d2));
      const std::uint64_t blocks_r = detail::ceil_div(r, d3);
      const std::uint64_t send = std::min(blocks_p, blocks_r) * blocks_q;
      const std::uint64_t response = detail::ceil_div(blocks_p * blocks_r, d2);
      const std::uint64_t num_1 = detail::ceil_div(blocks_p * blocks_r, deg) * d2;
      const std::uint64_t num_2 = blocks_p * blocks_q * blocks_r;
      const double cost = static_cast<double>(send + response) * bp +
                          static_cast<double>(num_1) * lp + static_cast<double>(num_2) * lp / 10.0;
      if (cost <= min_cost) {
        min_cost = cost;
        best = {send, response};
      }
    }
  }
  return best;
}

inline constexpr std::uint64_t kSemi2kMemLimit = std::uint64_t{1} << 31;

/// Number of ring elements exchanged by a SEMI2K matrix product p x q x r
/// with k-bit elements, including the memory-bounded block partition used
/// for large operands.
inline std::uint64_t semi2k_matmul_msg_count(std::uint64_t p, std::uint64_t q, std::uint64_t r,
                                             std::uint64_t k) {
  if (k == 0) throw ValidationError("semi2k message count: zero bit length");
  const std::uint64_t mem_limit = kSemi2kMemLimit;
  if (p == 0 || q == 0 || r == 0 || (p * q + q * r) * k < mem_limit) return p * q + q * r;

  std::uint64_t q_step = 0;
  std::uint64_t expected_pr_step = 0;
  if (q > (p + r) * 8) {
    expected_pr_step = p + r;
    q_step = std::max<std::uint64_t>(1, detail::ceil_div(mem_limit, k * expected_pr_step));
  } else if ((p + r) > q * 8) {
    q_step = q;
    expected_pr_step = std::max<std::uint64_t>(1, detail::ceil_div(mem_limit, k * q_step));
  } else {
    const double pr_step = std::sqrt(static_cast<double>(p + r) * static_cast<double>(mem_limit) /
                                     (static_cast<double>(q) * static_cast<double>(k)));
    q_step = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::ceil(static_cast<double>(mem_limit) /
                                                static_cast<double>(k) / pr_step)));
    expected_pr_step = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(pr_step)));
  }
  const std::uint64_t p_step = std::max<std::uint64_t>(1, detail::ceil_div(expected_pr_step * p, p + r));
  const std::uint64_t r_step = std::max<std::uint64_t>(1, detail::ceil_div(expected_pr_step * r, p + r));

  std::uint64_t total = 0;
  for (std::uint64_t p_off = 0; p_off < p; p_off += p_step) {
    const std::uint64_t p_sub = std::min(p - p_off, p_step);
    for (std::uint64_t q_off = 0; q_off < q; q_off += q_step) {
      const std::uint64_t q_sub = std::min(q - q_off, q_step);
      for (std::uint64_t r_off = 0; r_off < r; r_off += r_step) {
        const std::uint64_t r_sub = std::min(r - r_off, r_step);
        total += p_sub * q_sub + q_sub * r_sub;
      }
    }
  }
  return total;
}

}  // namespace commprof
