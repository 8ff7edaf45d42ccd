#pragma once

#include <cstdint>

#include "commprof/core/error.hpp"
#include "commprof/ir/context.hpp"

// Emission helpers for fixed-point secret values. Sizes are element counts;
// every helper emits one vectorized instruction per basic step and nothing
// when the count is zero.
namespace commprof::ops {

namespace detail {
inline void emit_n(const char* op, std::uint64_t n, bool knownmsb = false) {
  if (n == 0) return;
  commprof::emit(op, OpExtras::elementwise(n, knownmsb));
}
}  // namespace detail

inline void share(std::uint64_t n) { detail::emit_n("share", n); }
inline void reveal(std::uint64_t n) { detail::emit_n("reveal", n); }

inline void truncate(std::uint64_t n, bool knownmsb = false) { detail::emit_n("TruncPr", n, knownmsb); }

// Secret times secret, followed by the fixed-point rescale.
inline void fp_mul(std::uint64_t n, bool knownmsb = false) {
  detail::emit_n("muls", n);
  truncate(n, knownmsb);
}

// Multiplication by a secret 0/1 mask; no rescale needed.
inline void bit_mul(std::uint64_t n) { detail::emit_n("muls", n); }

// Secret times public fixed-point constant.
inline void fp_public_scale(std::uint64_t n, bool knownmsb = false) { truncate(n, knownmsb); }

inline void fp_ltz(std::uint64_t n) { detail::emit_n("LTZ", n); }

inline void fp_matmul(std::uint64_t p, std::uint64_t q, std::uint64_t r, std::uint64_t batch = 1,
                      bool knownmsb = false) {
  if (p == 0 || q == 0 || r == 0) throw ValidationError("matmul dimensions must be positive");
  if (batch == 0) return;
  commprof::emit("matmuls", OpExtras::matmul(p, q, r, batch));
  truncate(p * r * batch, knownmsb);
}

inline void exp(std::uint64_t n) { detail::emit_n("exp", n); }
inline void reciprocal(std::uint64_t n) { detail::emit_n("reciprocal", n); }
inline void inv_sqrt(std::uint64_t n) { detail::emit_n("inv_sqrt", n); }
inline void div(std::uint64_t n) { detail::emit_n("div", n); }

inline void conv2d(const ConvGeometry& g, bool knownmsb = false) {
  if (g.batch == 0) return;
  OpExtras e;
  e.conv = g;
  commprof::emit("conv2d", e);
  truncate(g.batch * g.out_channel * g.outh * g.outw, knownmsb);
}

/// Secret integer, for programs written against the raw instruction set.
/// Constants are shared without communication; only products and reveals
/// touch the network.
class SecretInt {
 public:
  SecretInt() = default;
  explicit SecretInt(std::int64_t) {}

  static SecretInt input() {
    share(1);
    return SecretInt{};
  }

  friend SecretInt operator+(const SecretInt&, const SecretInt&) { return {}; }
  friend SecretInt operator-(const SecretInt&, const SecretInt&) { return {}; }
  friend SecretInt operator*(const SecretInt&, const SecretInt&) {
    bit_mul(1);
    return {};
  }

  void reveal() const { ops::reveal(1); }
};

}  // namespace commprof::ops
