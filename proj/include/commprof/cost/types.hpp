#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "commprof/core/error.hpp"

namespace commprof {

/// Security and encoding parameters every cost formula may reference.
struct SecurityParams {
  std::uint64_t k = 64;         // ring bit length
  std::uint64_t kappa_s = 40;   // statistical security parameter
  std::uint64_t kappa = 128;    // computational security parameter
  std::uint64_t f = 16;         // fractional bits of the fixed-point encoding
  std::uint64_t m = 2;          // party count

  void validate() const {
    if (k == 0) throw ValidationError("bit length k must be positive");
    if (f > k) throw ValidationError("fractional bits f must not exceed k");
    if (m < 2) throw ValidationError("party count m must be at least 2");
    if (kappa_s > kappa) throw ValidationError("kappa_s must not exceed kappa");
  }

  friend bool operator==(const SecurityParams&, const SecurityParams&) = default;
};

/// (online bits, online rounds, offline bits, offline rounds).
struct CostTuple {
  std::uint64_t online_bits = 0;
  std::uint64_t online_rounds = 0;
  std::uint64_t offline_bits = 0;
  std::uint64_t offline_rounds = 0;

  CostTuple& operator+=(const CostTuple& o) {
    online_bits += o.online_bits;
    online_rounds += o.online_rounds;
    offline_bits += o.offline_bits;
    offline_rounds += o.offline_rounds;
    return *this;
  }
  friend CostTuple operator+(CostTuple a, const CostTuple& b) { return a += b; }

  CostTuple scaled(std::uint64_t n) const {
    return {online_bits * n, online_rounds * n, offline_bits * n, offline_rounds * n};
  }

  bool is_zero() const {
    return online_bits == 0 && online_rounds == 0 && offline_bits == 0 && offline_rounds == 0;
  }

  friend bool operator==(const CostTuple&, const CostTuple&) = default;
  friend std::ostream& operator<<(std::ostream& os, const CostTuple& c) {
    return os << '(' << c.online_bits << ", " << c.online_rounds << ", " << c.offline_bits << ", "
              << c.offline_rounds << ')';
  }
};

/// Geometry of a 2-D convolution, as consumed by direct conv2d formulas.
struct ConvGeometry {
  std::uint64_t batch = 1;
  std::uint64_t in_channel = 1;
  std::uint64_t out_channel = 1;
  std::uint64_t inw = 1;
  std::uint64_t inh = 1;
  std::uint64_t outw = 1;
  std::uint64_t outh = 1;
  std::uint64_t kw = 1;
  std::uint64_t kh = 1;
  std::uint64_t groups = 1;

  friend bool operator==(const ConvGeometry&, const ConvGeometry&) = default;
};

/// Homomorphic-encryption parameters used by HE-backed formulas.
struct HeParams {
  std::uint64_t deg = 4096;
  std::vector<std::uint64_t> mod = {59, 55, 49, 49};
  // Local-compute and bandwidth prices for the Cheetah partition search.
  double lp = 1.0;
  double bp = 1000.0;

  void validate() const {
    if (deg == 0 || (deg & (deg - 1)) != 0) throw ValidationError("HE degree must be a power of two");
    if (mod.empty()) throw ValidationError("HE modulus chain must be non-empty");
    if (lp < 0 || bp < 0) throw ValidationError("HE prices must be non-negative");
  }

  friend bool operator==(const HeParams&, const HeParams&) = default;
};

/// Op-specific arguments of one instruction.
struct OpExtras {
  std::uint64_t size = 1;  // number of parallel instances
  std::uint64_t p = 0;
  std::uint64_t q = 0;
  std::uint64_t r = 0;
  bool knownmsb = false;
  std::optional<ConvGeometry> conv;
  HeParams he;

  static OpExtras elementwise(std::uint64_t n, bool knownmsb = false) {
    OpExtras e;
    e.size = n;
    e.knownmsb = knownmsb;
    return e;
  }
  static OpExtras matmul(std::uint64_t p, std::uint64_t q, std::uint64_t r, std::uint64_t batch = 1) {
    OpExtras e;
    e.size = batch;
    e.p = p;
    e.q = q;
    e.r = r;
    return e;
  }

  friend bool operator==(const OpExtras&, const OpExtras&) = default;
};

}  // namespace commprof
