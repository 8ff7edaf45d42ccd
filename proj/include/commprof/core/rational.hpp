#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

#include "commprof/core/error.hpp"

namespace commprof {

// Exact rational number over 128-bit integers. Cost formulas mix integer
// arithmetic with fractional constants (e.g. 7.425*k) and nested ceilings;
// evaluating them exactly keeps every rounding step well defined.
class Rational {
 public:
  __extension__ using Int = __int128;

  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT: implicit by intent
  Rational(Int num, Int den) : num_(num), den_(den) {
    if (den_ == 0) throw EvaluationError("division by zero");
    normalize();
  }

  static Rational from_uint(std::uint64_t value) { return Rational(static_cast<Int>(value), 1); }

  // Parses "123", "7.425" or "1e3" exactly.
  static Rational parse_decimal(std::string_view text) {
    Int num = 0;
    Int den = 1;
    std::size_t i = 0;
    bool any_digit = false;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
      num = checked_mul(num, 10) + (text[i] - '0');
      any_digit = true;
    }
    if (i < text.size() && text[i] == '.') {
      ++i;
      for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
        num = checked_mul(num, 10) + (text[i] - '0');
        den = checked_mul(den, 10);
        any_digit = true;
      }
    }
    if (!any_digit) throw ValidationError("malformed number '" + std::string(text) + "'");
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
      ++i;
      bool negative = false;
      if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
      int exponent = 0;
      bool exp_digit = false;
      for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
        exponent = exponent * 10 + (text[i] - '0');
        exp_digit = true;
        if (exponent > 30) throw ValidationError("exponent too large in '" + std::string(text) + "'");
      }
      if (!exp_digit) throw ValidationError("malformed exponent in '" + std::string(text) + "'");
      for (int e = 0; e < exponent; ++e) {
        if (negative) {
          den = checked_mul(den, 10);
        } else {
          num = checked_mul(num, 10);
        }
      }
    }
    if (i != text.size()) throw ValidationError("malformed number '" + std::string(text) + "'");
    return Rational(num, den);
  }

  constexpr Int numerator() const { return num_; }
  constexpr Int denominator() const { return den_; }
  constexpr bool is_integer() const { return den_ == 1; }
  constexpr bool is_zero() const { return num_ == 0; }
  constexpr bool is_negative() const { return num_ < 0; }

  Int floor() const {
    Int q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
  }
  Int ceil() const {
    Int q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) ++q;
    return q;
  }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  // Smallest integer n with 2^n >= value; value must be positive.
  Int ceil_log2() const {
    if (num_ <= 0) throw EvaluationError("log2 of a non-positive value");
    Int n = 0;
    // compare 2^n * den >= num
    Int power = den_;
    while (power < num_) {
      power = checked_mul(power, 2);
      ++n;
    }
    if (n == 0) {
      // value <= 1: find the largest n <= 0 with 2^n >= value
      Int scaled = num_;
      while (checked_mul(scaled, 2) <= den_) {
        scaled *= 2;
        --n;
      }
    }
    return n;
  }

  std::uint64_t to_uint64_checked(std::string_view what) const {
    if (!is_integer()) throw EvaluationError(std::string(what) + " is not integral");
    if (num_ < 0) throw EvaluationError(std::string(what) + " is negative");
    if (num_ > static_cast<Int>(std::numeric_limits<std::uint64_t>::max())) {
      throw EvaluationError(std::string(what) + " overflows 64 bits");
    }
    return static_cast<std::uint64_t>(num_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(checked_add(checked_mul(a.num_, b.den_), checked_mul(b.num_, a.den_)),
                    checked_mul(a.den_, b.den_));
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(checked_add(checked_mul(a.num_, b.den_), -checked_mul(b.num_, a.den_)),
                    checked_mul(a.den_, b.den_));
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    Int g1 = gcd(a.num_, b.den_);
    Int g2 = gcd(b.num_, a.den_);
    if (g1 == 0) g1 = 1;
    if (g2 == 0) g2 = 1;
    return Rational(checked_mul(a.num_ / g1, b.num_ / g2), checked_mul(a.den_ / g2, b.den_ / g1));
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw EvaluationError("division by zero");
    return a * Rational(b.den_, b.num_);
  }
  Rational operator-() const { return Rational(-num_, den_); }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return checked_mul(a.num_, b.den_) < checked_mul(b.num_, a.den_);
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  std::string to_string() const {
    std::string s = int_to_string(num_);
    if (den_ != 1) s += "/" + int_to_string(den_);
    return s;
  }
  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

  static std::string int_to_string(Int v) {
    if (v == 0) return "0";
    bool negative = v < 0;
    std::string digits;
    while (v != 0) {
      int d = static_cast<int>(v % 10);
      digits.insert(digits.begin(), static_cast<char>('0' + (d < 0 ? -d : d)));
      v /= 10;
    }
    return negative ? "-" + digits : digits;
  }

 private:
  static Int abs(Int v) { return v < 0 ? -v : v; }
  static Int gcd(Int a, Int b) {
    a = abs(a);
    b = abs(b);
    while (b != 0) {
      Int t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
  static Int checked_mul(Int a, Int b) {
    Int out;
    if (__builtin_mul_overflow(a, b, &out)) throw EvaluationError("arithmetic overflow");
    return out;
  }
  static Int checked_add(Int a, Int b) {
    Int out;
    if (__builtin_add_overflow(a, b, &out)) throw EvaluationError("arithmetic overflow");
    return out;
  }
  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    Int g = gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  Int num_ = 0;
  Int den_ = 1;
};

inline Rational ceil(const Rational& r) { return Rational(r.ceil(), 1); }
inline Rational floor(const Rational& r) { return Rational(r.floor(), 1); }
inline Rational ceil_log2(const Rational& r) { return Rational(r.ceil_log2(), 1); }
inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace commprof
