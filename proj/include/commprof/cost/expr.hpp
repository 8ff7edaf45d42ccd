#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "commprof/core/error.hpp"
#include "commprof/core/rational.hpp"
#include "commprof/cost/matmul_partition.hpp"
#include "commprof/cost/types.hpp"

namespace commprof {

// Identifiers a cost expression may reference.
enum class Param {
  k, kappa_s, kappa, f, m,
  size, p, q, r, deg, knownmsb,
  batch, in_channel, out_channel, inw, inh, outw, outh, kw, kh,
  lp, bp,
};

inline constexpr std::array<std::pair<std::string_view, Param>, 22> kParamNames = {{
    {"k", Param::k},           {"kappa_s", Param::kappa_s},
    {"kappa", Param::kappa},   {"f", Param::f},
    {"m", Param::m},           {"size", Param::size},
    {"p", Param::p},           {"q", Param::q},
    {"r", Param::r},           {"deg", Param::deg},
    {"knownmsb", Param::knownmsb}, {"batch", Param::batch},
    {"in_channel", Param::in_channel}, {"out_channel", Param::out_channel},
    {"inw", Param::inw},       {"inh", Param::inh},
    {"outw", Param::outw},     {"outh", Param::outh},
    {"kw", Param::kw},         {"kh", Param::kh},
    {"lp", Param::lp},         {"bp", Param::bp},
}};

inline std::optional<Param> param_from_name(std::string_view name) {
  for (const auto& [n, p] : kParamNames) {
    if (n == name) return p;
  }
  return std::nullopt;
}

inline std::string_view param_name(Param param) {
  for (const auto& [n, p] : kParamNames) {
    if (p == param) return n;
  }
  return "?";
}

inline Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw EvaluationError("non-finite price");
  int exponent = 0;
  double mantissa = std::frexp(value, &exponent);
  // mantissa * 2^53 is an exact integer
  auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational out(scaled);
  const Rational two(2);
  for (; exponent > 0; --exponent) out = out * two;
  for (; exponent < 0; ++exponent) out = out / two;
  return out;
}

/// Values visible to an expression during evaluation.
class EvalEnv {
 public:
  EvalEnv(const SecurityParams& params, const OpExtras& extras) : params_(params), extras_(extras) {}

  std::optional<Rational> lookup(Param param) const {
    const auto u = [](std::uint64_t v) { return Rational::from_uint(v); };
    const auto& c = extras_.conv;
    switch (param) {
      case Param::k: return u(params_.k);
      case Param::kappa_s: return u(params_.kappa_s);
      case Param::kappa: return u(params_.kappa);
      case Param::f: return u(params_.f);
      case Param::m: return u(params_.m);
      case Param::size: return u(extras_.size);
      case Param::p: return u(extras_.p);
      case Param::q: return u(extras_.q);
      case Param::r: return u(extras_.r);
      case Param::deg: return u(extras_.he.deg);
      case Param::knownmsb: return u(extras_.knownmsb ? 1 : 0);
      case Param::lp: return rational_from_double(extras_.he.lp);
      case Param::bp: return rational_from_double(extras_.he.bp);
      case Param::batch: return c ? std::optional(u(c->batch)) : std::nullopt;
      case Param::in_channel: return c ? std::optional(u(c->in_channel)) : std::nullopt;
      case Param::out_channel: return c ? std::optional(u(c->out_channel)) : std::nullopt;
      case Param::inw: return c ? std::optional(u(c->inw)) : std::nullopt;
      case Param::inh: return c ? std::optional(u(c->inh)) : std::nullopt;
      case Param::outw: return c ? std::optional(u(c->outw)) : std::nullopt;
      case Param::outh: return c ? std::optional(u(c->outh)) : std::nullopt;
      case Param::kw: return c ? std::optional(u(c->kw)) : std::nullopt;
      case Param::kh: return c ? std::optional(u(c->kh)) : std::nullopt;
    }
    return std::nullopt;
  }

  Rational get(Param param) const {
    auto v = lookup(param);
    if (!v) throw ValidationError("missing extra parameter '" + std::string(param_name(param)) + "'");
    return *v;
  }

  const std::vector<std::uint64_t>& mod() const { return extras_.he.mod; }

 private:
  const SecurityParams& params_;
  const OpExtras& extras_;
};

/// Sum of the modulus chain over a Python-style slice [start:end].
inline Rational slice_sum(const std::vector<std::uint64_t>& mod, std::int64_t start, std::int64_t end) {
  const auto n = static_cast<std::int64_t>(mod.size());
  if (n == 0) throw ValidationError("HE modulus chain is empty");
  auto clamp = [n](std::int64_t i) {
    if (i < 0) i += n;
    if (i < 0) i = 0;
    if (i > n) i = n;
    return i;
  };
  std::uint64_t total = 0;
  for (std::int64_t i = clamp(start); i < clamp(end); ++i) total += mod[static_cast<std::size_t>(i)];
  return Rational::from_uint(total);
}

enum class Builtin { ceil, floor, log2, min, max, if_, slice_sum, cheetah_send_ct, cheetah_recv_ct, semi2k_mmul_size };

struct BuiltinInfo {
  std::string_view name;
  Builtin fn;
  std::size_t min_args;
  std::size_t max_args;
};

inline constexpr std::array<BuiltinInfo, 10> kBuiltins = {{
    {"ceil", Builtin::ceil, 1, 1},
    {"floor", Builtin::floor, 1, 1},
    {"log2", Builtin::log2, 1, 1},
    {"min", Builtin::min, 2, 64},
    {"max", Builtin::max, 2, 64},
    {"if", Builtin::if_, 3, 3},
    {"slice_sum", Builtin::slice_sum, 1, 3},
    {"cheetah_send_ct", Builtin::cheetah_send_ct, 6, 6},
    {"cheetah_recv_ct", Builtin::cheetah_recv_ct, 6, 6},
    {"semi2k_mmul_size", Builtin::semi2k_mmul_size, 4, 4},
}};

/// Parsed cost expression.
class Expr {
 public:
  enum class Kind { number, param, mod, neg, add, sub, mul, div, call };

  static Expr parse(std::string_view text);

  Rational eval(const EvalEnv& env) const;

  // Parameters referenced anywhere in the expression.
  std::set<Param> params() const {
    std::set<Param> out;
    collect(out);
    return out;
  }

  bool references(Param p) const { return params().count(p) != 0; }

  Kind kind() const { return kind_; }

 private:
  friend class ExprParser;

  void collect(std::set<Param>& out) const {
    if (kind_ == Kind::param) out.insert(param_);
    for (const auto& c : children_) c.collect(out);
  }

  std::uint64_t eval_uint(const Expr& e, const EvalEnv& env, std::string_view what) const {
    Rational v = e.eval(env);
    if (v.is_negative()) throw EvaluationError(std::string(what) + " must be non-negative");
    return Rational(v.ceil(), 1).to_uint64_checked(what);
  }

  Kind kind_ = Kind::number;
  Rational value_;
  Param param_ = Param::k;
  Builtin fn_ = Builtin::ceil;
  std::vector<Expr> children_;
};

// expr  := term (("+"|"-") term)*
// term  := unary (("*"|"/") unary)*
// unary := ["-"] atom
// atom  := number | ident | fn "(" expr {"," expr} ")" | "(" expr ")"
class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' but reached end", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  static Expr binary(Expr::Kind kind, Expr lhs, Expr rhs) {
    Expr e;
    e.kind_ = kind;
    e.children_.push_back(std::move(lhs));
    e.children_.push_back(std::move(rhs));
    return e;
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Expr::Kind::add, std::move(lhs), term());
      } else if (accept('-')) {
        lhs = binary(Expr::Kind::sub, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Expr::Kind::mul, std::move(lhs), unary());
      } else if (accept('/')) {
        lhs = binary(Expr::Kind::div, std::move(lhs), unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) {
      Expr e;
      e.kind_ = Expr::Kind::neg;
      e.children_.push_back(atom());
      return e;
    }
    return atom();
  }

  Expr atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    Expr e;
    e.kind_ = Expr::Kind::number;
    try {
      e.value_ = Rational::parse_decimal(text_.substr(start, pos_ - start));
    } catch (const ValidationError& err) {
      throw ParseError(err.what(), start);
    }
    return e;
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      const BuiltinInfo* info = nullptr;
      for (const auto& b : kBuiltins) {
        if (b.name == name) info = &b;
      }
      if (info == nullptr) throw ParseError("unknown function '" + std::string(name) + "'", start);
      ++pos_;
      Expr e;
      e.kind_ = Expr::Kind::call;
      e.fn_ = info->fn;
      if (info->fn == Builtin::slice_sum) {
        skip_ws();
        const std::size_t arg_pos = pos_;
        Expr target = accept_ident_token();
        if (target.kind_ != Expr::Kind::mod) throw ParseError("slice_sum expects 'mod' as its first argument", arg_pos);
        e.children_.push_back(std::move(target));
        while (accept(',')) e.children_.push_back(expr());
      } else if (!accept(')')) {
        e.children_.push_back(expr());
        while (accept(',')) e.children_.push_back(expr());
      } else {
        --pos_;  // let the arity check below report the empty call
      }
      expect(')');
      const std::size_t n = e.children_.size();
      if (n < info->min_args || n > info->max_args || (info->fn == Builtin::slice_sum && n == 2)) {
        throw ParseError("wrong number of arguments to '" + std::string(name) + "'", start);
      }
      return e;
    }

    if (name == "mod") throw ParseError("'mod' may only appear inside slice_sum", start);
    auto param = param_from_name(name);
    if (!param) throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    Expr e;
    e.kind_ = Expr::Kind::param;
    e.param_ = *param;
    return e;
  }

  Expr accept_ident_token() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    Expr e;
    if (text_.substr(start, pos_ - start) == "mod") {
      e.kind_ = Expr::Kind::mod;
    } else {
      pos_ = start;
      e.kind_ = Expr::Kind::number;
    }
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline Expr Expr::parse(std::string_view text) { return ExprParser(text).parse(); }

inline Rational Expr::eval(const EvalEnv& env) const {
  switch (kind_) {
    case Kind::number: return value_;
    case Kind::param: return env.get(param_);
    case Kind::mod: throw EvaluationError("'mod' used outside slice_sum");
    case Kind::neg: return -children_[0].eval(env);
    case Kind::add: return children_[0].eval(env) + children_[1].eval(env);
    case Kind::sub: return children_[0].eval(env) - children_[1].eval(env);
    case Kind::mul: return children_[0].eval(env) * children_[1].eval(env);
    case Kind::div: return children_[0].eval(env) / children_[1].eval(env);
    case Kind::call: break;
  }
  switch (fn_) {
    case Builtin::ceil: return commprof::ceil(children_[0].eval(env));
    case Builtin::floor: return commprof::floor(children_[0].eval(env));
    case Builtin::log2: return commprof::ceil_log2(children_[0].eval(env));
    case Builtin::min: {
      Rational v = children_[0].eval(env);
      for (std::size_t i = 1; i < children_.size(); ++i) v = commprof::min(v, children_[i].eval(env));
      return v;
    }
    case Builtin::max: {
      Rational v = children_[0].eval(env);
      for (std::size_t i = 1; i < children_.size(); ++i) v = commprof::max(v, children_[i].eval(env));
      return v;
    }
    case Builtin::if_:
      return children_[0].eval(env).is_zero() ? children_[2].eval(env) : children_[1].eval(env);
    case Builtin::slice_sum: {
      const auto& mod = env.mod();
      if (children_.size() == 1) return slice_sum(mod, 0, static_cast<std::int64_t>(mod.size()));
      auto bound = [&](const Expr& e) {
        Rational v = e.eval(env);
        if (!v.is_integer()) throw EvaluationError("slice_sum bounds must be integers");
        return static_cast<std::int64_t>(v.numerator());
      };
      return slice_sum(mod, bound(children_[1]), bound(children_[2]));
    }
    case Builtin::cheetah_send_ct:
    case Builtin::cheetah_recv_ct: {
      auto counts = cheetah_matmul_ct_count(eval_uint(children_[0], env, "p"), eval_uint(children_[1], env, "q"),
                                            eval_uint(children_[2], env, "r"), eval_uint(children_[3], env, "deg"),
                                            children_[4].eval(env).to_double(), children_[5].eval(env).to_double());
      return Rational::from_uint(fn_ == Builtin::cheetah_send_ct ? counts.send : counts.response);
    }
    case Builtin::semi2k_mmul_size:
      return Rational::from_uint(semi2k_matmul_msg_count(eval_uint(children_[0], env, "p"),
                                                         eval_uint(children_[1], env, "q"),
                                                         eval_uint(children_[2], env, "r"),
                                                         eval_uint(children_[3], env, "k")));
  }
  throw EvaluationError("unhandled expression node");
}

}  // namespace commprof
