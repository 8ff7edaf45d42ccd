#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "commprof/core/error.hpp"
#include "commprof/core/rational.hpp"
#include "commprof/cost/expr.hpp"
#include "commprof/cost/types.hpp"

namespace commprof {

/// Unrounded formula output, one exact value per cost component.
struct RawCost {
  Rational online_bits;
  Rational online_rounds;
  Rational offline_bits;
  Rational offline_rounds;
};

/// Cost of one basic operation.
///
/// A formula that never mentions `size` describes a single instance; its bit
/// components are multiplied by the instruction's `size` before rounding and
/// its rounds are left as is (parallel instances share rounds). A formula
/// that mentions `size` is taken verbatim. Every component is rounded up to
/// an integer at the end, and `size == 0` always costs nothing.
class CostFormula {
 public:
  using Native = std::function<RawCost(const EvalEnv&)>;

  static CostFormula from_text(std::array<std::string, 4> text) {
    CostFormula f;
    for (std::size_t i = 0; i < 4; ++i) {
      f.exprs_.push_back(Expr::parse(text[i]));
      if (f.exprs_.back().references(Param::size)) f.per_instance_ = false;
    }
    f.text_ = std::move(text);
    return f;
  }

  // per_instance: the native code describes one instance and must be scaled by size.
  static CostFormula native(Native fn, bool per_instance) {
    CostFormula f;
    f.native_ = std::move(fn);
    f.per_instance_ = per_instance;
    return f;
  }

  bool scales_with_size() const { return per_instance_; }
  bool is_native() const { return static_cast<bool>(native_); }
  const std::optional<std::array<std::string, 4>>& text() const { return text_; }

  RawCost evaluate_raw(const EvalEnv& env) const {
    if (native_) return native_(env);
    return {exprs_[0].eval(env), exprs_[1].eval(env), exprs_[2].eval(env), exprs_[3].eval(env)};
  }

  CostTuple evaluate(const SecurityParams& params, const OpExtras& extras, std::string_view op) const {
    if (extras.size == 0) return {};
    EvalEnv env(params, extras);
    RawCost raw = evaluate_raw(env);
    if (per_instance_) {
      const Rational n = Rational::from_uint(extras.size);
      raw.online_bits = raw.online_bits * n;
      raw.offline_bits = raw.offline_bits * n;
    }
    auto finish = [&](const Rational& v, std::string_view component) {
      if (v.is_negative()) {
        throw EvaluationError("cost formula for '" + std::string(op) + "' produced negative " +
                              std::string(component) + " (" + v.to_string() + ")");
      }
      return Rational(v.ceil(), 1).to_uint64_checked(std::string(op) + " " + std::string(component));
    };
    return {finish(raw.online_bits, "online bits"), finish(raw.online_rounds, "online rounds"),
            finish(raw.offline_bits, "offline bits"), finish(raw.offline_rounds, "offline rounds")};
  }

 private:
  CostFormula() = default;

  std::vector<Expr> exprs_;
  Native native_;
  bool per_instance_ = true;
  std::optional<std::array<std::string, 4>> text_;
};

/// Admissible party counts; max == 0 means unbounded.
struct PartyRule {
  std::uint64_t default_m = 2;
  std::uint64_t min_m = 2;
  std::uint64_t max_m = 0;

  bool admits(std::uint64_t m) const { return m >= min_m && (max_m == 0 || m <= max_m); }
};

/// Parameter constraint; `value` must evaluate to a non-negative number.
struct Constraint {
  std::string description;
  std::function<Rational(const EvalEnv&)> value;
  std::optional<std::string> text;  // set when parsed from a config file
};

/// One framework: its name, party rule, constraints and per-op formulas.
class FrameworkConfig {
 public:
  FrameworkConfig() = default;
  explicit FrameworkConfig(std::string name, PartyRule parties = {}) : name_(std::move(name)), parties_(parties) {}

  const std::string& name() const { return name_; }
  const PartyRule& parties() const { return parties_; }
  void set_parties(PartyRule rule) { parties_ = rule; }

  FrameworkConfig& add(std::string op, CostFormula formula) {
    auto it = std::find_if(ops_.begin(), ops_.end(), [&](const auto& e) { return e.first == op; });
    if (it != ops_.end()) {
      it->second = std::move(formula);
    } else {
      ops_.emplace_back(std::move(op), std::move(formula));
    }
    return *this;
  }

  FrameworkConfig& add_text(std::string op, std::array<std::string, 4> text) {
    return add(std::move(op), CostFormula::from_text(std::move(text)));
  }

  FrameworkConfig& add_constraint(Constraint c) {
    constraints_.push_back(std::move(c));
    return *this;
  }

  FrameworkConfig& add_text_constraint(const std::string& text) {
    auto expr = std::make_shared<Expr>(Expr::parse(text));
    constraints_.push_back({text + " >= 0", [expr](const EvalEnv& env) { return expr->eval(env); }, text});
    return *this;
  }

  bool declares(std::string_view op) const { return find(op) != nullptr; }

  const CostFormula* find(std::string_view op) const {
    for (const auto& [name, f] : ops_) {
      if (name == op) return &f;
    }
    return nullptr;
  }

  std::vector<std::string> declared_ops() const {
    std::vector<std::string> out;
    for (const auto& e : ops_) out.push_back(e.first);
    return out;
  }

  const std::vector<std::pair<std::string, CostFormula>>& ops() const { return ops_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  void validate_structure() const {
    if (name_.empty()) throw ValidationError("framework config has no name");
    for (const char* required : {"share", "reveal", "muls"}) {
      if (!declares(required)) {
        throw ValidationError("framework '" + name_ + "' is missing required op \"" + required + "\"");
      }
    }
    if (parties_.min_m < 2 || (parties_.max_m != 0 && parties_.max_m < parties_.min_m) ||
        !parties_.admits(parties_.default_m)) {
      throw ValidationError("framework '" + name_ + "' has an inconsistent party rule");
    }
  }

  void validate_params(const SecurityParams& params) const {
    params.validate();
    if (!parties_.admits(params.m)) {
      throw ValidationError("framework '" + name_ + "' does not support m=" + std::to_string(params.m) + " parties");
    }
    OpExtras none;
    EvalEnv env(params, none);
    for (const auto& c : constraints_) {
      if (c.value(env).is_negative()) {
        throw ValidationError("framework '" + name_ + "' requires " + c.description);
      }
    }
  }

  CostTuple evaluate(std::string_view op, const SecurityParams& params, const OpExtras& extras) const {
    const CostFormula* formula = find(op);
    if (formula == nullptr) {
      throw UnknownEntityError("framework '" + name_ + "' does not declare op \"" + std::string(op) + "\"");
    }
    validate_params(params);
    return formula->evaluate(params, extras, op);
  }

 private:
  std::string name_;
  PartyRule parties_;
  std::vector<Constraint> constraints_;
  std::vector<std::pair<std::string, CostFormula>> ops_;
};

namespace detail {
inline std::string normalize_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == '-' || c == '_' || c == ' ') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}
}  // namespace detail

/// Name -> framework mapping. Lookup ignores case, '-' and '_'.
/// Populate once, then share read-only.
class FrameworkRegistry {
 public:
  void register_framework(FrameworkConfig config, bool overwrite = false) {
    config.validate_structure();
    const std::string key = detail::normalize_name(config.name());
    auto it = index_.find(key);
    if (it != index_.end()) {
      if (!overwrite) throw ValidationError("framework '" + config.name() + "' is already registered");
      frameworks_[it->second] = std::make_shared<const FrameworkConfig>(std::move(config));
      return;
    }
    index_.emplace(key, frameworks_.size());
    frameworks_.push_back(std::make_shared<const FrameworkConfig>(std::move(config)));
  }

  void add_alias(std::string_view alias, std::string_view target) {
    const FrameworkConfig& fw = at(target);
    index_[detail::normalize_name(alias)] = index_.at(detail::normalize_name(fw.name()));
  }

  const FrameworkConfig* find(std::string_view name) const {
    auto it = index_.find(detail::normalize_name(name));
    return it == index_.end() ? nullptr : frameworks_[it->second].get();
  }

  const FrameworkConfig& at(std::string_view name) const {
    const FrameworkConfig* fw = find(name);
    if (fw == nullptr) throw UnknownEntityError("unknown framework '" + std::string(name) + "'");
    return *fw;
  }

  std::shared_ptr<const FrameworkConfig> shared(std::string_view name) const {
    at(name);
    return frameworks_[index_.at(detail::normalize_name(name))];
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& fw : frameworks_) out.push_back(fw->name());
    return out;
  }

  std::set<std::string> declared_ops(std::string_view framework) const {
    auto ops = at(framework).declared_ops();
    return {ops.begin(), ops.end()};
  }

 private:
  std::vector<std::shared_ptr<const FrameworkConfig>> frameworks_;
  std::map<std::string, std::size_t> index_;
};

inline CostTuple evaluate_cost(const FrameworkRegistry& registry, std::string_view framework, std::string_view op,
                               const SecurityParams& params, const OpExtras& extras = {}) {
  return registry.at(framework).evaluate(op, params, extras);
}

}  // namespace commprof
