#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "commprof/core/error.hpp"
#include "commprof/cost/framework.hpp"
#include "commprof/ir/aggregate.hpp"
#include "commprof/ir/block_tree.hpp"
#include "commprof/ir/context.hpp"
#include "commprof/ir/report.hpp"

namespace commprof {

/// Iteration counts of the default compositions for complicated ops.
struct RecipeKnobs {
  std::uint64_t exp_iterations = 8;         // squarings of (1 + x/2^n)
  std::uint64_t reciprocal_iterations = 10; // Newton steps, 2 fp_mul each, after one LTZ
  std::uint64_t inv_sqrt_iterations = 3;    // Newton steps, 3 fp_mul each

  friend bool operator==(const RecipeKnobs&, const RecipeKnobs&) = default;
};

struct LoweringOptions {
  RecipeKnobs recipes;
  HeParams he;
  // Grouped convolutions as one instruction per group instead of one batched one.
  bool sequential_groups = false;
};

/// How one instruction is realized on a framework.
struct LoweringPlan {
  enum class Kind { direct, composite };

  std::string op;
  Kind kind = Kind::direct;
  std::vector<Instruction> steps;  // basic instructions the framework declares
};

/// Complicated ops and the framework op names that implement them directly.
inline const std::map<std::string, std::vector<std::string>, std::less<>>& complicated_op_aliases() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> aliases = {
      {"exp", {"exp", "exp_fx"}},
      {"reciprocal", {"reciprocal", "Reciprocal"}},
      {"inv_sqrt", {"inv_sqrt", "InvSqrt"}},
      {"div", {"div", "Div"}},
  };
  return aliases;
}

inline bool is_complicated_op(std::string_view op) { return complicated_op_aliases().count(op) != 0; }

namespace detail {

inline Instruction step(std::string op, std::uint64_t size, bool knownmsb = false) {
  Instruction ins;
  ins.op = std::move(op);
  ins.extras.size = size;
  ins.extras.knownmsb = knownmsb;
  return ins;
}

inline void fp_mul_steps(std::vector<Instruction>& out, std::uint64_t n, std::uint64_t times) {
  for (std::uint64_t i = 0; i < times; ++i) {
    out.push_back(step("muls", n));
    out.push_back(step("TruncPr", n));
  }
}

}  // namespace detail

class Lowerer {
 public:
  Lowerer(const FrameworkConfig& framework, LoweringOptions options = {})
      : fw_(framework), options_(std::move(options)) {}

  const FrameworkConfig& framework() const { return fw_; }
  const LoweringOptions& options() const { return options_; }

  LoweringPlan plan(const Instruction& ins, int depth = 0) const {
    if (depth > 8) throw CompileError("lowering of '" + ins.op + "' does not terminate");
    LoweringPlan plan{ins.op, LoweringPlan::Kind::direct, {}};

    auto direct = [&](const std::string& name) {
      Instruction d = ins;
      d.op = name;
      plan.steps.push_back(std::move(d));
      return plan;
    };
    auto composite = [&](const std::vector<Instruction>& parts) {
      plan.kind = LoweringPlan::Kind::composite;
      for (const auto& part : parts) {
        auto sub = this->plan(part, depth + 1);
        plan.steps.insert(plan.steps.end(), sub.steps.begin(), sub.steps.end());
      }
      return plan;
    };

    if (auto it = complicated_op_aliases().find(ins.op); it != complicated_op_aliases().end()) {
      for (const auto& name : it->second) {
        if (fw_.declares(name)) return direct(name);
      }
      const std::uint64_t n = ins.extras.size;
      const RecipeKnobs& k = options_.recipes;
      std::vector<Instruction> parts;
      if (ins.op == "exp") {
        detail::fp_mul_steps(parts, n, k.exp_iterations);
      } else if (ins.op == "reciprocal") {
        parts.push_back(detail::step("LTZ", n));
        detail::fp_mul_steps(parts, n, 2 * k.reciprocal_iterations);
      } else if (ins.op == "inv_sqrt") {
        detail::fp_mul_steps(parts, n, 3 * k.inv_sqrt_iterations);
      } else {  // div
        parts.push_back(detail::step("reciprocal", n));
        detail::fp_mul_steps(parts, n, 1);
      }
      return composite(parts);
    }

    if (fw_.declares(ins.op)) return direct(ins.op);

    if (ins.op == "matmuls") {
      const std::uint64_t n = ins.extras.p * ins.extras.q * ins.extras.r * ins.extras.size;
      return composite({detail::step("muls", n)});
    }
    if (ins.op == "conv2d") {
      if (!ins.extras.conv) throw ValidationError("conv2d needs convolution geometry");
      const ConvGeometry& c = *ins.extras.conv;
      if (c.groups == 0 || c.in_channel % c.groups != 0 || c.out_channel % c.groups != 0) {
        throw ValidationError("conv2d channels must be divisible by groups");
      }
      Instruction mm;
      mm.op = "matmuls";
      mm.extras.p = c.batch * c.outh * c.outw;
      mm.extras.q = (c.in_channel / c.groups) * c.kh * c.kw;
      mm.extras.r = c.out_channel / c.groups;
      if (options_.sequential_groups) {
        mm.extras.size = ins.extras.size;
        return composite(std::vector<Instruction>(c.groups, mm));
      }
      mm.extras.size = c.groups * ins.extras.size;
      return composite({mm});
    }
    throw UnknownEntityError("framework '" + fw_.name() + "' cannot realize op \"" + ins.op + "\"");
  }

  CostTuple cost(const Instruction& ins) const {
    if (ins.extras.size == 0) return {};
    auto key = cache_key(ins);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    CostTuple total;
    for (const auto& s : plan(ins).steps) {
      OpExtras e = s.extras;
      e.he = options_.he;
      total += fw_.find(s.op)->evaluate(params_, e, s.op);
    }
    cache_.emplace(std::move(key), total);
    return total;
  }

  // Parameters are validated once here instead of on every instruction.
  void bind(const SecurityParams& params) {
    fw_.validate_params(params);
    options_.he.validate();
    params_ = params;
    cache_.clear();
  }

 private:
  static std::string cache_key(const Instruction& ins) {
    std::string key = ins.op;
    auto add = [&](std::uint64_t v) {
      key.push_back('|');
      key += std::to_string(v);
    };
    for (auto v : {ins.extras.size, ins.extras.p, ins.extras.q, ins.extras.r,
                   static_cast<std::uint64_t>(ins.extras.knownmsb)}) {
      add(v);
    }
    if (ins.extras.conv) {
      const auto& c = *ins.extras.conv;
      for (auto v : {c.batch, c.in_channel, c.out_channel, c.inw, c.inh, c.outw, c.outh, c.kw, c.kh, c.groups}) add(v);
    }
    return key;
  }

  const FrameworkConfig& fw_;
  LoweringOptions options_;
  SecurityParams params_;
  mutable std::unordered_map<std::string, CostTuple> cache_;
};

inline LoweringPlan resolve_complicated(const FrameworkConfig& fw, std::string_view op, std::uint64_t n = 1,
                                        const LoweringOptions& options = {}) {
  if (!is_complicated_op(op)) throw UnknownEntityError("'" + std::string(op) + "' is not a complicated op");
  Instruction ins;
  ins.op = std::string(op);
  ins.extras.size = n;
  return Lowerer(fw, options).plan(ins);
}

/// Runs the block-tree analysis of `program` under one framework.
inline ProfileReport aggregate(const Program& program, const FrameworkConfig& fw, const SecurityParams& params,
                               const LoweringOptions& options = {}) {
  Lowerer lowerer(fw, options);
  lowerer.bind(params);
  ProfileReport report;
  report.framework = fw.name();
  report.params = params;
  report.entries = aggregate_tree(*program.root, [&](const Instruction& ins) { return lowerer.cost(ins); });
  return report;
}

inline ProfileReport aggregate(const Program& program, const FrameworkRegistry& registry, std::string_view framework,
                               const SecurityParams& params, const LoweringOptions& options = {}) {
  return aggregate(program, registry.at(framework), params, options);
}

}  // namespace commprof
