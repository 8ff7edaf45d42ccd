#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "commprof/commprof.hpp"

namespace commprof::testing {

inline const FrameworkRegistry& builtins() {
  static const FrameworkRegistry reg = builtin_registry();
  return reg;
}

inline SecurityParams params_for(std::string_view fw) {
  SecurityParams p;
  p.m = builtins().at(fw).parties().default_m;
  return p;
}

inline ProfileReport profile(const Program& prog, std::string_view fw, const LoweringOptions& opt = {}) {
  return aggregate(prog, builtins(), fw, params_for(fw), opt);
}

template <class Body>
ProfileReport profile_body(std::string_view fw, Body&& body, const LoweringOptions& opt = {}) {
  return profile(compile(body), fw, opt);
}

// Cost of one instruction evaluated straight from the framework formula.
inline CostTuple formula(std::string_view fw, const char* op, const OpExtras& e) {
  return builtins().at(fw).evaluate(op, params_for(fw), e);
}

inline CostTuple formula(std::string_view fw, const char* op, std::uint64_t n) {
  return formula(fw, op, OpExtras::elementwise(n));
}

// Element count of emitted instructions named `op`, per label, loops scaled.
inline CostMap count_op(const Program& prog, std::string_view op) {
  return aggregate_tree(*prog.root, [op](const Instruction& ins) {
    return ins.op == op ? CostTuple{ins.extras.size, 1, 0, 0} : CostTuple{};
  });
}

inline std::uint64_t total_elements(const Program& prog, std::string_view op) {
  std::uint64_t n = 0;
  for (const auto& [_, c] : count_op(prog, op)) n += c.online_bits;
  return n;
}

}  // namespace commprof::testing
