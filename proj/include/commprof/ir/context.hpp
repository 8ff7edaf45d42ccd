#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <type_traits>
#include <typeindex>
#include <utility>
#include <vector>

#include "commprof/core/error.hpp"
#include "commprof/ir/block_tree.hpp"
#include "commprof/ir/label.hpp"

namespace commprof {

/// A compiled program: the root of its block tree.
struct Program {
  std::shared_ptr<const ReqNode> root = std::make_shared<ReqNode>();

  std::uint64_t fingerprint() const { return structural_fingerprint(*root); }
};

/// Per-thread compilation state: label stack, pending statements and the
/// node that receives flushed blocks.
class CompileContext {
 public:
  CompileContext() : root_(std::make_shared<ReqNode>()), node_(root_.get()) {}
  CompileContext(const CompileContext&) = delete;
  CompileContext& operator=(const CompileContext&) = delete;

  void emit(Instruction ins) {
    validate_instruction(ins);
    pending_.push_back(std::move(ins));
  }

  // Materializes pending statements as one block under the current label.
  void flush() {
    if (pending_.empty()) return;
    node_->add_block({labels_.current(), std::move(pending_)});
    pending_.clear();
  }

  void push_label(std::string segment) {
    flush();
    labels_.push(std::move(segment));
  }

  void pop_label() {
    flush();
    labels_.pop();
  }

  std::string current_label() const { return labels_.current(); }
  std::size_t label_depth() const { return labels_.depth(); }

  // When set, loop bodies are compiled a second time with the last index and
  // rejected if their structure differs from the first compilation.
  void set_probe_loops(bool probe) { probe_loops_ = probe; }
  bool probe_loops() const { return probe_loops_; }
  bool probing() const { return probe_depth_ > 0; }

  template <class Body>
  void loop(std::uint64_t n, Body&& body) {
    flush();
    ReqChild& req = node_->add_loop(n);
    ReqNode& child = req.add_child();
    const std::size_t depth = labels_.depth();
    run_in(child, [&] { body(std::uint64_t{0}); });
    if (labels_.depth() != depth) throw CompileError("unbalanced labels inside loop body");
    if (probe_loops_ && n > 1) {
      ReqNode scratch;
      ++probe_depth_;
      try {
        run_in(scratch, [&] { body(n - 1); });
      } catch (...) {
        --probe_depth_;
        throw;
      }
      --probe_depth_;
      if (structural_fingerprint(scratch) != structural_fingerprint(child)) {
        throw CompileError("loop body under '" + labels_.current() +
                           "' emits a different structure for different iterations");
      }
    }
  }

  /// State owned by higher layers (e.g. the autograd tape), one per context.
  template <class T>
  T& extension() {
    auto& slot = extensions_[std::type_index(typeid(T))];
    if (!slot) slot = std::make_shared<T>();
    return *std::static_pointer_cast<T>(slot);
  }

  Program finish() {
    flush();
    if (labels_.depth() != 1) throw CompileError("unbalanced labels at end of compilation");
    return Program{root_};
  }

 private:
  template <class Fn>
  void run_in(ReqNode& target, Fn&& fn) {
    ReqNode* saved = node_;
    node_ = &target;
    try {
      fn();
      flush();
    } catch (...) {
      pending_.clear();
      node_ = saved;
      throw;
    }
    node_ = saved;
  }

  std::shared_ptr<ReqNode> root_;
  ReqNode* node_;
  LabelStack labels_;
  std::vector<Instruction> pending_;
  bool probe_loops_ = true;
  int probe_depth_ = 0;
  std::map<std::type_index, std::shared_ptr<void>> extensions_;
};

namespace detail {
inline thread_local CompileContext* active_context = nullptr;
}

inline bool in_compilation() { return detail::active_context != nullptr; }

inline CompileContext& current_context() {
  if (detail::active_context == nullptr) throw CompileError("no active compilation context");
  return *detail::active_context;
}

/// Runs `body` with a fresh context active on this thread and returns the
/// resulting program. Nested calls compile independent programs.
template <class Body>
Program compile(Body&& body, bool probe_loops = true) {
  CompileContext ctx;
  ctx.set_probe_loops(probe_loops);
  CompileContext* outer = detail::active_context;
  detail::active_context = &ctx;
  struct Restore {
    CompileContext* outer;
    ~Restore() { detail::active_context = outer; }
  } restore{outer};
  body();
  return ctx.finish();
}

inline void emit(Instruction ins) { current_context().emit(std::move(ins)); }

inline void emit(std::string op, OpExtras extras) { emit(Instruction{std::move(op), std::move(extras), true}); }

/// RAII label scope; segments are validated by the caller.
class LabelScope {
 public:
  explicit LabelScope(std::string segment) : ctx_(current_context()) { ctx_.push_label(std::move(segment)); }
  LabelScope(const LabelScope&) = delete;
  LabelScope& operator=(const LabelScope&) = delete;
  ~LabelScope() noexcept(false) {
    if (std::uncaught_exceptions() > uncaught_) {
      try {
        ctx_.pop_label();
      } catch (...) {
      }
      return;
    }
    ctx_.pop_label();
  }

 private:
  CompileContext& ctx_;
  int uncaught_ = std::uncaught_exceptions();
};

/// Labels everything `body` emits with an extra segment.
template <class Body>
decltype(auto) with_label(std::string_view segment, Body&& body) {
  validate_segment(segment);
  LabelScope scope{std::string(segment)};
  return body();
}

/// Internal form used by operators: pushes "name-phase" (e.g. "exp-forward")
/// as one scope.
template <class Body>
decltype(auto) with_op_label(std::string_view name, std::string_view phase, Body&& body) {
  validate_segment(name);
  validate_segment(phase);
  LabelScope scope{std::string(name) + kLabelSeparator + std::string(phase)};
  return body();
}

/// Statically bounded loop. `body` receives the iteration index and must emit
/// the same structure for every index.
template <class Body>
void for_range(std::uint64_t n, Body&& body) {
  auto& ctx = current_context();
  if constexpr (std::is_invocable_v<Body&, std::uint64_t>) {
    ctx.loop(n, body);
  } else {
    ctx.loop(n, [&](std::uint64_t) { body(); });
  }
}

}  // namespace commprof
