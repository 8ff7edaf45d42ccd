#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "commprof/core/error.hpp"
#include "commprof/cost/types.hpp"

namespace commprof {

/// One basic or complicated operation, as emitted by the front end.
struct Instruction {
  std::string op;
  OpExtras extras;
  bool requires_communication = true;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Rejects instructions whose extras cannot be evaluated by any formula.
inline void validate_instruction(const Instruction& ins) {
  if (ins.op.empty()) throw ValidationError("instruction without an op name");
  if (ins.op == "matmuls" && ins.extras.size > 0 && (ins.extras.p == 0 || ins.extras.q == 0 || ins.extras.r == 0)) {
    throw ValidationError("matmuls needs positive p, q and r");
  }
  if (ins.op == "conv2d" && !ins.extras.conv) throw ValidationError("conv2d needs convolution geometry");
}

/// Straight-line instruction list under one label.
struct Block {
  std::string label;
  std::vector<Instruction> instructions;
};

class ReqNode;

/// Control-flow node: its children's costs are scaled by `factor`.
class ReqChild {
 public:
  explicit ReqChild(std::uint64_t factor) : factor_(factor) {}

  std::uint64_t factor() const { return factor_; }
  const std::vector<std::shared_ptr<ReqNode>>& children() const { return children_; }
  ReqNode& add_child();

 private:
  std::uint64_t factor_;
  std::vector<std::shared_ptr<ReqNode>> children_;
};

/// Holder of instruction blocks plus nested nodes.
class ReqNode {
 public:
  using Child = std::variant<std::shared_ptr<ReqNode>, std::shared_ptr<ReqChild>>;

  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Child>& children() const { return children_; }

  void add_block(Block block) { blocks_.push_back(std::move(block)); }

  ReqNode& add_node() {
    auto node = std::make_shared<ReqNode>();
    children_.emplace_back(node);
    return *node;
  }

  ReqChild& add_loop(std::uint64_t factor) {
    auto loop = std::make_shared<ReqChild>(factor);
    children_.emplace_back(loop);
    return *loop;
  }

  bool empty() const { return blocks_.empty() && children_.empty(); }

  std::size_t instruction_count() const;

 private:
  std::vector<Block> blocks_;
  std::vector<Child> children_;
};

inline ReqNode& ReqChild::add_child() {
  children_.push_back(std::make_shared<ReqNode>());
  return *children_.back();
}

inline std::size_t ReqNode::instruction_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.instructions.size();
  for (const auto& c : children_) {
    if (const auto* node = std::get_if<std::shared_ptr<ReqNode>>(&c)) {
      n += (*node)->instruction_count();
    } else {
      for (const auto& sub : std::get<std::shared_ptr<ReqChild>>(c)->children()) n += sub->instruction_count();
    }
  }
  return n;
}

namespace detail {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 1099511628211ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ULL;
};

inline void hash_extras(Fnv1a& h, const OpExtras& e) {
  for (auto v : {e.size, e.p, e.q, e.r, static_cast<std::uint64_t>(e.knownmsb)}) h.u64(v);
  h.u64(e.conv.has_value());
  if (e.conv) {
    const auto& c = *e.conv;
    for (auto v : {c.batch, c.in_channel, c.out_channel, c.inw, c.inh, c.outw, c.outh, c.kw, c.kh, c.groups}) h.u64(v);
  }
}

inline void hash_node(Fnv1a& h, const ReqNode& node) {
  h.u64(node.blocks().size());
  for (const auto& b : node.blocks()) {
    h.str(b.label);
    h.u64(b.instructions.size());
    for (const auto& ins : b.instructions) {
      h.str(ins.op);
      h.u64(ins.requires_communication);
      hash_extras(h, ins.extras);
    }
  }
  h.u64(node.children().size());
  for (const auto& c : node.children()) {
    if (const auto* sub = std::get_if<std::shared_ptr<ReqNode>>(&c)) {
      h.u64(1);
      hash_node(h, **sub);
    } else {
      const auto& loop = *std::get<std::shared_ptr<ReqChild>>(c);
      h.u64(2);
      h.u64(loop.factor());
      h.u64(loop.children().size());
      for (const auto& n : loop.children()) hash_node(h, *n);
    }
  }
}

}  // namespace detail

/// Hash of labels, ops, extras and loop structure. Two trees with the same
/// fingerprint cost the same under every framework.
inline std::uint64_t structural_fingerprint(const ReqNode& node) {
  detail::Fnv1a h;
  detail::hash_node(h, node);
  return h.value();
}

}  // namespace commprof
