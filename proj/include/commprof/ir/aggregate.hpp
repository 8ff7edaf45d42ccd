#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "commprof/cost/types.hpp"
#include "commprof/ir/block_tree.hpp"

namespace commprof {

/// Insertion-ordered label -> cost mapping.
class CostMap {
 public:
  using Entry = std::pair<std::string, CostTuple>;

  CostTuple& operator[](const std::string& label) {
    auto it = index_.find(label);
    if (it != index_.end()) return entries_[it->second].second;
    index_.emplace(label, entries_.size());
    entries_.emplace_back(label, CostTuple{});
    return entries_.back().second;
  }

  const CostTuple* find(const std::string& label) const {
    auto it = index_.find(label);
    return it == index_.end() ? nullptr : &entries_[it->second].second;
  }

  bool contains(const std::string& label) const { return index_.count(label) != 0; }

  void merge(const CostMap& other, std::uint64_t factor = 1) {
    for (const auto& [label, cost] : other.entries_) (*this)[label] += cost.scaled(factor);
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const CostMap& a, const CostMap& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

using InstructionCost = std::function<CostTuple(const Instruction&)>;

/// Block-tree analysis. A node adds the cost of each communicating
/// instruction to its block's label, then recurses; a loop node aggregates
/// its children separately and merges them scaled by its factor.
inline void aggregate_into(const ReqNode& node, const InstructionCost& cost, CostMap& out);

inline void aggregate_into(const ReqChild& loop, const InstructionCost& cost, CostMap& out) {
  CostMap inner;
  for (const auto& child : loop.children()) aggregate_into(*child, cost, inner);
  out.merge(inner, loop.factor());
}

inline void aggregate_into(const ReqNode& node, const InstructionCost& cost, CostMap& out) {
  for (const auto& block : node.blocks()) {
    for (const auto& ins : block.instructions) {
      if (!ins.requires_communication) continue;
      out[block.label] += cost(ins);
    }
  }
  for (const auto& child : node.children()) {
    if (const auto* sub = std::get_if<std::shared_ptr<ReqNode>>(&child)) {
      aggregate_into(**sub, cost, out);
    } else {
      aggregate_into(*std::get<std::shared_ptr<ReqChild>>(child), cost, out);
    }
  }
}

inline CostMap aggregate_tree(const ReqNode& root, const InstructionCost& cost) {
  CostMap out;
  aggregate_into(root, cost, out);
  return out;
}

}  // namespace commprof
