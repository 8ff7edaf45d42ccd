#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "commprof/autograd/shape.hpp"
#include "commprof/core/error.hpp"
#include "commprof/ir/context.hpp"
#include "commprof/ops/secure_ops.hpp"

namespace commprof::autograd {

enum class Kind { secret, public_value };

inline Kind combine(Kind a, Kind b) { return (a == Kind::secret || b == Kind::secret) ? Kind::secret : Kind::public_value; }

/// Sigmoid-style GELU: fp_muls_before, then exp and reciprocal, then fp_muls_after.
struct GeluRecipe {
  std::uint64_t fp_muls_before = 2;
  std::uint64_t exps = 1;
  std::uint64_t reciprocals = 1;
  std::uint64_t fp_muls_after = 1;
  std::uint64_t backward_fp_muls = 3;
};

struct AutogradOptions {
  // Materialize the broadcast intermediate in backward instead of fusing the reduction.
  bool strawman_broadcast = false;
  GeluRecipe gelu;
};

class Tensor;

namespace detail {

struct Node;

struct TensorImpl {
  Shape shape;
  Kind kind = Kind::secret;
  bool requires_grad = false;
  bool nonnegative = false;  // known sign, lets truncations use knownmsb
  std::shared_ptr<Node> producer;
  std::shared_ptr<TensorImpl> grad;
};

struct Node {
  std::uint64_t seq = 0;
  std::string name;
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  std::weak_ptr<TensorImpl> output;
  std::function<void(const Tensor&)> backward;
  bool consumed = false;
};

}  // namespace detail

/// Operator record of one compilation. Nodes are appended in forward order
/// and replayed in reverse by backward().
class Tape {
 public:
  AutogradOptions options;

  std::uint64_t next_seq() { return seq_++; }
  std::uint64_t size() const { return seq_; }

 private:
  std::uint64_t seq_ = 0;
};

inline Tape& tape() { return current_context().extension<Tape>(); }
inline AutogradOptions& options() { return tape().options; }

/// Shape-carrying traced tensor. Holds no values; its operators emit the
/// instructions a secure execution would run.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

  static Tensor make(Shape shape, Kind kind, bool requires_grad = false) {
    validate_shape(shape);
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->kind = kind;
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
  }
  static Tensor secret(Shape shape, bool requires_grad = false) {
    return make(std::move(shape), Kind::secret, requires_grad);
  }
  static Tensor parameter(Shape shape) { return make(std::move(shape), Kind::secret, true); }
  static Tensor constant(Shape shape) { return make(std::move(shape), Kind::public_value); }

  bool defined() const { return static_cast<bool>(impl_); }
  const Shape& shape() const { return impl().shape; }
  std::size_t rank() const { return shape().size(); }
  std::uint64_t dim(std::int64_t axis) const { return shape()[normalize_axis(axis, rank())]; }
  std::uint64_t numel() const { return autograd::numel(shape()); }
  Kind kind() const { return impl().kind; }
  bool is_secret() const { return kind() == Kind::secret; }
  bool requires_grad() const { return impl().requires_grad; }
  bool is_leaf() const { return !impl().producer; }

  bool has_grad() const { return static_cast<bool>(impl().grad); }
  Tensor grad() const {
    if (!has_grad()) throw CompileError("tensor " + to_string(shape()) + " has no gradient");
    return Tensor(impl().grad);
  }
  void zero_grad() const { impl().grad.reset(); }

  Tensor reshape(Shape shape) const;
  Tensor flatten(std::size_t start_dim = 1) const;
  Tensor permute(const std::vector<std::size_t>& perm) const;
  Tensor transpose(std::int64_t a = -2, std::int64_t b = -1) const;
  Tensor sum(std::int64_t axis, bool keepdim = false) const;
  Tensor sum() const;
  Tensor mean(std::int64_t axis, bool keepdim = false) const;
  Tensor mean() const;
  Tensor slice(std::int64_t axis, std::uint64_t start, std::uint64_t end) const;

  detail::TensorImpl& impl() const {
    if (!impl_) throw CompileError("use of an undefined tensor");
    return *impl_;
  }
  const std::shared_ptr<detail::TensorImpl>& handle() const { return impl_; }

  bool same(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Adds `g` into the gradient of `t`. Accumulation is a local addition.
inline void accumulate_grad(const Tensor& t, const Tensor& g) {
  if (!t.requires_grad()) return;
  if (g.shape() != t.shape()) {
    throw CompileError("gradient shape " + to_string(g.shape()) + " does not match tensor shape " +
                       to_string(t.shape()));
  }
  auto& impl = t.impl();
  if (!impl.grad) {
    impl.grad = Tensor::make(t.shape(), g.kind()).handle();
  } else {
    impl.grad->kind = combine(impl.grad->kind, g.kind());
  }
}

// Gradient tensor of the given shape and kind.
inline Tensor grad_like(const Shape& shape, Kind kind) { return Tensor::make(shape, kind); }

/// Creates the output of an operator and, when any input needs a gradient,
/// appends a tape node whose backward runs under "<name>-backward".
inline Tensor record(std::string name, Shape out_shape, Kind kind, std::vector<Tensor> inputs,
                     std::function<void(const Tensor&)> backward) {
  bool needs = false;
  for (const auto& t : inputs) needs = needs || t.requires_grad();
  Tensor out = Tensor::make(std::move(out_shape), kind, needs);
  if (needs) {
    auto node = std::make_shared<detail::Node>();
    node->seq = tape().next_seq();
    node->name = std::move(name);
    for (const auto& t : inputs) node->inputs.push_back(t.handle());
    node->output = out.handle();
    node->backward = std::move(backward);
    out.impl().producer = std::move(node);
  }
  return out;
}

/// Runs the derivative functions of every operator `root` depends on, in
/// reverse recording order, labeled under the current prefix. `seed` is the
/// incoming gradient of `root`.
inline void backward(const Tensor& root, const Tensor& seed) {
  if (seed.shape() != root.shape()) {
    throw ValidationError("seed gradient shape " + to_string(seed.shape()) + " does not match " +
                          to_string(root.shape()));
  }
  if (!root.requires_grad()) throw ValidationError("tensor does not depend on any tensor that requires grad");
  const Tensor& loss = root;
  if (loss.is_leaf()) {
    accumulate_grad(loss, grad_like(loss.shape(), seed.kind()));
    return;
  }

  std::vector<std::shared_ptr<detail::Node>> nodes;
  std::vector<detail::Node*> stack{loss.impl().producer.get()};
  std::unordered_set<const detail::Node*> seen;
  while (!stack.empty()) {
    detail::Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    if (n->consumed) throw CompileError("backward through operator '" + n->name + "' a second time");
    for (const auto& in : n->inputs) {
      if (in->producer) {
        nodes.push_back(in->producer);
        stack.push_back(in->producer.get());
      }
    }
  }
  nodes.push_back(loss.impl().producer);
  std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a->seq > b->seq; });
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  loss.impl().grad = grad_like(loss.shape(), seed.kind()).handle();
  for (const auto& n : nodes) {
    auto out = n->output.lock();
    n->consumed = true;
    if (!out || !out->grad) continue;
    Tensor g(out->grad);
    with_op_label(n->name, "backward", [&] { n->backward(g); });
    out->grad.reset();  // non-leaf gradients are not retained
  }
}

inline void backward(const Tensor& loss) {
  if (loss.numel() != 1) throw ValidationError("backward needs a scalar loss, got " + to_string(loss.shape()));
  backward(loss, Tensor::constant(loss.shape()));
}

namespace detail {

// Secret-aware elementwise product cost: secret*secret needs a multiplication,
// a public factor only the rescale.
inline void product(Kind a, Kind b, std::uint64_t n, bool knownmsb = false) {
  if (a == Kind::secret && b == Kind::secret) {
    ops::fp_mul(n, knownmsb);
  } else if (a == Kind::secret || b == Kind::secret) {
    ops::fp_public_scale(n, knownmsb);
  }
}

inline void matrix_product(Kind a, Kind b, std::uint64_t p, std::uint64_t q, std::uint64_t r, std::uint64_t batch) {
  if (a == Kind::secret && b == Kind::secret) {
    ops::fp_matmul(p, q, r, batch);
  } else if (a == Kind::secret || b == Kind::secret) {
    ops::fp_public_scale(p * r * batch);
  }
}

// Gradient of a broadcast operand: reduce over the broadcast dimensions.
inline Tensor reduce_to(const Tensor& g, const Shape& shape) { return grad_like(shape, g.kind()); }

}  // namespace detail

inline Tensor Tensor::reshape(Shape shape) const {
  validate_shape(shape);
  if (autograd::numel(shape) != numel()) {
    throw ValidationError("cannot reshape " + to_string(this->shape()) + " to " + to_string(shape));
  }
  Tensor self = *this;
  return record("reshape", shape, kind(), {self},
                [self](const Tensor& g) { accumulate_grad(self, grad_like(self.shape(), g.kind())); });
}

inline Tensor Tensor::flatten(std::size_t start_dim) const {
  if (start_dim >= rank()) throw ValidationError("flatten start dimension out of range");
  Shape s(shape().begin(), shape().begin() + static_cast<std::ptrdiff_t>(start_dim));
  s.push_back(autograd::numel(Shape(shape().begin() + static_cast<std::ptrdiff_t>(start_dim), shape().end())));
  return reshape(s);
}

inline Tensor Tensor::permute(const std::vector<std::size_t>& perm) const {
  if (perm.size() != rank()) throw ValidationError("permutation rank mismatch");
  std::vector<bool> used(rank(), false);
  Shape s;
  for (auto p : perm) {
    if (p >= rank() || used[p]) throw ValidationError("invalid permutation");
    used[p] = true;
    s.push_back(shape()[p]);
  }
  Tensor self = *this;
  return record("permute", s, kind(), {self},
                [self](const Tensor& g) { accumulate_grad(self, grad_like(self.shape(), g.kind())); });
}

inline Tensor Tensor::transpose(std::int64_t a, std::int64_t b) const {
  std::vector<std::size_t> perm(rank());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::swap(perm[normalize_axis(a, rank())], perm[normalize_axis(b, rank())]);
  return permute(perm);
}

inline Tensor Tensor::sum(std::int64_t axis, bool keepdim) const {
  const std::size_t ax = normalize_axis(axis, rank());
  Shape s = shape();
  if (keepdim || rank() == 1) {
    s[ax] = 1;
  } else {
    s.erase(s.begin() + static_cast<std::ptrdiff_t>(ax));
  }
  Tensor self = *this;
  return record("sum", s, kind(), {self},
                [self](const Tensor& g) { accumulate_grad(self, grad_like(self.shape(), g.kind())); });
}

inline Tensor Tensor::sum() const { return reshape({numel()}).sum(0); }

inline Tensor Tensor::mean(std::int64_t axis, bool keepdim) const {
  Tensor s = sum(axis, keepdim);
  if (is_secret()) with_op_label("mean", "forward", [&] { ops::fp_public_scale(s.numel()); });
  Tensor self = s;
  return record("mean", s.shape(), s.kind(), {self}, [self](const Tensor& g) {
    if (g.is_secret()) ops::fp_public_scale(g.numel());
    accumulate_grad(self, grad_like(self.shape(), g.kind()));
  });
}

inline Tensor Tensor::mean() const { return reshape({numel()}).mean(0); }

inline Tensor Tensor::slice(std::int64_t axis, std::uint64_t start, std::uint64_t end) const {
  const std::size_t ax = normalize_axis(axis, rank());
  if (start >= end || end > shape()[ax]) throw ValidationError("slice bounds out of range");
  Shape s = shape();
  s[ax] = end - start;
  Tensor self = *this;
  return record("slice", s, kind(), {self},
                [self](const Tensor& g) { accumulate_grad(self, grad_like(self.shape(), g.kind())); });
}

namespace detail {

inline Tensor add_like(const char* name, const Tensor& a, const Tensor& b) {
  Shape out = broadcast_shapes(a.shape(), b.shape());
  return record(name, out, combine(a.kind(), b.kind()), {a, b}, [a, b](const Tensor& g) {
    accumulate_grad(a, reduce_to(g, a.shape()));
    accumulate_grad(b, reduce_to(g, b.shape()));
  });
}

// dX for X broadcast to the product's shape: one fused dot product of length
// rho per element of X, or the strawman full-size product then a local sum.
inline void broadcast_product_grad(const Tensor& g, const Tensor& x, const Tensor& other) {
  const Broadcast2D b = normalize_broadcast(x.shape(), g.shape());
  const bool both = g.is_secret() && other.is_secret();
  if (b.rho == 1 || options().strawman_broadcast) {
    product(g.kind(), other.kind(), g.numel());
  } else if (both) {
    commprof::emit("matmuls", OpExtras::matmul(1, b.rho, 1, x.numel()));
    ops::truncate(x.numel());
  } else if (g.is_secret() || other.is_secret()) {
    ops::fp_public_scale(x.numel());
  }
  accumulate_grad(x, grad_like(x.shape(), combine(g.kind(), other.kind())));
}

}  // namespace detail

inline Tensor operator+(const Tensor& a, const Tensor& b) { return detail::add_like("add", a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return detail::add_like("sub", a, b); }

inline Tensor operator-(const Tensor& a) {
  return record("neg", a.shape(), a.kind(), {a},
                [a](const Tensor& g) { accumulate_grad(a, grad_like(a.shape(), g.kind())); });
}

/// Elementwise product with broadcasting.
inline Tensor operator*(const Tensor& a, const Tensor& b) {
  Shape out = broadcast_shapes(a.shape(), b.shape());
  with_op_label("mul", "forward", [&] { detail::product(a.kind(), b.kind(), numel(out)); });
  return record("mul", out, combine(a.kind(), b.kind()), {a, b}, [a, b](const Tensor& g) {
    if (a.requires_grad()) detail::broadcast_product_grad(g, a, b);
    if (b.requires_grad()) detail::broadcast_product_grad(g, b, a);
  });
}

}  // namespace commprof::autograd
