#pragma once

#include <cstdint>
#include <optional>

#include "commprof/autograd/tensor.hpp"
#include "commprof/ops/secure_ops.hpp"

namespace commprof::autograd::functional {

namespace detail {
using autograd::detail::matrix_product;
using autograd::detail::product;

// Pairwise-max tournament over `width` candidates in each of `windows` windows.
// Every stage is one vectorized LTZ plus one mask multiply.
inline void max_tree(std::uint64_t windows, std::uint64_t width) {
  for (std::uint64_t c = width; c > 1;) {
    const std::uint64_t pairs = c / 2;
    ops::fp_ltz(windows * pairs);
    ops::bit_mul(windows * pairs);
    c -= pairs;
  }
}

// Per-channel reduction of an elementwise product, fused like the broadcast backward.
inline void reduce_product(Kind a, Kind b, std::uint64_t groups, std::uint64_t length) {
  if (a == Kind::secret && b == Kind::secret) {
    if (length == 1 || options().strawman_broadcast) {
      ops::fp_mul(groups * length);
    } else {
      commprof::emit("matmuls", OpExtras::matmul(1, length, 1, groups));
      ops::truncate(groups);
    }
  } else if (a == Kind::secret || b == Kind::secret) {
    ops::fp_public_scale(groups);
  }
}

inline void softmax_cost(std::uint64_t rows, std::uint64_t len) {
  max_tree(rows, len);
  ops::exp(rows * len);
  ops::reciprocal(rows);
  ops::fp_mul(rows * len);
}

inline Shape conv_output(const Shape& x, std::uint64_t cout, std::uint64_t kh, std::uint64_t kw, std::uint64_t stride,
                         std::uint64_t padding) {
  if (x.size() != 4) throw ValidationError("conv/pool input must be [N, C, H, W], got " + to_string(x));
  if (stride == 0) throw ValidationError("stride must be positive");
  const std::uint64_t h = x[2] + 2 * padding, w = x[3] + 2 * padding;
  if (kh == 0 || kw == 0 || kh > h || kw > w) {
    throw ValidationError("kernel does not fit input " + to_string(x));
  }
  return {x[0], cout, (h - kh) / stride + 1, (w - kw) / stride + 1};
}

}  // namespace detail

inline Tensor exp(const Tensor& x) {
  if (x.is_secret()) with_op_label("exp", "forward", [&] { ops::exp(x.numel()); });
  return record("exp", x.shape(), x.kind(), {x}, [x](const Tensor& g) {
    // d exp(x) = exp(x) * g; exp(x) is secret whenever x is.
    detail::product(g.kind(), x.kind(), g.numel());
    accumulate_grad(x, grad_like(x.shape(), combine(g.kind(), x.kind())));
  });
}

inline Tensor relu(const Tensor& x) {
  if (x.is_secret()) {
    with_op_label("relu", "forward", [&] {
      ops::fp_ltz(x.numel());
      ops::bit_mul(x.numel());
    });
  }
  Tensor out = record("relu", x.shape(), x.kind(), {x}, [x](const Tensor& g) {
    // The forward comparison mask is reused.
    if (g.is_secret() && x.is_secret()) ops::bit_mul(g.numel());
    accumulate_grad(x, grad_like(x.shape(), combine(g.kind(), x.kind())));
  });
  out.impl().nonnegative = true;
  return out;
}

/// [.., m, n] x [n, p] folds leading dimensions; equal-rank operands are batched.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || b.rank() < 2) throw ValidationError("matmul operands need rank >= 2");
  const std::uint64_t n = a.dim(-1);
  if (b.dim(-2) != n) {
    throw ValidationError("matmul inner dimensions differ: " + to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  const std::uint64_t p = b.dim(-1);
  Shape out = a.shape();
  out.back() = p;
  std::uint64_t m = 0, batch = 1;
  if (b.rank() == 2) {
    m = a.numel() / n;
  } else {
    if (a.rank() != b.rank() || !std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin())) {
      throw ValidationError("batched matmul needs equal batch dimensions: " + to_string(a.shape()) + " x " +
                            to_string(b.shape()));
    }
    m = a.dim(-2);
    batch = a.numel() / (m * n);
  }
  with_op_label("matmul", "forward", [&] { detail::matrix_product(a.kind(), b.kind(), m, n, p, batch); });
  return record("matmul", out, combine(a.kind(), b.kind()), {a, b}, [a, b, m, n, p, batch](const Tensor& g) {
    if (a.requires_grad()) {
      detail::matrix_product(g.kind(), b.kind(), m, p, n, batch);
      accumulate_grad(a, grad_like(a.shape(), combine(g.kind(), b.kind())));
    }
    if (b.requires_grad()) {
      detail::matrix_product(a.kind(), g.kind(), n, m, p, batch);
      accumulate_grad(b, grad_like(b.shape(), combine(g.kind(), a.kind())));
    }
  });
}

/// x [.., in] with weight [out, in] and optional bias [out].
inline Tensor linear(const Tensor& x, const Tensor& weight, const std::optional<Tensor>& bias = std::nullopt) {
  if (weight.rank() != 2 || x.dim(-1) != weight.dim(1)) {
    throw ValidationError("linear: input " + to_string(x.shape()) + " does not match weight " +
                          to_string(weight.shape()));
  }
  const std::uint64_t in = weight.dim(1), outf = weight.dim(0), rows = x.numel() / in;
  if (bias && bias->shape() != Shape{outf}) throw ValidationError("linear: bias must have shape [out]");
  Shape out = x.shape();
  out.back() = outf;
  with_op_label("linear", "forward", [&] { detail::matrix_product(x.kind(), weight.kind(), rows, in, outf, 1); });
  std::vector<Tensor> inputs{x, weight};
  if (bias) inputs.push_back(*bias);
  return record("linear", out, x.kind(), inputs, [x, weight, bias, rows, in, outf](const Tensor& g) {
    if (x.requires_grad()) {
      detail::matrix_product(g.kind(), weight.kind(), rows, outf, in, 1);
      accumulate_grad(x, grad_like(x.shape(), combine(g.kind(), weight.kind())));
    }
    if (weight.requires_grad()) {
      detail::matrix_product(g.kind(), x.kind(), outf, rows, in, 1);
      accumulate_grad(weight, grad_like(weight.shape(), combine(g.kind(), x.kind())));
    }
    if (bias) accumulate_grad(*bias, grad_like(bias->shape(), g.kind()));
  });
}

struct Conv2dOptions {
  std::uint64_t stride = 1;
  std::uint64_t padding = 0;
  std::uint64_t groups = 1;
};

/// x [N, Cin, H, W] with weight [Cout, Cin/groups, kh, kw].
inline Tensor conv2d(const Tensor& x, const Tensor& weight, const std::optional<Tensor>& bias = std::nullopt,
                     Conv2dOptions opt = {}) {
  if (weight.rank() != 4) throw ValidationError("conv2d weight must be [Cout, Cin/groups, kh, kw]");
  const std::uint64_t cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3), g = opt.groups;
  Shape out = detail::conv_output(x.shape(), cout, kh, kw, opt.stride, opt.padding);
  if (g == 0 || x.dim(1) % g != 0 || cout % g != 0 || weight.dim(1) * g != x.dim(1)) {
    throw ValidationError("conv2d: channels " + std::to_string(x.dim(1)) + "->" + std::to_string(cout) +
                          " incompatible with groups " + std::to_string(g) + " and weight " +
                          to_string(weight.shape()));
  }
  if (bias && bias->shape() != Shape{cout}) throw ValidationError("conv2d: bias must have shape [Cout]");

  ConvGeometry geo;
  geo.batch = x.dim(0);
  geo.in_channel = x.dim(1);
  geo.out_channel = cout;
  geo.inh = x.dim(2);
  geo.inw = x.dim(3);
  geo.outh = out[2];
  geo.outw = out[3];
  geo.kh = kh;
  geo.kw = kw;
  geo.groups = g;
  const std::uint64_t rows = geo.batch * geo.outh * geo.outw;  // im2col rows
  const std::uint64_t q = weight.dim(1) * kh * kw;
  const std::uint64_t r = cout / g;

  with_op_label("conv2d", "forward", [&] {
    if (x.is_secret() && weight.is_secret()) {
      ops::conv2d(geo);
    } else if (x.is_secret() || weight.is_secret()) {
      ops::fp_public_scale(autograd::numel(out));
    }
  });
  std::vector<Tensor> inputs{x, weight};
  if (bias) inputs.push_back(*bias);
  return record("conv2d", out, x.kind(), inputs, [=](const Tensor& dy) {
    const bool secret_pair_x = dy.is_secret() && weight.is_secret();
    const bool secret_pair_w = dy.is_secret() && x.is_secret();
    if (x.requires_grad()) {
      // Column gradients dY * W^T per group, folded back onto the input.
      if (secret_pair_x) {
        commprof::emit("matmuls", OpExtras::matmul(rows, r, q, g));
        ops::truncate(x.numel());
      } else if (dy.is_secret() || weight.is_secret()) {
        ops::fp_public_scale(x.numel());
      }
      accumulate_grad(x, grad_like(x.shape(), combine(dy.kind(), weight.kind())));
    }
    if (weight.requires_grad()) {
      if (secret_pair_w) {
        commprof::emit("matmuls", OpExtras::matmul(q, rows, r, g));
        ops::truncate(weight.numel());
      } else if (dy.is_secret() || x.is_secret()) {
        ops::fp_public_scale(weight.numel());
      }
      accumulate_grad(weight, grad_like(weight.shape(), combine(dy.kind(), x.kind())));
    }
    if (bias) accumulate_grad(*bias, grad_like(bias->shape(), dy.kind()));
  });
}

inline Tensor avg_pool2d(const Tensor& x, std::uint64_t kernel, std::uint64_t stride = 0) {
  if (stride == 0) stride = kernel;
  Shape out = detail::conv_output(x.shape(), x.dim(1), kernel, kernel, stride, 0);
  const std::uint64_t n = autograd::numel(out);
  const bool scaled = kernel * kernel > 1;
  const bool msb = x.impl().nonnegative;
  if (x.is_secret() && scaled) with_op_label("avgpool", "forward", [&] { ops::fp_public_scale(n, msb); });
  Tensor y = record("avgpool", out, x.kind(), {x}, [x, scaled](const Tensor& g) {
    if (g.is_secret() && scaled) ops::fp_public_scale(g.numel());
    accumulate_grad(x, grad_like(x.shape(), g.kind()));
  });
  y.impl().nonnegative = msb;
  return y;
}

inline Tensor max_pool2d(const Tensor& x, std::uint64_t kernel, std::uint64_t stride = 0, std::uint64_t padding = 0) {
  if (stride == 0) stride = kernel;
  Shape out = detail::conv_output(x.shape(), x.dim(1), kernel, kernel, stride, padding);
  const std::uint64_t windows = autograd::numel(out), width = kernel * kernel;
  if (x.is_secret()) with_op_label("maxpool", "forward", [&] { detail::max_tree(windows, width); });
  Tensor y = record("maxpool", out, x.kind(), {x}, [x, windows, width](const Tensor& g) {
    // One-hot argmax masks from the forward pass route the gradient.
    if (g.is_secret() && x.is_secret() && width > 1) ops::bit_mul(windows * width);
    accumulate_grad(x, grad_like(x.shape(), combine(g.kind(), x.kind())));
  });
  y.impl().nonnegative = x.impl().nonnegative;
  return y;
}

/// x [N, C, ...] with per-channel gamma and beta [C].
inline Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, bool training) {
  if (x.rank() < 2) throw ValidationError("batch_norm input needs a channel dimension");
  const std::uint64_t c = x.dim(1), n = x.numel(), per_channel = n / c;
  if (gamma.shape() != Shape{c} || beta.shape() != Shape{c}) {
    throw ValidationError("batch_norm: gamma and beta must have shape [C]");
  }
  with_op_label("batchnorm", "forward", [&] {
    if (training && x.is_secret()) {
      ops::fp_public_scale(c);  // mean
      ops::fp_mul(n);           // squared deviations
      ops::fp_public_scale(c);  // variance
      ops::inv_sqrt(c);
      ops::fp_mul(n);           // normalize
    }
    detail::product(x.kind(), gamma.kind(), n);
  });
  return record("batchnorm", x.shape(), combine(x.kind(), gamma.kind()), {x, gamma, beta},
                [=](const Tensor& g) {
                  const Kind xk = x.kind();
                  if (gamma.requires_grad()) {
                    detail::reduce_product(g.kind(), xk, c, per_channel);
                    accumulate_grad(gamma, grad_like(gamma.shape(), combine(g.kind(), xk)));
                  }
                  if (beta.requires_grad()) accumulate_grad(beta, grad_like(beta.shape(), g.kind()));
                  if (x.requires_grad()) {
                    detail::product(g.kind(), gamma.kind(), n);
                    const Kind dk = combine(g.kind(), gamma.kind());
                    if (training && xk == Kind::secret) {
                      detail::reduce_product(dk, xk, c, per_channel);
                      ops::fp_public_scale(2 * c);  // both channel means
                      ops::fp_mul(n);               // xhat * mean(dxhat * xhat)
                      ops::fp_mul(n);               // times 1/std
                    }
                    accumulate_grad(x, grad_like(x.shape(), combine(dk, xk)));
                  }
                });
}

inline Tensor softmax(const Tensor& x, std::int64_t axis = -1) {
  const std::uint64_t len = x.dim(axis), rows = x.numel() / len;
  if (x.is_secret()) with_op_label("softmax", "forward", [&] { detail::softmax_cost(rows, len); });
  return record("softmax", x.shape(), x.kind(), {x}, [x](const Tensor& g) {
    if (x.is_secret()) {
      detail::product(g.kind(), Kind::secret, g.numel());
      ops::fp_mul(g.numel());
    }
    accumulate_grad(x, grad_like(x.shape(), combine(g.kind(), x.kind())));
  });
}

inline Tensor gelu(const Tensor& x) {
  const GeluRecipe recipe = options().gelu;
  const std::uint64_t n = x.numel();
  if (x.is_secret()) {
    with_op_label("gelu", "forward", [&] {
      for (std::uint64_t i = 0; i < recipe.fp_muls_before; ++i) ops::fp_mul(n);
      for (std::uint64_t i = 0; i < recipe.exps; ++i) ops::exp(n);
      for (std::uint64_t i = 0; i < recipe.reciprocals; ++i) ops::reciprocal(n);
      for (std::uint64_t i = 0; i < recipe.fp_muls_after; ++i) ops::fp_mul(n);
    });
  }
  return record("gelu", x.shape(), x.kind(), {x}, [x, recipe](const Tensor& g) {
    if (x.is_secret()) {
      for (std::uint64_t i = 0; i < recipe.backward_fp_muls; ++i) ops::fp_mul(g.numel());
    }
    accumulate_grad(x, grad_like(x.shape(), combine(g.kind(), x.kind())));
  });
}

/// Softmax cross-entropy over the last axis against one-hot targets. The
/// gradient softmax(x) - y is a local subtraction of values the forward pass
/// already computed.
inline Tensor cross_entropy(const Tensor& logits, const Tensor& target) {
  if (logits.shape() != target.shape()) {
    throw ValidationError("cross_entropy: logits " + to_string(logits.shape()) + " and targets " +
                          to_string(target.shape()) + " differ");
  }
  const std::uint64_t len = logits.dim(-1), rows = logits.numel() / len;
  if (logits.is_secret()) {
    with_op_label("crossentropy", "forward", [&] {
      with_op_label("softmax", "forward", [&] { detail::softmax_cost(rows, len); });
    });
  }
  return record("crossentropy", {1}, combine(logits.kind(), target.kind()), {logits, target},
                [logits, target](const Tensor&) {
                  accumulate_grad(logits, grad_like(logits.shape(), combine(logits.kind(), target.kind())));
                  accumulate_grad(target, grad_like(target.shape(), combine(logits.kind(), target.kind())));
                });
}

}  // namespace commprof::autograd::functional
