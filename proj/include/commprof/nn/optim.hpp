#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "commprof/autograd/tensor.hpp"
#include "commprof/core/error.hpp"
#include "commprof/ir/context.hpp"
#include "commprof/nn/spec.hpp"
#include "commprof/ops/secure_ops.hpp"

namespace commprof::nn {

class Optimizer {
 public:
  explicit Optimizer(std::vector<Tensor> params) : params_(std::move(params)) {}
  virtual ~Optimizer() = default;

  // Updates are vectorized over every parameter element that has a gradient.
  void step() {
    std::uint64_t n = 0;
    for (const auto& p : params_) {
      if (p.has_grad()) n += p.numel();
    }
    if (n == 0) throw CompileError("optimizer step before backward");
    with_op_label("optimizer", "step", [&] { update(n); });
  }

  void zero_grad() {
    for (const auto& p : params_) p.zero_grad();
  }

  const std::vector<Tensor>& parameters() const { return params_; }

 protected:
  virtual void update(std::uint64_t n) = 0;

 private:
  std::vector<Tensor> params_;
};

/// w -= lr * g: a public scaling of the gradient.
class SGD : public Optimizer {
 public:
  using Optimizer::Optimizer;

 protected:
  void update(std::uint64_t n) override { ops::fp_public_scale(n); }
};

class Adam : public Optimizer {
 public:
  using Optimizer::Optimizer;

 protected:
  void update(std::uint64_t n) override {
    ops::fp_mul(n);  // g^2
    for (int i = 0; i < 4; ++i) ops::fp_public_scale(n);  // beta and (1 - beta) terms of both moments
    ops::inv_sqrt(n);
    ops::div(n);
    ops::fp_public_scale(n);  // lr
  }
};

inline std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec, std::vector<Tensor> params) {
  if (spec.kind == "SGD") return std::make_unique<SGD>(std::move(params));
  if (spec.kind == "Adam") return std::make_unique<Adam>(std::move(params));
  throw UnknownEntityError("unknown optimizer '" + spec.kind + "'");
}

/// Secret-shared dataset sliced into batches. Sharing happens once; slicing
/// and shuffling are local.
class DataLoader {
 public:
  DataLoader(Shape sample_shape, std::uint64_t samples, std::uint64_t batch_size, bool wraparound = false)
      : sample_(std::move(sample_shape)), samples_(samples), batch_(batch_size), wrap_(wraparound) {
    autograd::validate_shape(sample_);
    if (batch_ == 0 || samples_ == 0) throw ValidationError("dataloader needs positive batch size and sample count");
    if (batch_ > samples_) throw ValidationError("batch size exceeds dataset length");
  }

  void share() const {
    with_label("dataloader", [&] { ops::share(samples_ * autograd::numel(sample_)); });
  }

  Tensor batch(std::uint64_t index) const {
    if (!wrap_ && (index + 1) * batch_ > samples_) {
      throw ValidationError("batch " + std::to_string(index) + " runs past the end of the dataset");
    }
    Shape s{batch_};
    s.insert(s.end(), sample_.begin(), sample_.end());
    return Tensor::secret(s);
  }

  std::uint64_t batches() const { return samples_ / batch_; }

 private:
  Shape sample_;
  std::uint64_t samples_, batch_;
  bool wrap_;
};

}  // namespace commprof::nn
