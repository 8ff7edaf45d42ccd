#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "commprof/autograd/functional.hpp"
#include "commprof/autograd/tensor.hpp"
#include "commprof/ir/context.hpp"
#include "commprof/ir/label.hpp"

namespace commprof::nn {

using autograd::Shape;
using autograd::Tensor;
namespace F = autograd::functional;

class Module {
 public:
  virtual ~Module() = default;

  virtual Tensor forward(const Tensor& x) = 0;
  virtual std::string kind() const = 0;

  Tensor operator()(const Tensor& x) {
    if (label_.empty()) return forward(x);
    return with_label(label_, [&] { return forward(x); });
  }

  // Labels this module's forward emissions with an extra prefix segment.
  Module& set_label(std::string label) {
    if (!label.empty()) validate_segment(label);
    label_ = std::move(label);
    return *this;
  }
  const std::string& label() const { return label_; }

  std::vector<Tensor> parameters() {
    std::vector<Tensor> out;
    collect_parameters(out);
    return out;
  }

  virtual void train(bool on) { training_ = on; }
  bool training() const { return training_; }

 protected:
  virtual void collect_parameters(std::vector<Tensor>&) {}

  bool training_ = false;

 private:
  std::string label_;
};

using ModulePtr = std::unique_ptr<Module>;

class Linear : public Module {
 public:
  Linear(std::uint64_t in, std::uint64_t out, bool bias = true) : weight_(Tensor::parameter({out, in})) {
    if (bias) bias_ = Tensor::parameter({out});
  }
  Tensor forward(const Tensor& x) override { return F::linear(x, weight_, bias_); }
  std::string kind() const override { return "Linear"; }

  const Tensor& weight() const { return weight_; }
  const std::optional<Tensor>& bias() const { return bias_; }

 protected:
  void collect_parameters(std::vector<Tensor>& out) override {
    out.push_back(weight_);
    if (bias_) out.push_back(*bias_);
  }

 private:
  Tensor weight_;
  std::optional<Tensor> bias_;
};

class Conv2d : public Module {
 public:
  Conv2d(std::uint64_t in, std::uint64_t out, std::uint64_t kernel, F::Conv2dOptions opt = {}, bool bias = true)
      : opt_(opt) {
    if (opt.groups == 0 || in % opt.groups != 0 || out % opt.groups != 0) {
      throw ValidationError("Conv2d channels " + std::to_string(in) + "->" + std::to_string(out) +
                            " not divisible by groups " + std::to_string(opt.groups));
    }
    if (kernel == 0) throw ValidationError("Conv2d kernel must be positive");
    weight_ = Tensor::parameter({out, in / opt.groups, kernel, kernel});
    if (bias) bias_ = Tensor::parameter({out});
  }
  Tensor forward(const Tensor& x) override { return F::conv2d(x, weight_, bias_, opt_); }
  std::string kind() const override { return "Conv2d"; }

  const Tensor& weight() const { return weight_; }

 protected:
  void collect_parameters(std::vector<Tensor>& out) override {
    out.push_back(weight_);
    if (bias_) out.push_back(*bias_);
  }

 private:
  F::Conv2dOptions opt_;
  Tensor weight_;
  std::optional<Tensor> bias_;
};

class BatchNorm2d : public Module {
 public:
  explicit BatchNorm2d(std::uint64_t channels)
      : gamma_(Tensor::parameter({channels})), beta_(Tensor::parameter({channels})) {}
  Tensor forward(const Tensor& x) override { return F::batch_norm(x, gamma_, beta_, training()); }
  std::string kind() const override { return "BatchNorm2d"; }

 protected:
  void collect_parameters(std::vector<Tensor>& out) override {
    out.push_back(gamma_);
    out.push_back(beta_);
  }

 private:
  Tensor gamma_, beta_;
};

class ReLU : public Module {
 public:
  Tensor forward(const Tensor& x) override { return F::relu(x); }
  std::string kind() const override { return "ReLU"; }
};

class GELU : public Module {
 public:
  Tensor forward(const Tensor& x) override { return F::gelu(x); }
  std::string kind() const override { return "GELU"; }
};

class AvgPool2d : public Module {
 public:
  explicit AvgPool2d(std::uint64_t kernel, std::uint64_t stride = 0) : kernel_(kernel), stride_(stride) {}
  Tensor forward(const Tensor& x) override { return F::avg_pool2d(x, kernel_, stride_); }
  std::string kind() const override { return "AvgPool2d"; }

 private:
  std::uint64_t kernel_, stride_;
};

class MaxPool2d : public Module {
 public:
  explicit MaxPool2d(std::uint64_t kernel, std::uint64_t stride = 0, std::uint64_t padding = 0)
      : kernel_(kernel), stride_(stride), padding_(padding) {}
  Tensor forward(const Tensor& x) override { return F::max_pool2d(x, kernel_, stride_, padding_); }
  std::string kind() const override { return "MaxPool2d"; }

 private:
  std::uint64_t kernel_, stride_, padding_;
};

class Softmax : public Module {
 public:
  explicit Softmax(std::int64_t axis = -1) : axis_(axis) {}
  Tensor forward(const Tensor& x) override { return F::softmax(x, axis_); }
  std::string kind() const override { return "Softmax"; }

 private:
  std::int64_t axis_;
};

class Flatten : public Module {
 public:
  explicit Flatten(std::size_t start_dim = 1) : start_(start_dim) {}
  Tensor forward(const Tensor& x) override { return x.flatten(start_); }
  std::string kind() const override { return "Flatten"; }

 private:
  std::size_t start_;
};

class Sequential : public Module {
 public:
  Sequential() = default;
  explicit Sequential(std::vector<ModulePtr> children) : children_(std::move(children)) {}

  Sequential& add(ModulePtr m) {
    children_.push_back(std::move(m));
    return *this;
  }
  template <class M, class... Args>
  M& emplace(Args&&... args) {
    auto m = std::make_unique<M>(std::forward<Args>(args)...);
    M& ref = *m;
    children_.push_back(std::move(m));
    return ref;
  }

  Tensor forward(const Tensor& x) override {
    if (children_.empty()) throw ValidationError("Sequential has no layers");
    Tensor h = x;
    for (auto& c : children_) h = (*c)(h);
    return h;
  }
  std::string kind() const override { return "Sequential"; }
  void train(bool on) override {
    Module::train(on);
    for (auto& c : children_) c->train(on);
  }
  const std::vector<ModulePtr>& children() const { return children_; }

 protected:
  void collect_parameters(std::vector<Tensor>& out) override {
    for (auto& c : children_) {
      auto p = c->parameters();
      out.insert(out.end(), p.begin(), p.end());
    }
  }

 private:
  std::vector<ModulePtr> children_;
};

/// body(x) + shortcut(x); the identity shortcut when none is given.
class Residual : public Module {
 public:
  Residual(ModulePtr body, ModulePtr shortcut = nullptr) : body_(std::move(body)), shortcut_(std::move(shortcut)) {}

  Tensor forward(const Tensor& x) override {
    Tensor main = (*body_)(x);
    Tensor skip = shortcut_ ? (*shortcut_)(x) : x;
    return main + skip;
  }
  std::string kind() const override { return "Residual"; }
  void train(bool on) override {
    Module::train(on);
    body_->train(on);
    if (shortcut_) shortcut_->train(on);
  }

 protected:
  void collect_parameters(std::vector<Tensor>& out) override {
    auto p = body_->parameters();
    out.insert(out.end(), p.begin(), p.end());
    if (shortcut_) {
      auto s = shortcut_->parameters();
      out.insert(out.end(), s.begin(), s.end());
    }
  }

 private:
  ModulePtr body_, shortcut_;
};

/// Multi-head self-attention over [B, S, D].
class SelfAttention : public Module {
 public:
  SelfAttention(std::uint64_t dim, std::uint64_t heads) : dim_(dim), heads_(heads) {
    if (heads == 0 || dim % heads != 0) throw ValidationError("attention dimension must divide into heads");
    for (auto* l : {&q_, &k_, &v_, &o_}) *l = std::make_unique<Linear>(dim, dim);
  }

  Tensor forward(const Tensor& x) override {
    if (x.rank() != 3 || x.dim(2) != dim_) throw ValidationError("attention input must be [B, S, " + std::to_string(dim_) + "]");
    const std::uint64_t b = x.dim(0), s = x.dim(1), dh = dim_ / heads_;
    auto split = [&](const Tensor& t) { return t.reshape({b, s, heads_, dh}).permute({0, 2, 1, 3}); };
    Tensor q = split((*q_)(x)), k = split((*k_)(x)), v = split((*v_)(x));
    Tensor scores = F::matmul(q, k.transpose()) * Tensor::constant({1});  // 1/sqrt(dh)
    Tensor ctx = F::matmul(F::softmax(scores), v);
    return (*o_)(ctx.permute({0, 2, 1, 3}).reshape({b, s, dim_}));
  }
  std::string kind() const override { return "SelfAttention"; }

 protected:
  void collect_parameters(std::vector<Tensor>& out) override {
    for (auto* l : {&q_, &k_, &v_, &o_}) {
      auto p = (*l)->parameters();
      out.insert(out.end(), p.begin(), p.end());
    }
  }

 private:
  std::uint64_t dim_, heads_;
  std::unique_ptr<Linear> q_, k_, v_, o_;
};

}  // namespace commprof::nn
