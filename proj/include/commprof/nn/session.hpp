#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "commprof/autograd/functional.hpp"
#include "commprof/ir/context.hpp"
#include "commprof/nn/optim.hpp"
#include "commprof/nn/spec.hpp"

namespace commprof::nn {

enum class Mode { inference, train };

inline Mode parse_mode(const std::string& s) {
  if (s == "inference") return Mode::inference;
  if (s == "train") return Mode::train;
  throw ValidationError("mode must be 'inference' or 'train', got '" + s + "'");
}

inline const char* to_string(Mode m) { return m == Mode::train ? "train" : "inference"; }

struct SessionOptions {
  Mode mode = Mode::inference;
  std::uint64_t batches = 1;
  std::optional<std::uint64_t> batch_size;  // overrides the batch dimension of every input
  autograd::AutogradOptions autograd;
  bool probe_loops = true;
};

inline ModelSpec with_batch_size(ModelSpec spec, std::uint64_t batch) {
  if (batch == 0) throw ValidationError("batch size must be positive");
  for (auto& in : spec.inputs) in.shape.at(0) = batch;
  return spec;
}

/// Output shape of one forward pass.
inline Shape output_shape(const ModelSpec& spec) {
  Shape out;
  compile([&] {
    auto model = build_model(spec);
    out = (*model)(Tensor::secret(spec.inputs.at(0).shape)).shape();
  }, false);
  return out;
}

namespace detail {

inline DataLoader loader_for(const InputSpec& in, std::uint64_t batches) {
  Shape sample(in.shape.begin() + 1, in.shape.end());
  if (sample.empty()) sample = {1};
  const std::uint64_t batch = in.shape.at(0);
  return DataLoader(sample, in.samples ? in.samples : batch * batches, batch);
}

}  // namespace detail

/// Compiles the inference or training program of a model: inputs are shared
/// once, then every batch runs inside one loop.
inline Program build_program(const ModelSpec& source, const SessionOptions& opt = {}) {
  ModelSpec spec = opt.batch_size ? with_batch_size(source, *opt.batch_size) : source;
  validate(spec);
  if (opt.batches == 0) throw ValidationError("batch count must be positive");
  const bool train = opt.mode == Mode::train;
  if (train && (spec.loss.empty() || !spec.optimizer)) {
    throw ValidationError("model '" + spec.name + "' has no loss and optimizer, so it cannot be trained");
  }

  InputSpec target;
  if (train) {
    if (spec.inputs.size() > 1) {
      target = spec.inputs[1];
    } else {
      target.shape = output_shape(spec);
      target.samples = spec.inputs[0].samples;
    }
  }

  return compile(
      [&] {
        autograd::options() = opt.autograd;
        auto model = build_model(spec);
        model->train(train);
        DataLoader data = detail::loader_for(spec.inputs[0], opt.batches);
        std::optional<DataLoader> labels;
        if (train) labels = detail::loader_for(target, opt.batches);
        data.share();
        if (labels) labels->share();

        std::unique_ptr<Optimizer> optimizer;
        if (train) optimizer = make_optimizer(*spec.optimizer, model->parameters());

        for_range(opt.batches, [&](std::uint64_t i) {
          Tensor x = data.batch(i);
          if (!train) {
            (*model)(x);
            return;
          }
          optimizer->zero_grad();
          Tensor y = (*model)(x);
          Tensor loss = autograd::functional::cross_entropy(y, labels->batch(i));
          autograd::backward(loss);
          optimizer->step();
        });
      },
      opt.probe_loops);
}

}  // namespace commprof::nn
