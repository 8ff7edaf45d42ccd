#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "commprof/core/error.hpp"
#include "commprof/nn/spec.hpp"

namespace commprof::nn::zoo {

namespace layer {

inline LayerSpec linear(std::uint64_t in, std::uint64_t out) {
  LayerSpec s;
  s.kind = "Linear";
  s.in = in;
  s.out = out;
  return s;
}

inline LayerSpec conv(std::uint64_t in, std::uint64_t out, std::uint64_t kernel, std::uint64_t stride = 1,
                      std::uint64_t padding = 0, bool bias = true) {
  LayerSpec s;
  s.kind = "Conv2d";
  s.in = in;
  s.out = out;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  s.bias = bias;
  return s;
}

inline LayerSpec bn(std::uint64_t c) {
  LayerSpec s;
  s.kind = "BatchNorm2d";
  s.in = c;
  return s;
}

inline LayerSpec simple(const char* kind) {
  LayerSpec s;
  s.kind = kind;
  return s;
}

inline LayerSpec relu() { return simple("ReLU"); }
inline LayerSpec gelu() { return simple("GELU"); }
inline LayerSpec flatten() { return simple("Flatten"); }

inline LayerSpec pool(const char* kind, std::uint64_t kernel, std::uint64_t stride = 0, std::uint64_t padding = 0) {
  LayerSpec s;
  s.kind = kind;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  return s;
}

inline LayerSpec seq(std::vector<LayerSpec> layers, std::string label = {}) {
  LayerSpec s;
  s.kind = "Sequential";
  s.layers = std::move(layers);
  s.label = std::move(label);
  return s;
}

inline LayerSpec residual(std::vector<LayerSpec> body, std::vector<LayerSpec> shortcut = {}) {
  LayerSpec s;
  s.kind = "Residual";
  s.layers = std::move(body);
  s.shortcut = std::move(shortcut);
  return s;
}

inline LayerSpec attention(std::uint64_t dim, std::uint64_t heads) {
  LayerSpec s;
  s.kind = "SelfAttention";
  s.in = dim;
  s.heads = heads;
  return s;
}

}  // namespace layer

inline InputSpec input(Shape shape, std::uint64_t samples = 0) { return InputSpec{std::move(shape), samples, 0}; }

inline ModelSpec logistic_regression() {
  ModelSpec m;
  m.name = "logreg";
  m.inputs = {input({128, 784}, 60000), input({128, 10}, 60000)};
  m.layers = {layer::linear(784, 10)};
  m.loss = "cross_entropy";
  m.optimizer = OptimizerSpec{};
  return m;
}

inline ModelSpec lenet() {
  using namespace layer;
  ModelSpec m;
  m.name = "lenet";
  m.inputs = {input({128, 3, 28, 28})};
  m.layers = {conv(3, 6, 5, 1, 2), relu(), pool("AvgPool2d", 2), conv(6, 16, 5), relu(), pool("AvgPool2d", 2),
              flatten(), linear(400, 120), relu(), linear(120, 84), relu(), linear(84, 10)};
  m.loss = "cross_entropy";
  m.optimizer = OptimizerSpec{};
  return m;
}

inline ModelSpec minionn() {
  using namespace layer;
  ModelSpec m;
  m.name = "minionn";
  m.inputs = {input({1, 3, 32, 32})};
  m.layers = {conv(3, 64, 3, 1, 1),  relu(), conv(64, 64, 3, 1, 1), relu(), pool("AvgPool2d", 2),
              conv(64, 64, 3, 1, 1), relu(), conv(64, 64, 3, 1, 1), relu(), pool("AvgPool2d", 2),
              conv(64, 64, 3, 1, 1), relu(), conv(64, 64, 1),       relu(), conv(64, 16, 1),
              relu(),                flatten(), linear(1024, 10)};
  m.loss = "cross_entropy";
  m.optimizer = OptimizerSpec{};
  return m;
}

inline ModelSpec vgg16() {
  using namespace layer;
  ModelSpec m;
  m.name = "vgg16";
  m.inputs = {input({1, 3, 32, 32})};
  const std::vector<std::int64_t> cfg = {64, 64, -1, 128, 128, -1, 256, 256, 256, -1, 512, 512, 512, -1, 512, 512, 512, -1};
  std::uint64_t c = 3;
  for (auto v : cfg) {
    if (v < 0) {
      m.layers.push_back(pool("MaxPool2d", 2));
    } else {
      m.layers.push_back(conv(c, static_cast<std::uint64_t>(v), 3, 1, 1));
      m.layers.push_back(relu());
      c = static_cast<std::uint64_t>(v);
    }
  }
  m.layers.insert(m.layers.end(),
                  {flatten(), linear(512, 512), relu(), linear(512, 512), relu(), linear(512, 10)});
  m.loss = "cross_entropy";
  m.optimizer = OptimizerSpec{};
  return m;
}

namespace detail {

inline std::vector<LayerSpec> resnet_stage(std::uint64_t& c, std::uint64_t width, std::uint64_t blocks,
                                           std::uint64_t stride, bool bottleneck) {
  using namespace layer;
  std::vector<LayerSpec> out;
  const std::uint64_t expansion = bottleneck ? 4 : 1;
  for (std::uint64_t b = 0; b < blocks; ++b) {
    const std::uint64_t s = b == 0 ? stride : 1;
    const std::uint64_t cout = width * expansion;
    std::vector<LayerSpec> body;
    if (bottleneck) {
      body = {conv(c, width, 1, 1, 0, false), bn(width), relu(),
              conv(width, width, 3, s, 1, false), bn(width), relu(),
              conv(width, cout, 1, 1, 0, false), bn(cout)};
    } else {
      body = {conv(c, width, 3, s, 1, false), bn(width), relu(), conv(width, width, 3, 1, 1, false), bn(width)};
    }
    std::vector<LayerSpec> shortcut;
    if (s != 1 || c != cout) shortcut = {conv(c, cout, 1, s, 0, false), bn(cout)};
    out.push_back(residual(std::move(body), std::move(shortcut)));
    out.push_back(relu());
    c = cout;
  }
  return out;
}

inline std::vector<LayerSpec> resnet_backbone(const std::vector<std::uint64_t>& blocks, bool bottleneck,
                                              std::uint64_t& c) {
  std::vector<LayerSpec> stages;
  const std::uint64_t widths[] = {64, 128, 256, 512};
  for (std::size_t i = 0; i < 4; ++i) {
    stages.push_back(layer::seq(resnet_stage(c, widths[i], blocks[i], i == 0 ? 1 : 2, bottleneck),
                                "layer" + std::to_string(i + 1)));
  }
  return stages;
}

inline ModelSpec resnet(const std::string& name, const std::vector<std::uint64_t>& blocks, bool bottleneck,
                        bool backbone_only) {
  using namespace layer;
  ModelSpec m;
  m.name = name;
  std::uint64_t c = 64;
  if (backbone_only) {
    m.inputs = {input({1, 64, 56, 56})};
    m.layers = resnet_backbone(blocks, bottleneck, c);
    return m;
  }
  m.inputs = {input({1, 3, 224, 224})};
  m.layers.push_back(seq({conv(3, 64, 7, 2, 3, false), bn(64), relu(), pool("MaxPool2d", 3, 2, 1)}, "stem"));
  auto stages = resnet_backbone(blocks, bottleneck, c);
  m.layers.insert(m.layers.end(), stages.begin(), stages.end());
  m.layers.push_back(seq({pool("AvgPool2d", 7), flatten(), linear(c, 1000)}, "classifier"));
  m.loss = "cross_entropy";
  m.optimizer = OptimizerSpec{};
  return m;
}

}  // namespace detail

inline ModelSpec resnet18() { return detail::resnet("resnet18", {2, 2, 2, 2}, false, false); }
inline ModelSpec resnet50() { return detail::resnet("resnet50", {3, 4, 6, 3}, true, false); }
inline ModelSpec resnet18_backbone() { return detail::resnet("resnet18-backbone", {2, 2, 2, 2}, false, true); }
inline ModelSpec resnet50_backbone() { return detail::resnet("resnet50-backbone", {3, 4, 6, 3}, true, true); }

/// One encoder block: attention and a GELU feed-forward, both residual.
inline ModelSpec transformer_block() {
  using namespace layer;
  ModelSpec m;
  m.name = "transformer";
  const std::uint64_t d = 768, seqlen = 128;
  m.inputs = {input({1, seqlen, d})};
  m.layers = {residual({attention(d, 12)}), residual({linear(d, 4 * d), gelu(), linear(4 * d, d)})};
  return m;
}

inline const std::map<std::string, std::function<ModelSpec()>>& registry() {
  static const std::map<std::string, std::function<ModelSpec()>> models = {
      {"logreg", logistic_regression},
      {"lenet", lenet},
      {"minionn", minionn},
      {"vgg16", vgg16},
      {"resnet18", resnet18},
      {"resnet50", resnet50},
      {"resnet18-backbone", resnet18_backbone},
      {"resnet50-backbone", resnet50_backbone},
      {"transformer", transformer_block},
  };
  return models;
}

inline std::vector<std::string> names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : registry()) out.push_back(name);
  return out;
}

inline ModelSpec get(const std::string& name) {
  auto it = registry().find(name);
  if (it == registry().end()) throw UnknownEntityError("unknown model '" + name + "'");
  return it->second();
}

}  // namespace commprof::nn::zoo
