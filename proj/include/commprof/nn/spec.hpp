#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commprof/core/error.hpp"
#include "commprof/nn/modules.hpp"

namespace commprof::nn {

struct LayerSpec {
  std::string kind;
  std::string label;  // optional sub-module label
  std::uint64_t in = 0;   // features or channels
  std::uint64_t out = 0;
  std::uint64_t kernel = 1;
  std::uint64_t stride = 0;  // 0: layer default (1 for Conv2d, kernel for pools)
  std::uint64_t padding = 0;
  std::uint64_t groups = 1;
  std::uint64_t heads = 1;
  bool bias = true;
  std::int64_t axis = -1;
  std::vector<LayerSpec> layers;    // Sequential children or Residual body
  std::vector<LayerSpec> shortcut;  // Residual projection; identity when empty

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct InputSpec {
  Shape shape;               // one batch, batch dimension first
  std::uint64_t samples = 0; // dataset length; 0 means batch size times batch count
  std::uint64_t from_party = 0;

  friend bool operator==(const InputSpec&, const InputSpec&) = default;
};

struct OptimizerSpec {
  std::string kind = "SGD";
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  friend bool operator==(const OptimizerSpec&, const OptimizerSpec&) = default;
};

struct ModelSpec {
  std::string name;
  std::vector<InputSpec> inputs;  // data first, then optional targets
  std::vector<LayerSpec> layers;
  std::string loss;  // empty or "cross_entropy"
  std::optional<OptimizerSpec> optimizer;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline const std::set<std::string>& layer_kinds() {
  static const std::set<std::string> kinds = {"Linear",    "Conv2d",    "BatchNorm2d", "ReLU",
                                              "GELU",      "AvgPool2d", "MaxPool2d",   "Softmax",
                                              "Flatten",   "Residual",  "Sequential",  "SelfAttention"};
  return kinds;
}

namespace detail {

inline void need(bool ok, const LayerSpec& s, const std::string& what) {
  if (!ok) throw ValidationError(s.kind + " layer: " + what);
}

}  // namespace detail

inline void validate(const LayerSpec& s) {
  if (!layer_kinds().count(s.kind)) throw UnknownEntityError("unknown layer kind '" + s.kind + "'");
  if (!s.label.empty()) validate_segment(s.label);
  if (s.kind == "Linear") {
    detail::need(s.in > 0 && s.out > 0, s, "needs positive in and out features");
  } else if (s.kind == "Conv2d") {
    detail::need(s.in > 0 && s.out > 0 && s.kernel > 0, s, "needs positive channels and kernel");
    detail::need(s.groups > 0 && s.in % s.groups == 0 && s.out % s.groups == 0, s,
                 "channels must be divisible by groups");
  } else if (s.kind == "BatchNorm2d") {
    detail::need(s.in > 0, s, "needs a positive channel count");
  } else if (s.kind == "AvgPool2d" || s.kind == "MaxPool2d") {
    detail::need(s.kernel > 0, s, "needs a positive kernel");
  } else if (s.kind == "Sequential" || s.kind == "Residual") {
    detail::need(!s.layers.empty(), s, "needs at least one child layer");
  } else if (s.kind == "SelfAttention") {
    detail::need(s.in > 0 && s.heads > 0 && s.in % s.heads == 0, s, "dimension must divide into heads");
  }
  for (const auto& c : s.layers) validate(c);
  for (const auto& c : s.shortcut) validate(c);
}

inline void validate(const ModelSpec& m) {
  if (m.inputs.empty()) throw ValidationError("model '" + m.name + "' declares no inputs");
  for (const auto& in : m.inputs) autograd::validate_shape(in.shape);
  if (m.layers.empty()) throw ValidationError("model '" + m.name + "' has no layers");
  for (const auto& l : m.layers) validate(l);
  if (!m.loss.empty() && m.loss != "cross_entropy") throw UnknownEntityError("unknown loss '" + m.loss + "'");
  if (m.optimizer && m.optimizer->kind != "SGD" && m.optimizer->kind != "Adam") {
    throw UnknownEntityError("unknown optimizer '" + m.optimizer->kind + "'");
  }
}

inline ModulePtr build_module(const LayerSpec& s);

inline std::unique_ptr<Sequential> build_sequential(const std::vector<LayerSpec>& layers) {
  auto seq = std::make_unique<Sequential>();
  for (const auto& l : layers) seq->add(build_module(l));
  return seq;
}

inline ModulePtr build_module(const LayerSpec& s) {
  validate(s);
  ModulePtr m;
  if (s.kind == "Linear") {
    m = std::make_unique<Linear>(s.in, s.out, s.bias);
  } else if (s.kind == "Conv2d") {
    m = std::make_unique<Conv2d>(s.in, s.out, s.kernel, F::Conv2dOptions{s.stride ? s.stride : 1, s.padding, s.groups},
                                 s.bias);
  } else if (s.kind == "BatchNorm2d") {
    m = std::make_unique<BatchNorm2d>(s.in);
  } else if (s.kind == "ReLU") {
    m = std::make_unique<ReLU>();
  } else if (s.kind == "GELU") {
    m = std::make_unique<GELU>();
  } else if (s.kind == "AvgPool2d") {
    m = std::make_unique<AvgPool2d>(s.kernel, s.stride);
  } else if (s.kind == "MaxPool2d") {
    m = std::make_unique<MaxPool2d>(s.kernel, s.stride, s.padding);
  } else if (s.kind == "Softmax") {
    m = std::make_unique<Softmax>(s.axis);
  } else if (s.kind == "Flatten") {
    m = std::make_unique<Flatten>();
  } else if (s.kind == "Sequential") {
    m = build_sequential(s.layers);
  } else if (s.kind == "Residual") {
    m = std::make_unique<Residual>(build_sequential(s.layers), s.shortcut.empty() ? nullptr : build_sequential(s.shortcut));
  } else {
    m = std::make_unique<SelfAttention>(s.in, s.heads);
  }
  m->set_label(s.label);
  return m;
}

inline std::unique_ptr<Sequential> build_model(const ModelSpec& spec) {
  validate(spec);
  return build_sequential(spec.layers);
}

// JSON mapping. Fields equal to their defaults are omitted on output.

inline nlohmann::ordered_json to_json(const LayerSpec& s) {
  const LayerSpec d;
  nlohmann::ordered_json j;
  j["kind"] = s.kind;
  if (!s.label.empty()) j["label"] = s.label;
  if (s.in != d.in) j["in"] = s.in;
  if (s.out != d.out) j["out"] = s.out;
  if (s.kernel != d.kernel) j["kernel"] = s.kernel;
  if (s.stride != d.stride) j["stride"] = s.stride;
  if (s.padding != d.padding) j["padding"] = s.padding;
  if (s.groups != d.groups) j["groups"] = s.groups;
  if (s.heads != d.heads) j["heads"] = s.heads;
  if (s.bias != d.bias) j["bias"] = s.bias;
  if (s.axis != d.axis) j["axis"] = s.axis;
  if (!s.layers.empty()) {
    j["layers"] = nlohmann::ordered_json::array();
    for (const auto& c : s.layers) j["layers"].push_back(to_json(c));
  }
  if (!s.shortcut.empty()) {
    j["shortcut"] = nlohmann::ordered_json::array();
    for (const auto& c : s.shortcut) j["shortcut"].push_back(to_json(c));
  }
  return j;
}

inline LayerSpec layer_from_json(const nlohmann::ordered_json& j) {
  static const std::set<std::string> known = {"kind",   "label", "in",    "out",  "kernel", "stride", "padding",
                                              "groups", "heads", "bias",  "axis", "layers", "shortcut"};
  if (!j.is_object()) throw ValidationError("layer spec must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ValidationError("unknown layer field '" + key + "'");
  }
  LayerSpec s;
  s.kind = j.at("kind").get<std::string>();
  s.label = j.value("label", s.label);
  s.in = j.value("in", s.in);
  s.out = j.value("out", s.out);
  s.kernel = j.value("kernel", s.kernel);
  s.stride = j.value("stride", s.stride);
  s.padding = j.value("padding", s.padding);
  s.groups = j.value("groups", s.groups);
  s.heads = j.value("heads", s.heads);
  s.bias = j.value("bias", s.bias);
  s.axis = j.value("axis", s.axis);
  if (j.contains("layers")) {
    for (const auto& c : j.at("layers")) s.layers.push_back(layer_from_json(c));
  }
  if (j.contains("shortcut")) {
    for (const auto& c : j.at("shortcut")) s.shortcut.push_back(layer_from_json(c));
  }
  return s;
}

inline nlohmann::ordered_json to_json(const ModelSpec& m) {
  nlohmann::ordered_json j;
  j["name"] = m.name;
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& in : m.inputs) {
    nlohmann::ordered_json ij{{"shape", in.shape}, {"from_party", in.from_party}};
    if (in.samples) ij["samples"] = in.samples;
    j["inputs"].push_back(ij);
  }
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& l : m.layers) j["layers"].push_back(to_json(l));
  if (!m.loss.empty()) j["loss"] = m.loss;
  if (m.optimizer) {
    j["optimizer"] = {{"kind", m.optimizer->kind},     {"lr", m.optimizer->lr},   {"beta1", m.optimizer->beta1},
                      {"beta2", m.optimizer->beta2}, {"eps", m.optimizer->eps}};
  }
  return j;
}

inline ModelSpec model_from_json(const nlohmann::ordered_json& j) {
  ModelSpec m;
  try {
    m.name = j.value("name", std::string("model"));
    for (const auto& ij : j.at("inputs")) {
      InputSpec in;
      in.shape = ij.at("shape").get<Shape>();
      in.samples = ij.value("samples", std::uint64_t{0});
      in.from_party = ij.value("from_party", std::uint64_t{0});
      m.inputs.push_back(in);
    }
    for (const auto& l : j.at("layers")) m.layers.push_back(layer_from_json(l));
    m.loss = j.value("loss", std::string());
    if (j.contains("optimizer")) {
      const auto& oj = j.at("optimizer");
      OptimizerSpec o;
      if (oj.is_string()) {
        o.kind = oj.get<std::string>();
      } else {
        o.kind = oj.value("kind", o.kind);
        o.lr = oj.value("lr", o.lr);
        o.beta1 = oj.value("beta1", o.beta1);
        o.beta2 = oj.value("beta2", o.beta2);
        o.eps = oj.value("eps", o.eps);
      }
      m.optimizer = o;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model spec: ") + e.what());
  }
  validate(m);
  return m;
}

inline ModelSpec load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnknownEntityError("cannot open model file '" + path + "'");
  try {
    return model_from_json(nlohmann::ordered_json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("model file '" + path + "': " + e.what());
  }
}

}  // namespace commprof::nn
