#include <gtest/gtest.h>

#include <random>

#include "properties.hpp"
#include "support.hpp"

using namespace commprof;
using namespace commprof::testing;
using autograd::Shape;
using autograd::Tensor;
namespace F = autograd::functional;

namespace {

constexpr std::uint64_t k = 64;

CostTuple fp_mul(std::string_view fw, std::uint64_t n) { return formula(fw, "muls", n) + formula(fw, "TruncPr", n); }

ProfileReport train_report(const nn::ModelSpec& spec, std::string_view fw, std::uint64_t batches = 1) {
  nn::SessionOptions opt;
  opt.mode = nn::Mode::train;
  opt.batches = batches;
  return profile(nn::build_program(spec, opt), fw);
}

nn::ModelSpec with_optimizer(nn::ModelSpec spec, const char* kind) {
  spec.optimizer = nn::OptimizerSpec{};
  spec.optimizer->kind = kind;
  return spec;
}

std::vector<std::string> labels_of(const ProfileReport& r) {
  std::vector<std::string> out;
  for (const auto& [label, _] : r.entries) out.push_back(label);
  return out;
}

}  // namespace

TEST(Layers, ReluSingleElement) {
  const ProfileReport r = profile_body("ABY3", [] { nn::ReLU()(Tensor::secret({1})); });
  EXPECT_EQ(r.at("initial-relu-forward"), (CostTuple{576 + 192, 9, 0, 0}));
  EXPECT_TRUE(profile_body("ABY3", [] { F::relu(Tensor::constant({5})); }).total().is_zero());
}

TEST(Layers, ReluBackwardReusesTheMask) {
  const ProfileReport r = profile_body("ABY3", [] {
    Tensor x = Tensor::parameter({4});
    autograd::backward(F::relu(x), Tensor::secret({4}));
  });
  EXPECT_EQ(r.at("initial-relu-backward"), formula("ABY3", "muls", 4));
}

TEST(Layers, AvgPoolTruncatesOncePerOutput) {
  EXPECT_EQ(profile_body("ABY3", [] { nn::AvgPool2d(2)(Tensor::secret({1, 1, 2, 2})); }).total(),
            (CostTuple{k, 1, 0, 0}));
  EXPECT_TRUE(profile_body("ABY3", [] { nn::AvgPool2d(1)(Tensor::secret({1, 2, 3, 3})); }).total().is_zero());
}

TEST(Layers, AvgPoolAfterReluKnowsTheSign) {
  const Program prog = compile([] { F::avg_pool2d(F::relu(Tensor::secret({1, 2, 4, 4})), 2); });
  std::uint64_t with_msb = 0;
  aggregate_tree(*prog.root, [&](const Instruction& ins) {
    if (ins.op == "TruncPr" && ins.extras.knownmsb) with_msb += ins.extras.size;
    return CostTuple{};
  });
  EXPECT_EQ(with_msb, 8u);
}

TEST(Layers, MaxPoolTournament) {
  const std::uint64_t windows = 3;
  const ProfileReport r = profile_body("ABY3", [&] { nn::MaxPool2d(2)(Tensor::secret({1, windows, 2, 2})); });
  // Two stages: 2 then 1 comparisons per window, each LTZ plus a mask multiply.
  const CostTuple stage1 = formula("ABY3", "LTZ", 2 * windows) + formula("ABY3", "muls", 2 * windows);
  const CostTuple stage2 = formula("ABY3", "LTZ", windows) + formula("ABY3", "muls", windows);
  EXPECT_EQ(r.total(), stage1 + stage2);
  EXPECT_EQ(r.total(), (CostTuple{36 * k * windows, 18, 0, 0}));
  EXPECT_TRUE(profile_body("ABY3", [] { nn::MaxPool2d(1)(Tensor::secret({1, 3, 4, 4})); }).total().is_zero());
}

TEST(Layers, MaxPoolOddWindow) {
  const ProfileReport r = profile_body("ABY3", [] { nn::MaxPool2d(3)(Tensor::secret({1, 1, 3, 3})); });
  EXPECT_EQ(total_elements(compile([] { nn::MaxPool2d(3)(Tensor::secret({1, 1, 3, 3})); }), "LTZ"), 8u);
  EXPECT_EQ(r.total().online_rounds, 4u * 9);  // ceil(log2 9) stages
}

TEST(Layers, MaxPoolBackwardRoutesThroughMasks) {
  const ProfileReport r = profile_body("ABY3", [] {
    Tensor x = Tensor::parameter({1, 2, 4, 4});
    Tensor y = F::max_pool2d(x, 2);
    autograd::backward(y, Tensor::secret(y.shape()));
  });
  EXPECT_EQ(r.at("initial-maxpool-backward"), formula("ABY3", "muls", 32));
}

TEST(Layers, SoftmaxComposition) {
  const ProfileReport r = profile_body("CrypTen", [] { nn::Softmax()(Tensor::secret({1, 4})); });
  CostTuple expected = formula("CrypTen", "LTZ", 2) + formula("CrypTen", "muls", 2) + formula("CrypTen", "LTZ", 1) +
                       formula("CrypTen", "muls", 1) + formula("CrypTen", "exp_fx", 4) +
                       formula("CrypTen", "Reciprocal", 1) + fp_mul("CrypTen", 4);
  EXPECT_EQ(r.at("initial-softmax-forward"), expected);
  EXPECT_EQ(labels_of(r), std::vector<std::string>{"initial-softmax-forward"});
}

TEST(Layers, SoftmaxReciprocalPerRow) {
  const Program prog = compile([] { F::softmax(Tensor::secret({128, 10})); });
  EXPECT_EQ(total_elements(prog, "reciprocal"), 128u);
  EXPECT_EQ(total_elements(prog, "exp"), 1280u);
  EXPECT_EQ(total_elements(compile([] { F::softmax(Tensor::secret({6, 5}), 0); }), "reciprocal"), 5u);
}

TEST(Layers, BatchNormInference) {
  EXPECT_EQ(profile_body("ABY3", [] { nn::BatchNorm2d(1)(Tensor::secret({1, 1, 1, 1})); }).total(),
            (CostTuple{256, 2, 0, 0}));
}

TEST(Layers, BatchNormTrainingNormalizesPerChannel) {
  const std::uint64_t c = 6;
  const Program prog = compile([&] {
    nn::BatchNorm2d bn(c);
    bn.train(true);
    bn(Tensor::secret({2, c, 3, 3}));
  });
  EXPECT_EQ(total_elements(prog, "inv_sqrt"), c);
  const Program eval = compile([&] {
    nn::BatchNorm2d bn(c);
    bn(Tensor::secret({2, c, 3, 3}));
  });
  EXPECT_EQ(total_elements(eval, "inv_sqrt"), 0u);
}

TEST(Layers, GeluScalesWithElements) {
  const CostTuple one = profile_body("ABY3", [] { F::gelu(Tensor::secret({1})); }).total();
  const CostTuple many = profile_body("ABY3", [] { F::gelu(Tensor::secret({37})); }).total();
  EXPECT_EQ(many.online_bits, 37 * one.online_bits);
  EXPECT_EQ(many.online_rounds, one.online_rounds);
  EXPECT_TRUE(profile_body("ABY3", [] { F::gelu(Tensor::constant({3})); }).total().is_zero());
}

TEST(Layers, GeluUsesDirectOpsWhereDeclared) {
  const std::uint64_t n = 5;
  const ProfileReport r = profile_body("CrypTen", [&] { F::gelu(Tensor::secret({n})); });
  CostTuple expected;
  for (int i = 0; i < 3; ++i) expected += fp_mul("CrypTen", n);
  expected += formula("CrypTen", "exp_fx", n) + formula("CrypTen", "Reciprocal", n);
  EXPECT_EQ(r.total(), expected);
}

TEST(Layers, CrossEntropyBackwardIsFree) {
  const ProfileReport r = profile_body("ABY3", [] {
    Tensor logits = Tensor::parameter({128, 10});
    autograd::backward(F::cross_entropy(logits, Tensor::secret({128, 10})));
    EXPECT_EQ(logits.grad().shape(), (Shape{128, 10}));
  });
  EXPECT_TRUE(r.at("initial-crossentropy-backward").is_zero());
  const CostTuple softmax = profile_body("ABY3", [] { F::softmax(Tensor::secret({128, 10})); }).total();
  EXPECT_EQ(r.query_prefix("initial-crossentropy-forward"), softmax);
  EXPECT_EQ(r.total(), softmax);
  EXPECT_THROW(compile([] { F::cross_entropy(Tensor::secret({2, 3}), Tensor::secret({2, 4})); }), ValidationError);
}

TEST(Conv, PointwiseDegeneratesToScalarProduct) {
  const ProfileReport r = profile_body("ABY3", [] { nn::Conv2d(1, 1, 1, {}, false)(Tensor::secret({1, 1, 1, 1})); });
  EXPECT_EQ(r.total(), formula("ABY3", "matmuls", OpExtras::matmul(1, 1, 1)) + formula("ABY3", "TruncPr", 1));
}

TEST(Conv, Im2colDimensionsOnAby3) {
  const ProfileReport r =
      profile_body("ABY3", [] { nn::Conv2d(3, 8, 3, {1, 1, 1}, false)(Tensor::secret({1, 3, 32, 32})); });
  EXPECT_EQ(r.total(), (CostTuple{3 * 1024 * 8 * k + 1024 * 8 * k, 2, 0, 0}));
}

TEST(Conv, DelphiDirectConvolution) {
  const Program prog = compile([] { nn::Conv2d(3, 4, 3, {}, false)(Tensor::secret({2, 3, 8, 8})); });
  EXPECT_EQ(total_elements(prog, "conv2d"), 1u);
  const CostTuple conv = profile(prog, "Delphi").total();
  // Online: batch * in_channel * inw * inh * k bits in one round.
  EXPECT_EQ(conv.online_bits, 2u * 3 * 8 * 8 * k);
  EXPECT_EQ(conv.online_rounds, 1u);
  EXPECT_TRUE(formula("Delphi", "TruncPr", 2 * 4 * 36).is_zero());
}

TEST(Conv, SequentialGroupsMultiplyRounds) {
  const std::uint64_t g = 4;
  const Program prog = compile([&] { nn::Conv2d(g, g, 3, {1, 1, g}, false)(Tensor::secret({1, g, 8, 8})); });
  LoweringOptions seq;
  seq.sequential_groups = true;
  const CostTuple parallel = profile(prog, "ABY3").total(), serial = profile(prog, "ABY3", seq).total();
  EXPECT_EQ(parallel.online_rounds, 2u);
  EXPECT_EQ(serial.online_rounds, g + 1);
  EXPECT_EQ(serial.online_bits, parallel.online_bits);
}

TEST(Conv, RejectsBadGeometry) {
  EXPECT_THROW(nn::Conv2d(3, 4, 3, {1, 0, 2}), ValidationError);
  EXPECT_THROW(compile([] { nn::Conv2d(3, 4, 5)(Tensor::secret({1, 3, 4, 4})); }), ValidationError);
  EXPECT_THROW(compile([] { nn::Conv2d(3, 4, 3)(Tensor::secret({1, 2, 8, 8})); }), ValidationError);
  EXPECT_THROW(compile([] { nn::Conv2d(3, 4, 3)(Tensor::secret({3, 8, 8})); }), ValidationError);
}

TEST(Conv, BackwardShapes) {
  compile([] {
    nn::Conv2d conv(4, 6, 3, {2, 1, 2});
    Tensor x = Tensor::parameter({2, 4, 9, 9});
    Tensor y = conv(x);
    EXPECT_EQ(y.shape(), (Shape{2, 6, 5, 5}));
    autograd::backward(y, Tensor::secret(y.shape()));
    for (const auto& p : conv.parameters()) EXPECT_EQ(p.grad().shape(), p.shape());
    EXPECT_EQ(x.grad().shape(), x.shape());
  });
}

TEST(Layers, GradientShapesForEveryKind) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    const nn::ModelSpec spec = random_model(rng);
    compile([&] {
      auto model = nn::build_model(spec);
      model->train(uniform(rng, 0, 1) == 1);
      Tensor y = (*model)(Tensor::secret(spec.inputs[0].shape));
      autograd::backward(y, Tensor::secret(y.shape()));
      for (const auto& p : model->parameters()) {
        ASSERT_TRUE(p.has_grad()) << nn::to_json(spec).dump();
        ASSERT_EQ(p.grad().shape(), p.shape()) << nn::to_json(spec).dump();
      }
    });
  }
  compile([] {
    nn::SelfAttention att(8, 2);
    Tensor y = att(Tensor::secret({2, 5, 8}));
    EXPECT_EQ(y.shape(), (Shape{2, 5, 8}));
    autograd::backward(y, Tensor::secret(y.shape()));
    for (const auto& p : att.parameters()) EXPECT_EQ(p.grad().shape(), p.shape());
    EXPECT_EQ(att.parameters().size(), 8u);
  });
}

TEST(Modules, SubModuleLabels) {
  const ProfileReport r = profile_body("ABY3", [] {
    nn::Sequential net;
    auto& block = net.emplace<nn::Sequential>();
    block.set_label("transitionlayer");
    block.emplace<nn::Conv2d>(2, 2, 1);
    block.emplace<nn::ReLU>();
    net.emplace<nn::Conv2d>(2, 2, 1);
    net(Tensor::secret({1, 2, 4, 4}));
  });
  const std::vector<std::string> expected = {"initial-transitionlayer-conv2d-forward",
                                             "initial-transitionlayer-relu-forward", "initial-conv2d-forward"};
  EXPECT_EQ(labels_of(r), expected);
}

TEST(Modules, UnlabeledOperatorsMerge) {
  const ProfileReport r = profile_body("ABY3", [] {
    nn::Sequential net;
    net.emplace<nn::Sequential>().emplace<nn::Conv2d>(2, 2, 1);
    net.emplace<nn::Conv2d>(2, 2, 1);
    net(Tensor::secret({1, 2, 4, 4}));
  });
  EXPECT_EQ(labels_of(r), std::vector<std::string>{"initial-conv2d-forward"});
}

TEST(Modules, NestedLabelsStack) {
  const ProfileReport r = profile_body("ABY3", [] {
    nn::Sequential outer;
    outer.set_label("stage");
    auto& inner = outer.emplace<nn::Sequential>();
    inner.set_label("block");
    inner.emplace<nn::ReLU>();
    outer(Tensor::secret({3}));
  });
  EXPECT_EQ(labels_of(r), std::vector<std::string>{"initial-stage-block-relu-forward"});
  nn::ReLU relu;
  EXPECT_THROW(relu.set_label("a-b"), ValidationError);
  EXPECT_THROW(nn::Sequential()(Tensor()), ValidationError);
}

TEST(Optimizers, SgdIsFreeOnAby) {
  for (const auto& name : {"logreg", "lenet"}) {
    const ProfileReport r = train_report(nn::zoo::get(name), "ABY");
    ASSERT_NE(r.entries.find("initial-optimizer-step"), nullptr);
    EXPECT_TRUE(r.query_contains("optimizer-step").is_zero()) << name;
  }
}

TEST(Optimizers, SgdTruncatesEveryParameter) {
  const ProfileReport r = train_report(nn::zoo::logistic_regression(), "ABY3");
  const std::uint64_t params = 784 * 10 + 10;
  EXPECT_EQ(r.at("initial-optimizer-step"), (CostTuple{params * k, 1, 0, 0}));
}

TEST(Optimizers, AdamCostsMoreThanSgd) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const std::uint64_t in = uniform(rng, 1, 30), out = uniform(rng, 1, 30);
    nn::ModelSpec spec;
    spec.name = "tiny";
    spec.inputs = {nn::zoo::input({2, in})};
    spec.layers = {nn::zoo::layer::linear(in, out)};
    spec.loss = "cross_entropy";
    const auto sgd = train_report(with_optimizer(spec, "SGD"), "ABY3").at("initial-optimizer-step");
    const auto adam = train_report(with_optimizer(spec, "Adam"), "ABY3").at("initial-optimizer-step");
    EXPECT_GT(adam.online_bits, sgd.online_bits);
  }
}

TEST(Optimizers, StepBeforeBackwardFails) {
  compile([] {
    nn::Linear layer(3, 2);
    nn::SGD sgd(layer.parameters());
    EXPECT_THROW(sgd.step(), CompileError);
  });
}

TEST(Data, SharingCostsPerElement) {
  EXPECT_EQ(profile_body("ABY3", [] { nn::DataLoader({784}, 1, 1).share(); }).at("initial-dataloader"),
            (CostTuple{3 * k * 784, 1, 0, 0}));
  EXPECT_TRUE(profile_body("CrypTFlow2", [] { nn::DataLoader({784}, 10, 2).share(); }).total().is_zero());
}

TEST(Data, BatchBounds) {
  EXPECT_THROW(nn::DataLoader({4}, 3, 4), ValidationError);
  EXPECT_THROW(nn::DataLoader({4}, 0, 1), ValidationError);
  compile([] {
    nn::DataLoader data({4}, 10, 4);
    EXPECT_EQ(data.batch(1).shape(), (Shape{4, 4}));
    EXPECT_THROW(data.batch(2), ValidationError);
    nn::DataLoader wrap({4}, 10, 4, true);
    EXPECT_NO_THROW(wrap.batch(5));
  });
}

TEST(Training, LogisticRegressionLoopScales) {
  const ProfileReport one = train_report(nn::zoo::logistic_regression(), "ABY3", 1);
  const ProfileReport ten = train_report(nn::zoo::logistic_regression(), "ABY3", 10);
  ASSERT_EQ(labels_of(one), labels_of(ten));
  for (const auto& [label, c] : one.entries) {
    if (label == "initial-dataloader") {
      EXPECT_EQ(ten.at(label), c);  // the dataset is shared once
    } else {
      EXPECT_EQ(ten.at(label), c.scaled(10)) << label;
    }
  }
}

TEST(Training, RequiresLossAndOptimizer) {
  nn::SessionOptions opt;
  opt.mode = nn::Mode::train;
  EXPECT_THROW(nn::build_program(nn::zoo::transformer_block(), opt), ValidationError);
  opt.batches = 0;
  EXPECT_THROW(nn::build_program(nn::zoo::lenet(), opt), ValidationError);
  EXPECT_THROW(nn::parse_mode("eval"), ValidationError);
}

TEST(Training, InferenceHasNoBackward) {
  const ProfileReport r = profile(nn::build_program(nn::zoo::lenet()), "ABY3");
  EXPECT_TRUE(r.query_contains("backward").is_zero());
  EXPECT_EQ(r.entries.find("initial-optimizer-step"), nullptr);
}

TEST(Zoo, EveryModelCompiles) {
  for (const auto& name : nn::zoo::names()) {
    const nn::ModelSpec spec = nn::zoo::get(name);
    EXPECT_NO_THROW(nn::build_program(spec)) << name;
  }
  EXPECT_EQ(nn::output_shape(nn::zoo::resnet18()), (Shape{1, 1000}));
  EXPECT_EQ(nn::output_shape(nn::zoo::resnet50()), (Shape{1, 1000}));
  EXPECT_EQ(nn::output_shape(nn::zoo::lenet()), (Shape{128, 10}));
  EXPECT_EQ(nn::output_shape(nn::zoo::vgg16()), (Shape{1, 10}));
  EXPECT_EQ(nn::output_shape(nn::zoo::transformer_block()), (Shape{1, 128, 768}));
  EXPECT_THROW(nn::zoo::get("alexnet"), UnknownEntityError);
}

TEST(Zoo, ResNetStagesAreLabeled) {
  const ProfileReport r = profile(nn::build_program(nn::zoo::resnet18()), "ABY3");
  for (const char* stage : {"initial-stem", "initial-layer1", "initial-layer4", "initial-classifier"}) {
    EXPECT_FALSE(r.query_prefix(stage).is_zero()) << stage;
  }
  EXPECT_EQ(r.query_prefix("initial-stem") + r.query_prefix("initial-layer1") + r.query_prefix("initial-layer2") +
                r.query_prefix("initial-layer3") + r.query_prefix("initial-layer4") +
                r.query_prefix("initial-classifier") + r.at("initial-dataloader"),
            r.total());
}

TEST(Spec, JsonRoundTrip) {
  for (const auto& name : nn::zoo::names()) {
    const nn::ModelSpec spec = nn::zoo::get(name);
    EXPECT_EQ(nn::model_from_json(nlohmann::ordered_json::parse(nn::to_json(spec).dump())), spec) << name;
  }
}

TEST(Spec, RejectsMalformedInput) {
  using nlohmann::ordered_json;
  const auto base = ordered_json::parse(R"({"name":"m","inputs":[{"shape":[1,4]}],"layers":[{"kind":"Linear","in":4,"out":2}]})");
  EXPECT_NO_THROW(nn::model_from_json(base));
  auto bad = base;
  bad["layers"][0]["kind"] = "Dropout";
  EXPECT_THROW(nn::model_from_json(bad), UnknownEntityError);
  bad = base;
  bad["layers"][0]["dilation"] = 2;
  EXPECT_THROW(nn::model_from_json(bad), ValidationError);
  bad = base;
  bad["layers"][0]["in"] = "four";
  EXPECT_THROW(nn::model_from_json(bad), ValidationError);
  bad = base;
  bad["optimizer"] = "Adam";
  EXPECT_EQ(nn::model_from_json(bad).optimizer->kind, "Adam");
  bad["optimizer"] = "RMSprop";
  EXPECT_THROW(nn::model_from_json(bad), UnknownEntityError);
  bad = base;
  bad["layers"] = ordered_json::array();
  EXPECT_THROW(nn::model_from_json(bad), ValidationError);
  EXPECT_THROW(nn::load_model_file("/nonexistent/model.json"), UnknownEntityError);
}
