#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "commprof/cost/builtin_frameworks.hpp"
#include "commprof/cost/config_io.hpp"
#include "listing_cases.hpp"

using namespace commprof;
using commprof::testing::listing_cases;

namespace {

const FrameworkRegistry& builtins() {
  static const FrameworkRegistry reg = builtin_registry();
  return reg;
}

const FrameworkRegistry& parsed() {
  static const FrameworkRegistry reg = registry_from_directory(COMMPROF_CONFIG_DIR);
  return reg;
}

OpExtras matmul(std::uint64_t p, std::uint64_t q, std::uint64_t r) { return OpExtras::matmul(p, q, r); }

// Random valid draw for one framework; extras cover every op's parameters.
struct Draw {
  SecurityParams params;
  OpExtras extras;
};

Draw random_draw(std::mt19937_64& rng, const FrameworkConfig& fw) {
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
  };
  Draw d;
  d.params.k = pick(16, 128);
  d.params.f = pick(0, d.params.k - 1);
  d.params.kappa = pick(40, 256);
  d.params.kappa_s = pick(8, std::min<std::uint64_t>(d.params.kappa, d.params.k));
  const PartyRule& rule = fw.parties();
  d.params.m = rule.max_m == 0 ? pick(rule.min_m, rule.min_m + 4) : pick(rule.min_m, rule.max_m);
  d.extras.size = pick(0, 3) == 0 ? pick(0, 2) : pick(1, 1000);
  d.extras.p = pick(1, 64);
  d.extras.q = pick(1, 64);
  d.extras.r = pick(1, 64);
  d.extras.knownmsb = pick(0, 1) == 1;
  d.extras.he.deg = std::uint64_t{1} << pick(10, 14);
  d.extras.he.mod.clear();
  const auto mods = pick(3, 6);
  for (std::uint64_t i = 0; i < mods; ++i) d.extras.he.mod.push_back(pick(30, 60));
  d.extras.he.lp = static_cast<double>(pick(0, 10));
  d.extras.he.bp = static_cast<double>(pick(1, 2000));
  ConvGeometry c;
  c.batch = pick(1, 4);
  c.in_channel = pick(1, 64);
  c.out_channel = pick(1, 64);
  c.inw = c.inh = pick(1, 32);
  c.kw = c.kh = pick(1, std::min<std::uint64_t>(5, c.inw));
  c.outw = c.outh = c.inw - c.kw + 1;
  d.extras.conv = c;
  return d;
}

}  // namespace

TEST(Frameworks, AllTenRegistered) {
  std::set<std::string> names;
  for (const auto& n : builtins().names()) names.insert(n);
  const std::set<std::string> expected = {"CrypTFlow2", "CrypTen", "ABY",     "SPDZ-2k", "ABY3",
                                          "Falcon",     "Delphi",  "Cheetah", "Deep-MPC", "SEMI2K"};
  EXPECT_EQ(names, expected);
  EXPECT_EQ(builtins().at("SecretFlow-SEMI2K").name(), "SEMI2K");
  EXPECT_EQ(builtins().at("aby3").name(), "ABY3");
  EXPECT_EQ(builtins().at("deep_mpc").name(), "Deep-MPC");
  EXPECT_THROW(builtins().at("nonexistent"), UnknownEntityError);
  EXPECT_TRUE(builtins().declared_ops("ABY3").count("muls"));
}

TEST(Frameworks, WorkedValues) {
  SecurityParams p;
  EXPECT_EQ(evaluate_cost(builtins(), "CrypTen", "exp_fx", p), (CostTuple{1024, 8, 512, 24}));
  EXPECT_EQ(evaluate_cost(builtins(), "SEMI2K", "muls", p), (CostTuple{256, 1, 0, 0}));
  p.m = 3;
  EXPECT_EQ(evaluate_cost(builtins(), "ABY3", "muls", p), (CostTuple{192, 1, 0, 0}));
  EXPECT_EQ(evaluate_cost(builtins(), "ABY3", "matmuls", p, matmul(2, 3, 4)), (CostTuple{1536, 1, 0, 0}));
  EXPECT_EQ(evaluate_cost(builtins(), "Falcon", "LTZ", p), (CostTuple{1536, 11, 14976, 16}));
  EXPECT_EQ(evaluate_cost(builtins(), "ABY3", "LTZ", p), (CostTuple{576, 8, 0, 0}));
  EXPECT_EQ(evaluate_cost(builtins(), "Deep-MPC", "LTZ", p), (CostTuple{476, 8, 192, 2}));
}

TEST(Frameworks, ZeroSizeCostsNothing) {
  OpExtras zero = OpExtras::elementwise(0);
  zero.p = zero.q = zero.r = 3;
  for (const auto& name : builtins().names()) {
    const auto& fw = builtins().at(name);
    SecurityParams p;
    p.m = fw.parties().default_m;
    for (const auto& op : fw.declared_ops()) {
      OpExtras e = zero;
      e.conv = ConvGeometry{};
      EXPECT_TRUE(fw.evaluate(op, p, e).is_zero()) << name << "/" << op;
    }
  }
}

TEST(Frameworks, RejectsInvalidParameters) {
  SecurityParams p;
  p.kappa_s = 80;
  p.kappa = 128;
  p.k = 64;
  EXPECT_THROW(evaluate_cost(builtins(), "SPDZ-2k", "muls", p), ValidationError);
  SecurityParams three;
  three.m = 3;
  EXPECT_THROW(evaluate_cost(builtins(), "ABY", "muls", three), ValidationError);
  EXPECT_THROW(evaluate_cost(builtins(), "ABY3", "muls", SecurityParams{}), ValidationError);
  EXPECT_NO_THROW(evaluate_cost(builtins(), "SPDZ-2k", "muls", [] {
    SecurityParams s;
    s.m = 7;
    return s;
  }()));
  EXPECT_THROW(evaluate_cost(builtins(), "ABY3", "exp_fx", three), UnknownEntityError);
  SecurityParams bad_f;
  bad_f.f = 65;
  EXPECT_THROW(evaluate_cost(builtins(), "CrypTen", "muls", bad_f), ValidationError);
}

TEST(Frameworks, MissingExtraIsAnError) {
  SecurityParams p;
  EXPECT_THROW(evaluate_cost(builtins(), "Delphi", "conv2d", p), ValidationError);
}

TEST(Frameworks, RegistrationRules) {
  FrameworkRegistry reg;
  reg.register_framework(builtin::aby3());
  EXPECT_THROW(reg.register_framework(builtin::aby3()), ValidationError);
  EXPECT_NO_THROW(reg.register_framework(builtin::aby3(), true));
  EXPECT_THROW(reg.register_framework(FrameworkConfig("Empty")), ValidationError);

  nlohmann::ordered_json doc = nlohmann::ordered_json::parse(R"({
    "name": "Bad", "ops": {"share": ["0","0","0","0"], "reveal": ["k","1","0","0"],
                           "muls": ["3*k*sise","1","0","0"]}})");
  EXPECT_THROW(framework_from_json(doc), ValidationError);
}

TEST(Frameworks, UserTextFormulaMatchesBuiltin) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::parse(R"({
    "name": "MyABY3", "parties": 3,
    "ops": {"share": ["3*k","1","0","0"], "reveal": ["3*k","1","0","0"],
            "muls": ["3*k*size","1","0","0"]}})");
  FrameworkRegistry reg;
  register_loaded(reg, framework_from_json(doc));
  SecurityParams p;
  p.m = 3;
  for (std::uint64_t n : {0, 1, 2, 17, 1000}) {
    EXPECT_EQ(evaluate_cost(reg, "MyABY3", "muls", p, OpExtras::elementwise(n)),
              evaluate_cost(builtins(), "ABY3", "muls", p, OpExtras::elementwise(n)));
  }
}

TEST(Frameworks, TextConfigSavesAndReloads) {
  const auto& fw = parsed().at("Cheetah");
  auto doc = framework_to_json(fw);
  auto reloaded = framework_from_json(doc);
  SecurityParams p;
  OpExtras e = matmul(33, 70, 20);
  EXPECT_EQ(reloaded.config.evaluate("matmuls", p, e), fw.evaluate("matmuls", p, e));
}

// Reference table generated from independent transcriptions of the listings.
TEST(FormulaFidelity, HardCodedMatchesReferenceTable) {
  std::map<std::pair<std::string, std::string>, int> points;
  for (const auto& c : listing_cases()) {
    const CostTuple got = evaluate_cost(builtins(), c.framework, c.op, c.params(), c.extras());
    ASSERT_EQ(got, c.expected_cost()) << c.describe();
    ++points[{c.framework, c.op}];
  }
  for (const auto& name : builtins().names()) {
    for (const auto& op : builtins().at(name).declared_ops()) {
      EXPECT_GE(points[std::make_pair(name, op)], 3) << name << "/" << op;
    }
  }
}

TEST(FormulaFidelity, ParsedConfigsMatchReferenceTable) {
  for (const auto& c : listing_cases()) {
    ASSERT_EQ(evaluate_cost(parsed(), c.framework, c.op, c.params(), c.extras()), c.expected_cost())
        << c.describe();
  }
}

TEST(FormulaFidelity, ParsedConfigsDeclareSameOps) {
  for (const auto& name : builtins().names()) {
    EXPECT_EQ(builtins().declared_ops(name), parsed().declared_ops(name)) << name;
    EXPECT_EQ(builtins().at(name).parties().min_m, parsed().at(name).parties().min_m);
    EXPECT_EQ(builtins().at(name).parties().max_m, parsed().at(name).parties().max_m);
  }
}

// Hard-coded and parsed paths agree on random draws; also checks purity and
// non-negativity (the latter is implied by successful evaluation).
TEST(FormulaProperties, RoundTripPurityAndSign) {
  std::mt19937_64 rng(20240601);
  for (const auto& name : builtins().names()) {
    const auto& hard = builtins().at(name);
    const auto& text = parsed().at(name);
    for (int i = 0; i < 100; ++i) {
      Draw d = random_draw(rng, hard);
      if (name == "SPDZ-2k" && d.params.k < d.params.kappa_s) d.params.kappa_s = d.params.k;
      for (const auto& op : hard.declared_ops()) {
        const CostTuple a = hard.evaluate(op, d.params, d.extras);
        const CostTuple b = text.evaluate(op, d.params, d.extras);
        ASSERT_EQ(a, b) << name << "/" << op << " draw " << i;
        ASSERT_EQ(a, hard.evaluate(op, d.params, d.extras));
      }
    }
  }
}

TEST(FormulaProperties, SizeScalesPerInstanceBits) {
  // Bits of an op without size in its formula grow linearly with size.
  SecurityParams p;
  p.m = 3;
  const auto one = evaluate_cost(builtins(), "Deep-MPC", "TruncPr", p, OpExtras::elementwise(1));
  const auto many = evaluate_cost(builtins(), "Deep-MPC", "TruncPr", p, OpExtras::elementwise(10));
  EXPECT_EQ(many.online_bits, 10 * one.online_bits);
  EXPECT_EQ(many.online_rounds, one.online_rounds);
}

TEST(FormulaProperties, CrypTFlow2MatmulRounds) {
  SecurityParams p;
  EXPECT_EQ(evaluate_cost(builtins(), "CrypTFlow2", "matmuls", p, matmul(2, 2, 2)).online_rounds, 2u);
  EXPECT_EQ(evaluate_cost(builtins(), "CrypTFlow2", "matmuls", p, matmul(256, 256, 256)).online_rounds, 128u);
  EXPECT_EQ(evaluate_cost(builtins(), "CrypTFlow2", "matmuls", p, matmul(128, 128, 256)).online_rounds, 32u);
}
