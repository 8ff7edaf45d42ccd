#pragma once

#include <string>

#include "commprof/core/rational.hpp"
#include "commprof/cost/framework.hpp"
#include "commprof/cost/matmul_partition.hpp"

namespace commprof {

namespace builtin {

using R = Rational;

struct Vars {
  explicit Vars(const EvalEnv& env)
      : k(env.get(Param::k)),
        ks(env.get(Param::kappa_s)),
        kappa(env.get(Param::kappa)),
        f(env.get(Param::f)),
        m(env.get(Param::m)),
        size(env.get(Param::size)),
        p(env.get(Param::p)),
        q(env.get(Param::q)),
        r(env.get(Param::r)),
        deg(env.get(Param::deg)),
        knownmsb(env.get(Param::knownmsb)),
        env(env) {}

  R k, ks, kappa, f, m, size, p, q, r, deg, knownmsb;
  const EvalEnv& env;

  R lg(const R& x) const { return ceil_log2(x); }
  R mod_sum() const { return slice_sum(env.mod(), 0, static_cast<std::int64_t>(env.mod().size())); }
  R mod_sum(std::int64_t start, std::int64_t end) const { return slice_sum(env.mod(), start, end); }
};

template <class Fn>
CostFormula per_instance(Fn fn) {
  return CostFormula::native([fn](const EvalEnv& env) { return fn(Vars(env)); }, true);
}

// Formula that already accounts for `size` itself.
template <class Fn>
CostFormula sized(Fn fn) {
  return CostFormula::native([fn](const EvalEnv& env) { return fn(Vars(env)); }, false);
}

inline RawCost zero() { return {0, 0, 0, 0}; }

inline FrameworkConfig cryptflow2() {
  FrameworkConfig fw("CrypTFlow2", {2, 2, 2});
  fw.add("share", per_instance([](const Vars&) { return zero(); }));
  fw.add("reveal", per_instance([](const Vars& v) { return RawCost{2 * v.k, 1, 0, 0}; }));
  fw.add("muls", sized([](const Vars& v) {
           return RawCost{v.size * v.k * (ceil((v.k + 1) / 2) + v.kappa), 2, 0, 0};
         }));
  fw.add("matmuls", per_instance([](const Vars& v) {
           const R partitions = ceil(R(1 << 24) / (v.p * v.q * v.r));
           return RawCost{v.q * v.r * v.k * (v.p * ceil((v.k + 1) / 2) + v.kappa),
                          max(R(2), ceil(2 * v.k / partitions)), 0, 0};
         }));
  fw.add("TruncPr", per_instance([](const Vars& v) {
           if (!v.knownmsb.is_zero()) {
             return RawCost{(v.kappa + 14) * v.f + 2 * v.kappa + 4 * v.k, 2, 0, 0};
           }
           return RawCost{v.kappa * (v.k + 2) + 19 * v.k + (v.kappa + 14) * v.f, 2 * v.lg(v.k) + 2, 0, 0};
         }));
  fw.add("LTZ", per_instance([](const Vars& v) { return RawCost{(v.kappa + 18) * v.k, v.lg(v.k), 0, 0}; }));
  return fw;
}

inline FrameworkConfig crypten() {
  FrameworkConfig fw("CrypTen", {2, 2, 2});
  fw.add("share", per_instance([](const Vars&) { return zero(); }));
  fw.add("reveal", per_instance([](const Vars& v) { return RawCost{2 * v.k, 1, 0, 0}; }));
  fw.add("muls", sized([](const Vars& v) { return RawCost{2 * v.k * v.size, 1, v.k * v.size, 3}; }));
  fw.add("matmuls", per_instance([](const Vars& v) {
           return RawCost{(v.p * v.q + v.q * v.r) * v.k * 2, 1, v.p * v.r * v.k, 3};
         }));
  fw.add("TruncPr", per_instance([](const Vars&) { return zero(); }));
  fw.add("LTZ", per_instance([](const Vars& v) {
           return RawCost{54 * v.k, v.lg(v.k) + 2, 14 * v.k, (v.lg(v.k) + 2) * 3};
         }));
  fw.add("exp_fx", per_instance([](const Vars& v) { return RawCost{16 * v.k, 8, 8 * v.k, 24}; }));
  fw.add("EQZ", per_instance([](const Vars& v) { return RawCost{26 * v.k, v.lg(v.k), 7 * v.k, 21}; }));
  fw.add("Reciprocal", per_instance([](const Vars& v) { return RawCost{138 * v.k, 38, 44 * v.k, 114}; }));
  return fw;
}

inline FrameworkConfig aby() {
  FrameworkConfig fw("ABY", {2, 2, 2});
  fw.add("share", per_instance([](const Vars&) { return zero(); }));
  fw.add("reveal", per_instance([](const Vars& v) { return RawCost{2 * v.k, 1, 0, 0}; }));
  fw.add("muls", sized([](const Vars& v) {
           return RawCost{4 * v.k * v.size, 1, (2 * v.kappa + v.k + 1) * v.k * v.size, 2};
         }));
  fw.add("matmuls", per_instance([](const Vars& v) {
           const R n = v.p * v.q * v.r;
           return RawCost{n * v.k * 4, 1, n * (2 * v.kappa + v.k + 1) * v.k, 2};
         }));
  fw.add("TruncPr", per_instance([](const Vars&) { return zero(); }));
  fw.add("LTZ", per_instance([](const Vars& v) {
           return RawCost{v.kappa * v.k * 7 + (v.k * v.k + v.k) / 2, 4, 5 * v.kappa * v.k, 2};
         }));
  return fw;
}

inline FrameworkConfig spdz2k() {
  FrameworkConfig fw("SPDZ-2k", {2, 2, 0});
  fw.add_constraint({"k >= kappa_s", [](const EvalEnv& env) { return env.get(Param::k) - env.get(Param::kappa_s); }, std::nullopt});
  auto pairs = [](const Vars& v) { return v.m * (v.m - 1); };
  auto auth = [pairs](const Vars& v) { return v.ks * (v.k + v.ks) * pairs(v); };
  auto triple = [pairs](const Vars& v) {
    return (18 * v.ks * v.ks + 4 * v.k * v.k + 17 * v.ks * v.k) * pairs(v);
  };
  fw.add("share", per_instance([auth](const Vars& v) { return RawCost{(v.ks + v.k) * (v.m - 1), 1, auth(v), 3}; }));
  fw.add("reveal", per_instance([auth, pairs](const Vars& v) {
           return RawCost{(v.ks + v.k) * pairs(v), 1, auth(v), 3};
         }));
  fw.add("muls", per_instance([triple, pairs](const Vars& v) {
           return RawCost{(v.k + v.ks) * pairs(v) * 2, 1, triple(v), 8};
         }));
  fw.add("matmuls", per_instance([triple, pairs](const Vars& v) {
           const R n = v.p * v.q * v.r;
           return RawCost{(v.k + v.ks) * pairs(v) * 2 * n, 1, triple(v) * n, 8};
         }));
  fw.add("TruncPr", per_instance([auth, triple, pairs](const Vars& v) {
           const R offline = v.k * ((v.ks + v.k) * (3 * v.m + 1) * (v.m - 1) + auth(v) * 2 + triple(v));
           return RawCost{(v.k + v.ks) * pairs(v), 1, offline, 11};
         }));
  return fw;
}

inline FrameworkConfig aby3() {
  FrameworkConfig fw("ABY3", {3, 3, 3});
  fw.add("share", per_instance([](const Vars& v) { return RawCost{3 * v.k, 1, 0, 0}; }));
  fw.add("reveal", per_instance([](const Vars& v) { return RawCost{3 * v.k, 1, 0, 0}; }));
  fw.add("muls", sized([](const Vars& v) { return RawCost{3 * v.k * v.size, 1, 0, 0}; }));
  fw.add("matmuls", per_instance([](const Vars& v) { return RawCost{3 * v.p * v.r * v.k, 1, 0, 0}; }));
  fw.add("TruncPr", per_instance([](const Vars& v) { return RawCost{v.k, 1, 0, 0}; }));
  fw.add("LTZ", per_instance([](const Vars& v) { return RawCost{9 * v.k, v.lg(v.k) + 2, 0, 0}; }));
  return fw;
}

inline FrameworkConfig falcon() {
  FrameworkConfig fw("Falcon", {3, 3, 3});
  fw.add_constraint({"k > f", [](const EvalEnv& env) { return env.get(Param::k) - env.get(Param::f) - 1; }, std::nullopt});
  auto ltz_offline = [](const Vars& v) { return (v.k + 8 + v.lg(v.k)) * v.k * 3; };
  fw.add("share", per_instance([](const Vars& v) { return RawCost{3 * v.k, 1, 0, 0}; }));
  fw.add("reveal", per_instance([](const Vars& v) { return RawCost{6 * v.k, 1, 0, 0}; }));
  fw.add("muls", sized([](const Vars& v) { return RawCost{6 * v.k * v.size, 1, 0, 0}; }));
  fw.add("matmuls", per_instance([](const Vars& v) { return RawCost{6 * v.p * v.r * v.k, 1, 0, 0}; }));
  fw.add("TruncPr", per_instance([](const Vars& v) {
           const R offline = (6 + v.lg(v.k)) * v.k + (6 + v.lg(v.k - v.f)) * (v.k - v.f);
           return RawCost{2 * v.k, 1, offline, v.lg(v.k) + 2};
         }));
  fw.add("LTZ", per_instance([ltz_offline](const Vars& v) {
           return RawCost{24 * v.k, v.lg(v.k) + 5, ltz_offline(v), 4 + 2 * v.lg(v.k)};
         }));
  fw.add("Pow2", per_instance([ltz_offline](const Vars& v) {
           return RawCost{24 * v.k * v.k, (v.lg(v.k) + 5) * v.k, ltz_offline(v) * v.k, 4 + 2 * v.lg(v.k)};
         }));
  fw.add("Reciprocal", per_instance([ltz_offline](const Vars& v) {
           return RawCost{24 * v.k * v.k + 36 * v.k, (v.lg(v.k) + 5) * v.k + 5, ltz_offline(v) * v.k,
                          4 + 2 * v.lg(v.k)};
         }));
  return fw;
}

inline FrameworkConfig delphi() {
  FrameworkConfig fw("Delphi", {2, 2, 2});
  fw.add("share", per_instance([](const Vars&) { return zero(); }));
  fw.add("reveal", per_instance([](const Vars& v) { return RawCost{2 * v.k, 1, 0, 0}; }));
  fw.add("muls", sized([](const Vars& v) {
           return RawCost{v.k * v.size, 1, ceil(v.size / v.deg) * v.deg * v.mod_sum() * 4, 2};
         }));
  fw.add("matmuls", per_instance([](const Vars& v) {
           const R cts = ceil(v.p * v.r / v.deg) + ceil(v.p * v.q / v.deg);
           return RawCost{v.p * v.q * v.k, 1, cts * v.deg * v.mod_sum() * 2, 2};
         }));
  fw.add("TruncPr", per_instance([](const Vars&) { return zero(); }));
  fw.add("LTZ", per_instance([](const Vars& v) { return RawCost{148 * v.k, 1, 1470 * v.k, 3}; }));
  fw.add("conv2d", per_instance([](const Vars& v) {
           const EvalEnv& e = v.env;
           const R batch = e.get(Param::batch), cin = e.get(Param::in_channel), cout = e.get(Param::out_channel);
           const R inw = e.get(Param::inw), inh = e.get(Param::inh), outw = e.get(Param::outw),
                   outh = e.get(Param::outh),
                   kw = e.get(Param::kw), kh = e.get(Param::kh);
           const R offline = batch * ceil(cin * inw * inh / v.deg) * kw * kh * v.deg * v.mod_sum() +
                             ceil(batch * cout * outw * outh / v.deg) * v.deg * v.mod_sum();
           return RawCost{batch * cin * inw * inh * v.k, 1, offline, 2};
         }));
  return fw;
}

inline FrameworkConfig cheetah() {
  FrameworkConfig fw("Cheetah", {2, 2, 2});
  fw.add("share", per_instance([](const Vars&) { return zero(); }));
  fw.add("reveal", per_instance([](const Vars& v) { return RawCost{2 * v.k, 1, 0, 0}; }));
  fw.add("muls", sized([](const Vars& v) {
           return RawCost{ceil(v.size / v.deg) * (v.deg * v.mod_sum(0, -1) + v.deg * v.mod_sum(0, -2)), 2, 0, 0};
         }));
  fw.add("matmuls", per_instance([](const Vars& v) {
           const auto& he_lp = v.env.get(Param::lp);
           const auto& he_bp = v.env.get(Param::bp);
           auto cts = cheetah_matmul_ct_count(v.p.to_uint64_checked("p"), v.q.to_uint64_checked("q"),
                                              v.r.to_uint64_checked("r"), v.deg.to_uint64_checked("deg"),
                                              he_lp.to_double(), he_bp.to_double());
           const R bits = 2 * (R::from_uint(cts.send) * v.deg * v.mod_sum(0, -1) +
                               R::from_uint(cts.response) * v.deg * v.mod_sum(0, -2));
           return RawCost{bits, 4, 0, 0};
         }));
  fw.add("TruncPr", per_instance([](const Vars& v) { return RawCost{v.f + 4, 2, 0, 0}; }));
  fw.add("LTZ", per_instance([](const Vars& v) { return RawCost{13 * v.k + 1, v.lg(v.k), 0, 0}; }));
  return fw;
}

inline FrameworkConfig deep_mpc() {
  FrameworkConfig fw("Deep-MPC", {3, 3, 3});
  fw.add("share", per_instance([](const Vars& v) { return RawCost{v.k, 1, 0, 0}; }));
  fw.add("reveal", per_instance([](const Vars& v) { return RawCost{3 * v.k, 1, 0, 0}; }));
  fw.add("muls", per_instance([](const Vars& v) { return RawCost{3 * v.k, 1, 0, 0}; }));
  fw.add("matmuls", per_instance([](const Vars& v) { return RawCost{3 * v.p * v.r * v.k, 1, 0, 0}; }));
  fw.add("TruncPr", per_instance([](const Vars& v) { return RawCost{8 * v.k, 3, 0, 0}; }));
  fw.add("LTZ", per_instance([](const Vars& v) {
           return RawCost{R(7425, 1000) * v.k, v.lg(v.k) + 2, 3 * v.k, 2};
         }));
  return fw;
}

inline FrameworkConfig semi2k() {
  FrameworkConfig fw("SEMI2K", {2, 2, 0});
  fw.add("share", per_instance([](const Vars&) { return zero(); }));
  fw.add("reveal", per_instance([](const Vars& v) { return RawCost{v.m * (v.m - 1) * v.k, 1, 0, 0}; }));
  fw.add("muls", sized([](const Vars& v) { return RawCost{2 * v.m * (v.m - 1) * v.k * v.size, 1, 0, 0}; }));
  fw.add("matmuls", per_instance([](const Vars& v) {
           const auto n = semi2k_matmul_msg_count(v.p.to_uint64_checked("p"), v.q.to_uint64_checked("q"),
                                                  v.r.to_uint64_checked("r"), v.k.to_uint64_checked("k"));
           return RawCost{v.m * v.k * R::from_uint(n), 1, 0, 0};
         }));
  fw.add("TruncPr", per_instance([](const Vars& v) { return RawCost{v.m * (v.m - 1) * v.k, 1, 0, 0}; }));
  fw.add("LTZ", per_instance([](const Vars& v) {
           return RawCost{v.m * (2 * v.k + 2 * (v.m - 1) * (2 * v.k + 32)), v.lg(v.k) + 1, 0, 0};
         }));
  return fw;
}

}  // namespace builtin

/// Registry holding the ten built-in frameworks.
inline FrameworkRegistry builtin_registry() {
  FrameworkRegistry reg;
  reg.register_framework(builtin::cryptflow2());
  reg.register_framework(builtin::crypten());
  reg.register_framework(builtin::aby());
  reg.register_framework(builtin::spdz2k());
  reg.register_framework(builtin::aby3());
  reg.register_framework(builtin::falcon());
  reg.register_framework(builtin::delphi());
  reg.register_framework(builtin::cheetah());
  reg.register_framework(builtin::deep_mpc());
  reg.register_framework(builtin::semi2k());
  reg.add_alias("SecretFlow-SEMI2K", "SEMI2K");
  return reg;
}

}  // namespace commprof
