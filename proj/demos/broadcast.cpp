// Backward of a broadcast product: fused reduction against the materialized strawman.
#include <iostream>

#include "commprof/commprof.hpp"

namespace {

commprof::CostTuple backward_cost(const commprof::FrameworkRegistry& reg, bool strawman) {
  using namespace commprof;
  using autograd::Tensor;
  const Program prog = compile([&] {
    autograd::options().strawman_broadcast = strawman;
    Tensor a = Tensor::parameter({1, 2});
    Tensor c = a * Tensor::secret({2, 2});
    autograd::backward(c, Tensor::secret(c.shape()));
  });
  SecurityParams params;
  params.m = 3;
  return aggregate(prog, reg, "ABY3", params).at("initial-mul-backward");
}

}  // namespace

int main() {
  const commprof::FrameworkRegistry reg = commprof::builtin_registry();
  const auto fused = backward_cost(reg, false);
  const auto strawman = backward_cost(reg, true);
  std::cout << "a[1,2] * b[2,2] under ABY3, backward w.r.t. a\n"
            << "  fused:    " << fused.online_bits << " bits, " << fused.online_rounds << " rounds\n"
            << "  strawman: " << strawman.online_bits << " bits, " << strawman.online_rounds << " rounds\n";
}
