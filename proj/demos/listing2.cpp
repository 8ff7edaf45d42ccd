// Two secret integers multiplied under a nested label, profiled under ABY3.
#include <iostream>

#include "commprof/commprof.hpp"

int main() {
  using namespace commprof;
  const Program prog = compile([] {
    with_label("test", [] {
      ops::SecretInt a(1), b(2);
      ops::SecretInt c = with_label("mul", [&] { return a * b; });
      c.reveal();
    });
  });
  const FrameworkRegistry reg = builtin_registry();
  SecurityParams params;
  params.m = 3;
  const ProfileReport r = aggregate(prog, reg, "ABY3", params);
  std::cout << report_to_json(r).dump(2) << '\n';
  std::cout << "initial-test-mul online bits: " << r.query_prefix("initial-test-mul").online_bits << '\n';
}
