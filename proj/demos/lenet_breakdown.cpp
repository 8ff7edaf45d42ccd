// LeNet training step, online share per operator under several frameworks.
#include <iostream>

#include "commprof/commprof.hpp"

int main() {
  using namespace commprof;
  report::ProfileRequest req;
  req.frameworks = {"ABY", "ABY3", "Falcon", "CrypTen"};
  req.model = "lenet";
  req.session.mode = nn::Mode::train;
  const auto runs = report::run_profile(req, builtin_registry());
  const auto cmp = report::compare_frameworks(runs, report::Grouping::op, report::Phase::online);
  std::cout << report::format_comparison(cmp);
}
