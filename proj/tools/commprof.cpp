// commprof command line: profile models, inspect framework files, export cost tables.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "commprof/commprof.hpp"

namespace {

using namespace commprof;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitUnknown = 3;

struct CommonFlags {
  std::vector<std::string> config_files;
  SecurityParams params;
  std::optional<std::uint64_t> parties;
  std::string out;
  LoweringOptions lowering;
  std::string he_mod;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--bitlen", f.params.k, "ring bit length k")->capture_default_str();
  cmd->add_option("--frac", f.params.f, "fixed-point fraction bits")->capture_default_str();
  cmd->add_option("--sec-stat", f.params.kappa_s, "statistical security parameter")->capture_default_str();
  cmd->add_option("--sec-comp", f.params.kappa, "computational security parameter")->capture_default_str();
  cmd->add_option("--parties", f.parties, "number of parties (default: per framework)");
  cmd->add_option("--config", f.config_files, "extra framework file(s), replacing built-ins of the same name");
  cmd->add_option("--out", f.out, "write output to this file instead of stdout");
  auto& r = f.lowering.recipes;
  cmd->add_option("--exp-iters", r.exp_iterations, "exp limit-approximation squarings")->capture_default_str();
  cmd->add_option("--recip-iters", r.reciprocal_iterations, "reciprocal Newton steps")->capture_default_str();
  cmd->add_option("--inv-sqrt-iters", r.inv_sqrt_iterations, "inverse square root Newton steps")->capture_default_str();
  auto& he = f.lowering.he;
  cmd->add_option("--he-deg", he.deg, "HE polynomial degree")->capture_default_str();
  cmd->add_option("--he-mod", f.he_mod, "HE modulus chain as comma separated bit widths");
  cmd->add_option("--he-lp", he.lp, "price of local HE compute")->capture_default_str();
  cmd->add_option("--he-bp", he.bp, "price of HE bandwidth")->capture_default_str();
  cmd->add_flag("--sequential-groups", f.lowering.sequential_groups, "one instruction per convolution group");
}

void finish_common(CommonFlags& f) {
  if (!f.he_mod.empty()) {
    f.lowering.he.mod.clear();
    std::stringstream ss(f.he_mod);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        f.lowering.he.mod.push_back(std::stoull(item));
      } catch (const std::exception&) {
        throw ValidationError("bad --he-mod entry '" + item + "'");
      }
    }
  }
  f.lowering.he.validate();
}

FrameworkRegistry make_registry(const CommonFlags& f) {
  FrameworkRegistry reg = builtin_registry();
  for (const auto& path : f.config_files) register_loaded(reg, load_framework_file(path), true);
  return reg;
}

void emit(const CommonFlags& f, const std::string& text) {
  if (f.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(f.out, std::ios::binary);
  if (!os) throw ValidationError("cannot write '" + f.out + "'");
  os << text;
}

std::vector<std::uint64_t> parse_list(const std::string& s, char sep, const char* what) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(std::string("bad ") + what + " '" + s + "'");
    }
  }
  return out;
}

std::string query_lines(const std::vector<report::ProfileRun>& runs, const std::vector<std::string>& prefixes,
                        const std::vector<std::string>& needles) {
  std::ostringstream os;
  os << "framework,query,pattern,online_bits,online_rounds,offline_bits,offline_rounds\n";
  auto line = [&](const std::string& fw, const char* kind, const std::string& pat, const CostTuple& c) {
    os << fw << ',' << kind << ',' << pat << ',' << c.online_bits << ',' << c.online_rounds << ','
       << c.offline_bits << ',' << c.offline_rounds << '\n';
  };
  for (const auto& run : runs) {
    for (const auto& p : prefixes) line(run.report.framework, "prefix", p, run.report.query_prefix(p));
    for (const auto& n : needles) line(run.report.framework, "contains", n, run.report.query_contains(n));
  }
  return os.str();
}

int run(int argc, char** argv) {
  CLI::App app{"Static communication-cost profiler for secure multi-party ML"};
  app.require_subcommand(1);

  // profile
  CommonFlags pf;
  std::string frameworks = "ABY3", model = "demo", mode = "inference", phase = "both", group = "label",
              format = "table";
  std::uint64_t batches = 1;
  std::optional<std::uint64_t> batch_size;
  bool strawman = false;
  std::vector<std::string> prefixes, needles;
  auto* profile = app.add_subcommand("profile", "profile a model under one or more frameworks");
  profile->add_option("--framework", frameworks, "framework name(s), comma separated")->capture_default_str();
  profile->add_option("--model", model, "zoo name, model spec file, or 'demo'")->capture_default_str();
  profile->add_option("--mode", mode, "inference or train")->capture_default_str();
  profile->add_option("--batches", batches, "training batches")->capture_default_str();
  profile->add_option("--batch-size", batch_size, "override the batch dimension of every input");
  profile->add_option("--phase", phase, "online, offline or both")->capture_default_str();
  profile->add_option("--group", group, "label, operator or fb")->capture_default_str();
  profile->add_option("--format", format, "table, csv or json")->capture_default_str();
  profile->add_option("--prefix", prefixes, "print the sum over labels with this prefix");
  profile->add_option("--contains", needles, "print the sum over labels containing this text");
  profile->add_flag("--strawman-broadcast", strawman, "materialize broadcasts in backward");
  add_common(profile, pf);

  // config
  std::vector<std::string> config_paths;
  bool dump = false;
  auto* config = app.add_subcommand("config", "validate framework files");
  config->add_option("files", config_paths, "framework file(s)")->required();
  config->add_flag("--dump", dump, "print the normalized file");

  // list
  auto* list = app.add_subcommand("list", "list the model zoo and known frameworks");
  std::string list_what = "all";
  list->add_option("what", list_what, "models, frameworks or all")->capture_default_str();
  CommonFlags lf;
  list->add_option("--config", lf.config_files, "extra framework file(s)");

  // export-costs
  CommonFlags ef;
  std::string export_fw = "ABY3";
  std::vector<std::string> dims;
  std::string sizes, ops;
  auto* exporter = app.add_subcommand("export-costs", "write an online cost table for external optimizers");
  exporter->add_option("--framework", export_fw, "framework name")->capture_default_str();
  exporter->add_option("--matmul", dims, "matmul signature PxQxR (repeatable)");
  exporter->add_option("--sizes", sizes, "element counts for element-wise ops, comma separated");
  exporter->add_option("--ops", ops, "element-wise ops, comma separated (default: muls,TruncPr,LTZ,exp,reciprocal)");
  add_common(exporter, ef);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (*profile) {
    finish_common(pf);
    report::ProfileRequest req;
    std::stringstream ss(frameworks);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) req.frameworks.push_back(name);
    }
    req.params = pf.params;
    req.parties = pf.parties;
    req.model = model;
    if (mode == "train") {
      req.session.mode = nn::Mode::train;
    } else if (mode != "inference") {
      throw ValidationError("mode must be inference or train, got '" + mode + "'");
    }
    if (batches == 0) throw ValidationError("--batches must be positive");
    req.session.batches = batches;
    req.session.batch_size = batch_size;
    req.session.autograd.strawman_broadcast = strawman;
    req.lowering = pf.lowering;
    const auto g = report::parse_grouping(group);
    const auto p = report::parse_phase(phase);
    const auto fmt = report::parse_format(format);
    const auto runs = report::run_profile(req, make_registry(pf));
    if (!prefixes.empty() || !needles.empty()) {
      emit(pf, query_lines(runs, prefixes, needles));
    } else {
      emit(pf, report::render(runs, fmt, g, p));
    }
    return kExitOk;
  }

  if (*config) {
    for (const auto& path : config_paths) {
      const LoadedFramework loaded = load_framework_file(path);
      if (dump) {
        std::cout << framework_to_json(loaded.config).dump(2) << '\n';
      } else {
        const auto ops_declared = loaded.config.declared_ops();
        std::cout << path << ": ok, " << loaded.config.name() << " (" << ops_declared.size() << " ops, parties "
                  << loaded.config.parties().min_m << "-" << loaded.config.parties().max_m << ")\n";
      }
    }
    return kExitOk;
  }

  if (*list) {
    if (list_what != "all" && list_what != "models" && list_what != "frameworks") {
      throw ValidationError("list takes models, frameworks or all");
    }
    if (list_what != "frameworks") {
      std::cout << "models:\n  " << report::kDemoModel << '\n';
      for (const auto& n : nn::zoo::names()) std::cout << "  " << n << '\n';
    }
    if (list_what != "models") {
      const FrameworkRegistry reg = make_registry(lf);
      std::cout << "frameworks:\n";
      for (const auto& n : reg.names()) {
        const auto& pr = reg.at(n).parties();
        std::cout << "  " << n << " (m=" << pr.default_m << ")\n";
      }
    }
    return kExitOk;
  }

  finish_common(ef);
  const FrameworkRegistry reg = make_registry(ef);
  const FrameworkConfig& fw = reg.at(export_fw);
  SecurityParams params = ef.params;
  params.m = ef.parties.value_or(fw.parties().default_m);
  fw.validate_params(params);
  report::CostGrid grid;
  for (const auto& d : dims) {
    const auto v = parse_list(d, 'x', "matmul signature");
    if (v.size() != 3) throw ValidationError("matmul signature must be PxQxR, got '" + d + "'");
    grid.matmul_dims.push_back({v[0], v[1], v[2]});
  }
  if (!sizes.empty()) grid.sizes = parse_list(sizes, ',', "size list");
  if (!ops.empty()) {
    grid.elementwise_ops.clear();
    std::stringstream ss(ops);
    std::string op;
    while (std::getline(ss, op, ',')) grid.elementwise_ops.push_back(op);
  }
  emit(ef, report::export_cost_callback(fw, params, grid, ef.lowering));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const commprof::UnknownEntityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUnknown;
  } catch (const commprof::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}
