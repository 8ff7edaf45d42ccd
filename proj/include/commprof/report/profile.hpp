#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commprof/cost/framework.hpp"
#include "commprof/ir/context.hpp"
#include "commprof/ir/report.hpp"
#include "commprof/nn/session.hpp"
#include "commprof/nn/zoo.hpp"
#include "commprof/ops/lowering.hpp"
#include "commprof/ops/secure_ops.hpp"
#include "commprof/report/grouping.hpp"

namespace commprof::report {

enum class Format { table, csv, json };

inline Format parse_format(std::string_view s) {
  if (s == "table") return Format::table;
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ValidationError("format must be table, csv or json, got '" + std::string(s) + "'");
}

/// The labeled micro program: a product under "test-mul", then a reveal under "test".
inline Program listing_demo() {
  return compile([] {
    with_label("test", [] {
      ops::SecretInt a(1), b(2);
      ops::SecretInt c = with_label("mul", [&] { return a * b; });
      c.reveal();
    });
  });
}

inline constexpr std::string_view kDemoModel = "demo";

struct ProfileRequest {
  std::vector<std::string> frameworks;
  SecurityParams params;
  std::optional<std::uint64_t> parties;  // default: each framework's own
  std::string model;                     // zoo name, "demo", or a model spec file
  nn::SessionOptions session;
  LoweringOptions lowering;
};

struct ProfileRun {
  ProfileReport report;
  std::uint64_t program_fingerprint = 0;
};

inline nn::ModelSpec resolve_model(const std::string& ref) {
  if (nn::zoo::registry().count(ref)) return nn::zoo::get(ref);
  if (std::filesystem::exists(ref)) return nn::load_model_file(ref);
  throw UnknownEntityError("unknown model '" + ref + "' (not a zoo name or a file)");
}

inline Program compile_request(const ProfileRequest& req) {
  if (req.model == kDemoModel) return listing_demo();
  return nn::build_program(resolve_model(req.model), req.session);
}

inline SecurityParams params_for(const FrameworkConfig& fw, const ProfileRequest& req) {
  SecurityParams p = req.params;
  p.m = req.parties.value_or(fw.parties().default_m);
  return p;
}

/// Compiles the program once and aggregates it under every requested framework.
inline std::vector<ProfileRun> run_profile(const ProfileRequest& req, const FrameworkRegistry& registry) {
  if (req.frameworks.empty()) throw ValidationError("no framework given");
  std::vector<const FrameworkConfig*> fws;
  for (const auto& name : req.frameworks) {
    const FrameworkConfig& fw = registry.at(name);
    fw.validate_params(params_for(fw, req));
    fws.push_back(&fw);
  }
  Program prog = compile_request(req);
  std::vector<ProfileRun> runs;
  for (const auto* fw : fws) {
    runs.push_back({aggregate(prog, *fw, params_for(*fw, req), req.lowering), prog.fingerprint()});
  }
  return runs;
}

struct Comparison {
  std::vector<std::string> frameworks;
  std::vector<std::string> buckets;
  std::vector<std::vector<double>> percent;  // [bucket][framework]
  std::vector<std::vector<std::uint64_t>> bits;
};

/// Share of each bucket in each framework's total for the chosen phase.
inline Comparison compare_frameworks(const std::vector<ProfileRun>& runs, Grouping g = Grouping::op,
                                     Phase phase = Phase::online) {
  if (runs.empty()) throw ValidationError("nothing to compare");
  for (const auto& r : runs) {
    if (r.program_fingerprint != runs.front().program_fingerprint) {
      throw ValidationError("reports come from different programs");
    }
  }
  Comparison c;
  std::vector<CostMap> grouped;
  CostMap order;
  for (const auto& r : runs) {
    c.frameworks.push_back(r.report.framework);
    grouped.push_back(group_report(r.report, g));
    for (const auto& [b, _] : grouped.back()) order[b];
  }
  for (const auto& [b, _] : order) c.buckets.push_back(b);
  c.percent.assign(c.buckets.size(), std::vector<double>(runs.size(), 0.0));
  c.bits.assign(c.buckets.size(), std::vector<std::uint64_t>(runs.size(), 0));
  for (std::size_t f = 0; f < runs.size(); ++f) {
    std::uint64_t total = 0;
    for (const auto& [_, cost] : grouped[f]) total += phase_bits(cost, phase);
    for (std::size_t b = 0; b < c.buckets.size(); ++b) {
      const CostTuple* cost = grouped[f].find(c.buckets[b]);
      const std::uint64_t v = cost ? phase_bits(*cost, phase) : 0;
      c.bits[b][f] = v;
      c.percent[b][f] = total ? 100.0 * static_cast<double>(v) / static_cast<double>(total) : 0.0;
    }
  }
  return c;
}

inline std::string format_comparison(const Comparison& c) {
  std::ostringstream os;
  std::size_t w = 6;
  for (const auto& b : c.buckets) w = std::max(w, b.size());
  os << std::left << std::setw(static_cast<int>(w)) << "bucket";
  for (const auto& f : c.frameworks) os << "  " << std::right << std::setw(std::max<int>(8, static_cast<int>(f.size()))) << f;
  os << '\n';
  for (std::size_t b = 0; b < c.buckets.size(); ++b) {
    os << std::left << std::setw(static_cast<int>(w)) << c.buckets[b];
    for (std::size_t f = 0; f < c.frameworks.size(); ++f) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2) << c.percent[b][f] << '%';
      os << "  " << std::right << std::setw(std::max<int>(8, static_cast<int>(c.frameworks[f].size()))) << cell.str();
    }
    os << '\n';
  }
  return os.str();
}

struct CostGrid {
  std::vector<std::array<std::uint64_t, 3>> matmul_dims;
  std::vector<std::uint64_t> sizes;
  std::vector<std::string> elementwise_ops = {"muls", "TruncPr", "LTZ", "exp", "reciprocal"};
};

inline constexpr std::string_view kCostTableHeader = "op,p,q,r,size,online_bits,online_rounds";

/// Online cost of parameterized op signatures, for use as an external cost model.
inline std::string export_cost_callback(const FrameworkConfig& fw, const SecurityParams& params, const CostGrid& grid,
                                        const LoweringOptions& lowering = {}) {
  Lowerer lower(fw, lowering);
  lower.bind(params);
  std::ostringstream os;
  os << kCostTableHeader << '\n';
  for (const auto& d : grid.matmul_dims) {
    CostTuple c = lower.cost({"matmuls", OpExtras::matmul(d[0], d[1], d[2]), true});
    os << "matmuls," << d[0] << ',' << d[1] << ',' << d[2] << ",1," << c.online_bits << ',' << c.online_rounds << '\n';
  }
  for (const auto& op : grid.elementwise_ops) {
    if (grid.sizes.empty()) break;
    for (auto n : grid.sizes) {
      CostTuple c;
      try {
        c = lower.cost({op, OpExtras::elementwise(n), true});
      } catch (const UnknownEntityError&) {
        break;  // the framework cannot realize this op at all
      }
      os << op << ",0,0,0," << n << ',' << c.online_bits << ',' << c.online_rounds << '\n';
    }
  }
  return os.str();
}

/// Serializes runs. Grouped machine output keeps the report schema with bucket names as labels.
inline std::string render(const std::vector<ProfileRun>& runs, Format format, Grouping g, Phase phase) {
  auto grouped = [&](const ProfileRun& r) {
    ProfileReport out = r.report;
    out.entries = group_report(r.report, g);
    return out;
  };
  std::ostringstream os;
  switch (format) {
    case Format::json: {
      if (runs.size() == 1) {
        os << report_to_json(grouped(runs[0])).dump(2) << '\n';
      } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : runs) arr.push_back(report_to_json(grouped(r)));
        os << arr.dump(2) << '\n';
      }
      break;
    }
    case Format::csv: {
      if (runs.size() == 1) {
        os << report_to_csv(grouped(runs[0]));
      } else {
        os << "framework," << kCsvHeader << '\n';
        for (const auto& r : runs) {
          for (const auto& [label, c] : grouped(r).entries) {
            os << r.report.framework << ',' << label << ',' << c.online_bits << ',' << c.online_rounds << ','
               << c.offline_bits << ',' << c.offline_rounds << '\n';
          }
        }
      }
      break;
    }
    case Format::table: {
      const char* first = g == Grouping::label ? "label" : (g == Grouping::op ? "operator" : "direction");
      for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& p = runs[i].report.params;
        if (i) os << '\n';
        os << runs[i].report.framework << " (k=" << p.k << ", f=" << p.f << ", kappa_s=" << p.kappa_s
           << ", kappa=" << p.kappa << ", m=" << p.m << ")\n";
        os << format_table(group_report(runs[i].report, g), phase, first);
      }
      if (runs.size() > 1) {
        os << "\nshare of " << (phase == Phase::offline ? "offline" : phase == Phase::online ? "online" : "total")
           << " bits\n"
           << format_comparison(compare_frameworks(runs, g == Grouping::label ? Grouping::op : g, phase));
      }
      break;
    }
  }
  return os.str();
}

}  // namespace commprof::report
