#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commprof/core/error.hpp"
#include "commprof/cost/framework.hpp"

namespace commprof {

/// A framework config read from a file, plus any alternative names it declares.
struct LoadedFramework {
  FrameworkConfig config;
  std::vector<std::string> aliases;
};

// File layout:
//   {"name": "ABY3",
//    "parties": {"default": 3, "min": 3, "max": 3},   // max 0 = unbounded
//    "constraints": ["k - kappa_s"],                    // each must evaluate >= 0
//    "aliases": ["..."],
//    "ops": {"muls": ["3*k*size", "1", "0", "0"], ...}}
inline LoadedFramework framework_from_json(const nlohmann::ordered_json& doc) {
  using nlohmann::ordered_json;
  if (!doc.is_object()) throw ValidationError("framework config must be a JSON object");
  if (!doc.contains("name") || !doc["name"].is_string()) throw ValidationError("framework config needs a string 'name'");
  LoadedFramework out{FrameworkConfig(doc["name"].get<std::string>()), {}};
  const std::string& name = out.config.name();

  auto read_count = [&](const ordered_json& obj, const char* key, std::uint64_t fallback) -> std::uint64_t {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_unsigned()) {
      throw ValidationError("framework '" + name + "': parties." + key + " must be a non-negative integer");
    }
    return obj[key].get<std::uint64_t>();
  };
  if (doc.contains("parties")) {
    const auto& p = doc["parties"];
    if (p.is_number_unsigned()) {
      const auto m = p.get<std::uint64_t>();
      out.config.set_parties({m, m, m});
    } else if (p.is_object()) {
      PartyRule rule;
      rule.min_m = read_count(p, "min", 2);
      rule.max_m = read_count(p, "max", 0);
      rule.default_m = read_count(p, "default", rule.min_m);
      out.config.set_parties(rule);
    } else {
      throw ValidationError("framework '" + name + "': 'parties' must be an integer or an object");
    }
  }

  if (doc.contains("constraints")) {
    for (const auto& c : doc["constraints"]) {
      if (!c.is_string()) throw ValidationError("framework '" + name + "': constraints must be strings");
      try {
        out.config.add_text_constraint(c.get<std::string>());
      } catch (const ParseError& e) {
        throw ValidationError("framework '" + name + "' constraint '" + c.get<std::string>() + "': " + e.what());
      }
    }
  }

  if (doc.contains("aliases")) {
    for (const auto& a : doc["aliases"]) {
      if (!a.is_string()) throw ValidationError("framework '" + name + "': aliases must be strings");
      out.aliases.push_back(a.get<std::string>());
    }
  }

  if (!doc.contains("ops") || !doc["ops"].is_object()) {
    throw ValidationError("framework '" + name + "' has no 'ops' object");
  }
  for (const auto& [op, exprs] : doc["ops"].items()) {
    if (!exprs.is_array() || exprs.size() != 4) {
      throw ValidationError("framework '" + name + "' op '" + op + "' needs exactly four expressions");
    }
    std::array<std::string, 4> text;
    for (std::size_t i = 0; i < 4; ++i) {
      if (exprs[i].is_string()) {
        text[i] = exprs[i].get<std::string>();
      } else if (exprs[i].is_number()) {
        text[i] = exprs[i].dump();
      } else {
        throw ValidationError("framework '" + name + "' op '" + op + "': expressions must be strings or numbers");
      }
    }
    try {
      out.config.add_text(op, text);
    } catch (const ParseError& e) {
      throw ValidationError("framework '" + name + "' op '" + op + "': " + e.what());
    }
  }
  out.config.validate_structure();
  return out;
}

inline LoadedFramework load_framework_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UnknownEntityError("cannot open framework config '" + path.string() + "'");
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("framework config '" + path.string() + "': " + e.what());
  }
  return framework_from_json(doc);
}

/// Text form of a config; only formulas that were built from text can be saved.
inline nlohmann::ordered_json framework_to_json(const FrameworkConfig& fw) {
  nlohmann::ordered_json doc;
  doc["name"] = fw.name();
  doc["parties"] = {{"default", fw.parties().default_m}, {"min", fw.parties().min_m}, {"max", fw.parties().max_m}};
  nlohmann::ordered_json constraints = nlohmann::ordered_json::array();
  for (const auto& c : fw.constraints()) {
    if (!c.text) throw ValidationError("constraint '" + c.description + "' of '" + fw.name() + "' has no textual form");
    constraints.push_back(*c.text);
  }
  if (!constraints.empty()) doc["constraints"] = constraints;
  nlohmann::ordered_json ops = nlohmann::ordered_json::object();
  for (const auto& [op, formula] : fw.ops()) {
    if (!formula.text()) throw ValidationError("op '" + op + "' of '" + fw.name() + "' has no textual form");
    ops[op] = *formula.text();
  }
  doc["ops"] = ops;
  return doc;
}

inline void register_loaded(FrameworkRegistry& registry, LoadedFramework loaded, bool overwrite = false) {
  const std::string name = loaded.config.name();
  registry.register_framework(std::move(loaded.config), overwrite);
  for (const auto& alias : loaded.aliases) registry.add_alias(alias, name);
}

/// Registry built from every *.json file in a directory, in file-name order.
inline FrameworkRegistry registry_from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw UnknownEntityError("config directory '" + dir.string() + "' not found");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  FrameworkRegistry registry;
  for (const auto& f : files) register_loaded(registry, load_framework_file(f));
  return registry;
}

}  // namespace commprof
