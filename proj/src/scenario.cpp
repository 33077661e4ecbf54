#include "sbscv/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sbscv/version.hpp"

namespace sbscv {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
  }
}

double get_double(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("key \"" + key + "\" must be a number");
  return v.get<double>();
}

std::int64_t get_int(const json& obj, const std::string& key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    throw ConfigError("key \"" + key + "\" must be an integer");
  return v.get<std::int64_t>();
}

std::string get_string(const json& obj, const std::string& key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError("key \"" + key + "\" must be a string");
  return v.get<std::string>();
}

std::vector<double> get_double_array(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError("key \"" + key + "\" must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw ConfigError("key \"" + key + "\" must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Complex parse_weight(const json& v) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Complex(v[0].get<double>(), v[1].get<double>());
  throw ConfigError("key \"weights\" entries must be a number or [re, im]");
}

GridSpec parse_grid(const json& obj) {
  check_keys(obj, {"x_min", "x_max", "n"}, "grid");
  GridSpec g;
  g.x_min = get_double(obj, "x_min", g.x_min);
  g.x_max = get_double(obj, "x_max", g.x_max);
  g.n = static_cast<Index>(get_int(obj, "n", g.n));
  return g;
}

SystemSpec parse_system(const json& obj) {
  check_keys(obj, {"type", "centers", "weights", "width", "momentum"}, "system");
  SystemSpec s;
  s.type = get_string(obj, "type", s.type);
  if (s.type != "gaussian" && s.type != "cat")
    throw ConfigError("key \"type\" in system must be \"gaussian\" or \"cat\"");
  if (obj.contains("centers")) s.centers = get_double_array(obj.at("centers"), "centers");
  if (obj.contains("weights")) {
    const json& w = obj.at("weights");
    if (!w.is_array()) throw ConfigError("key \"weights\" must be an array");
    s.weights.clear();
    for (const auto& e : w) s.weights.push_back(parse_weight(e));
  } else if (s.centers.size() != 1) {
    s.weights.assign(s.centers.size(), Complex(1.0, 0.0));
  }
  if (s.weights.size() != s.centers.size())
    throw ConfigError("key \"weights\" must match \"centers\" in length");
  s.width = get_double(obj, "width", s.width);
  s.momentum = get_double(obj, "momentum", s.momentum);
  return s;
}

TracedSpec parse_traced(const json& obj, size_t index) {
  std::ostringstream where;
  where << "traced[" << index << "]";
  check_keys(obj, {"closed_form", "kind", "dim", "coupling", "occupation"},
             where.str());
  TracedSpec t;
  if (obj.contains("closed_form")) {
    if (obj.size() != 1)
      throw ConfigError("key \"closed_form\" in " + where.str() +
                        " excludes modeled-oscillator keys");
    const json& cf = obj.at("closed_form");
    if (!cf.is_object())
      throw ConfigError("key \"closed_form\" must be an object");
    check_keys(cf, {"alpha", "n_exp"}, where.str() + ".closed_form");
    t.closed_form = true;
    t.alpha = get_double(cf, "alpha", t.alpha);
    t.n_exp = get_double(cf, "n_exp", t.n_exp);
    return t;
  }
  t.kind = oscillator_kind_from_string(
      get_string(obj, "kind", to_string(t.kind)));
  t.dim = static_cast<Index>(get_int(obj, "dim", t.dim));
  t.coupling = get_double(obj, "coupling", t.coupling);
  t.occupation = get_double(obj, "occupation", t.occupation);
  return t;
}

ObservedSpec parse_observed(const json& obj, size_t index) {
  std::ostringstream where;
  where << "observed[" << index << "]";
  check_keys(obj, {"kind", "dim", "coupling", "occupation"}, where.str());
  ObservedSpec o;
  o.kind = oscillator_kind_from_string(get_string(obj, "kind", to_string(o.kind)));
  o.dim = static_cast<Index>(get_int(obj, "dim", o.dim));
  o.coupling = get_double(obj, "coupling", o.coupling);
  o.occupation = get_double(obj, "occupation", o.occupation);
  return o;
}

PartitionSpec parse_partition(const json& obj) {
  check_keys(obj, {"type", "cells", "cuts"}, "partition");
  PartitionSpec p;
  p.type = get_string(obj, "type", p.type);
  if (p.type == "uniform") {
    if (obj.contains("cuts"))
      throw ConfigError("key \"cuts\" only applies to partition type \"cuts\"");
    p.cells = static_cast<int>(get_int(obj, "cells", p.cells));
  } else if (p.type == "cuts") {
    if (obj.contains("cells"))
      throw ConfigError("key \"cells\" only applies to partition type \"uniform\"");
    if (!obj.contains("cuts"))
      throw ConfigError("partition type \"cuts\" requires key \"cuts\"");
    p.cuts = get_double_array(obj.at("cuts"), "cuts");
  } else {
    throw ConfigError("key \"type\" in partition must be \"uniform\" or \"cuts\"");
  }
  return p;
}

PvmSpec parse_pvm(const json& obj) {
  check_keys(obj, {"strategy", "rank"}, "pvm");
  PvmSpec p;
  p.strategy = get_string(obj, "strategy", p.strategy);
  if (p.strategy != "heuristic" && p.strategy != "exhaustive" &&
      p.strategy != "fixed")
    throw ConfigError(
        "key \"strategy\" in pvm must be \"heuristic\", \"exhaustive\" or \"fixed\"");
  p.rank = static_cast<int>(get_int(obj, "rank", p.rank));
  if (p.rank < 0) throw ConfigError("key \"rank\" in pvm must be >= 0");
  return p;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("scenario must be a JSON object");
  check_keys(root,
             {"schema", "name", "grid", "system", "traced", "observed", "times",
              "partition", "pvm", "tol", "cap", "seed"},
             "scenario");
  if (!root.contains("schema"))
    throw ConfigError("missing key \"schema\" (expected 1)");
  if (!root.at("schema").is_number_integer() ||
      root.at("schema").get<std::int64_t>() != kScenarioSchema)
    throw ConfigError("key \"schema\" must be the integer 1");

  Scenario s;
  s.name = get_string(root, "name", s.name);
  if (root.contains("grid")) s.grid = parse_grid(root.at("grid"));
  if (root.contains("system")) s.system = parse_system(root.at("system"));
  if (root.contains("traced")) {
    const json& arr = root.at("traced");
    if (!arr.is_array()) throw ConfigError("key \"traced\" must be an array");
    for (size_t i = 0; i < arr.size(); ++i)
      s.traced.push_back(parse_traced(arr[i], i));
  }
  if (root.contains("observed")) {
    const json& arr = root.at("observed");
    if (!arr.is_array()) throw ConfigError("key \"observed\" must be an array");
    for (size_t i = 0; i < arr.size(); ++i)
      s.observed.push_back(parse_observed(arr[i], i));
  }
  if (root.contains("times")) {
    s.times = get_double_array(root.at("times"), "times");
    if (s.times.empty()) throw ConfigError("key \"times\" must not be empty");
    for (size_t i = 0; i < s.times.size(); ++i) {
      if (s.times[i] < 0.0) throw ConfigError("key \"times\" must be >= 0");
      if (i > 0 && s.times[i] <= s.times[i - 1])
        throw ConfigError("key \"times\" must be strictly increasing");
    }
  }
  if (root.contains("partition")) s.partition = parse_partition(root.at("partition"));
  if (root.contains("pvm")) s.pvm = parse_pvm(root.at("pvm"));
  s.tol = get_double(root, "tol", s.tol);
  if (s.tol <= 0.0) throw ConfigError("key \"tol\" must be > 0");
  if (root.contains("cap")) {
    const std::int64_t cap = get_int(root, "cap", 0);
    if (cap < 2) throw ConfigError("key \"cap\" must be >= 2");
    s.cap = static_cast<Index>(cap);
  }
  const std::int64_t seed = get_int(root, "seed", static_cast<std::int64_t>(s.seed));
  if (seed < 0) throw ConfigError("key \"seed\" must be >= 0");
  s.seed = static_cast<std::uint64_t>(seed);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_json(const Scenario& s) {
  ordered_json root;
  root["schema"] = kScenarioSchema;
  root["name"] = s.name;
  root["grid"] = {{"x_min", s.grid.x_min}, {"x_max", s.grid.x_max}, {"n", s.grid.n}};
  ordered_json sys;
  sys["type"] = s.system.type;
  sys["centers"] = s.system.centers;
  ordered_json weights = ordered_json::array();
  for (const auto& w : s.system.weights)
    weights.push_back(ordered_json::array({w.real(), w.imag()}));
  sys["weights"] = weights;
  sys["width"] = s.system.width;
  sys["momentum"] = s.system.momentum;
  root["system"] = sys;
  ordered_json traced = ordered_json::array();
  for (const auto& t : s.traced) {
    ordered_json e;
    if (t.closed_form) {
      e["closed_form"] = {{"alpha", t.alpha}, {"n_exp", t.n_exp}};
    } else {
      e["kind"] = to_string(t.kind);
      e["dim"] = t.dim;
      e["coupling"] = t.coupling;
      e["occupation"] = t.occupation;
    }
    traced.push_back(e);
  }
  root["traced"] = traced;
  ordered_json observed = ordered_json::array();
  for (const auto& o : s.observed) {
    ordered_json e;
    e["kind"] = to_string(o.kind);
    e["dim"] = o.dim;
    e["coupling"] = o.coupling;
    e["occupation"] = o.occupation;
    observed.push_back(e);
  }
  root["observed"] = observed;
  root["times"] = s.times;
  ordered_json part;
  part["type"] = s.partition.type;
  if (s.partition.type == "uniform")
    part["cells"] = s.partition.cells;
  else
    part["cuts"] = s.partition.cuts;
  root["partition"] = part;
  root["pvm"] = {{"strategy", s.pvm.strategy}, {"rank", s.pvm.rank}};
  root["tol"] = s.tol;
  root["cap"] = s.cap;
  root["seed"] = s.seed;
  return root.dump();
}

std::string scenario_hash(const Scenario& s) {
  const std::string text = scenario_json(s);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

Grid make_grid(const GridSpec& g) { return Grid(g.x_min, g.x_max, g.n); }

CvDensity make_system_state(const Grid& grid, const SystemSpec& sys) {
  if (sys.type == "gaussian") {
    if (sys.centers.size() != 1)
      throw ConfigError("system type \"gaussian\" takes exactly one center");
    CVector psi = gaussian_wavepacket(grid, sys.centers[0], sys.width, sys.momentum);
    return pure_state_density(grid, psi);
  }
  if (sys.momentum != 0.0)
    throw ConfigError("system type \"cat\" does not take a momentum");
  return cat_state(grid, sys.centers, sys.weights, sys.width);
}

EnvEnsemble make_ensemble(const Scenario& s) {
  EnvEnsemble ens;
  for (const auto& o : s.observed)
    ens.observed.push_back(make_oscillator_env(o.dim, o.kind, o.coupling, o.occupation));
  for (const auto& t : s.traced) {
    if (t.closed_form) continue;  // handled as a closed-form kernel tag
    ens.traced.push_back(make_oscillator_env(t.dim, t.kind, t.coupling, t.occupation));
  }
  return ens;
}

}  // namespace sbscv
