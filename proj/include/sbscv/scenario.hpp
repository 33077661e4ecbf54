#pragma once

// Scenario configuration: strict JSON (schema 1, unknown keys rejected at every
// level) describing grid, system state, environment ensemble, time sweep,
// partition and PVM strategy.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sbscv/env.hpp"
#include "sbscv/grid.hpp"

namespace sbscv {

struct GridSpec {
  double x_min = -8.0;
  double x_max = 8.0;
  Index n = 128;
};

struct SystemSpec {
  std::string type = "gaussian";  // gaussian | cat
  std::vector<double> centers{0.0};
  std::vector<Complex> weights{Complex(1.0, 0.0)};
  double width = 1.0;
  double momentum = 0.0;
};

// A traced environment: either a modeled oscillator or a closed-form Gaussian
// kernel tag exp(-t^n_exp alpha (x-y)^2).
struct TracedSpec {
  bool closed_form = false;
  // closed form
  double alpha = 1.0;
  double n_exp = 1.0;
  // modeled
  OscillatorKind kind = OscillatorKind::position;
  Index dim = 16;
  double coupling = 1.0;
  double occupation = 0.0;
};

struct ObservedSpec {
  OscillatorKind kind = OscillatorKind::position;
  Index dim = 8;
  double coupling = 1.0;
  double occupation = 0.0;
};

struct PartitionSpec {
  std::string type = "uniform";  // uniform | cuts
  int cells = 2;
  std::vector<double> cuts;
};

struct PvmSpec {
  std::string strategy = "heuristic";  // heuristic | exhaustive | fixed
  int rank = 0;                        // 0 = floor(dim / n_cells)
};

struct Scenario {
  std::string name = "scenario";
  GridSpec grid;
  SystemSpec system;
  std::vector<TracedSpec> traced;
  std::vector<ObservedSpec> observed;
  std::vector<double> times{1.0};
  PartitionSpec partition;
  PvmSpec pvm;
  double tol = 1e-8;
  Index cap = 0;  // 0 = inherit the ambient cap (SBSCV_CAP or the built-in default)
  std::uint64_t seed = 0;
};

// Parse/load with strict validation; errors name the offending key.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

// Canonical compact JSON of a scenario (used for hashing and the manifest).
std::string scenario_json(const Scenario& s);
// FNV-1a 64-bit over the canonical JSON, hex-encoded.
std::string scenario_hash(const Scenario& s);

// Materialize configured objects.
Grid make_grid(const GridSpec& g);
CvDensity make_system_state(const Grid& grid, const SystemSpec& sys);
EnvEnsemble make_ensemble(const Scenario& s);

}  // namespace sbscv
