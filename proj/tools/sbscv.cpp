// Command-line front end: scenario runs, the invariant suite, and single-bound
// extraction from a run's CSV output.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sbscv/errors.hpp"
#include "sbscv/matrix.hpp"
#include "sbscv/runner.hpp"
#include "sbscv/scenario.hpp"

namespace {

// Echo the per-time summary to stdout; artifacts land in out_dir.
int do_run(const std::string& path, const std::string& out_dir,
           std::int64_t seed, std::int64_t cap) {
  sbscv::Scenario scenario = sbscv::load_scenario(path);
  if (seed >= 0) scenario.seed = static_cast<std::uint64_t>(seed);
  if (cap > 0) scenario.cap = static_cast<sbscv::Index>(cap);
  const sbscv::RunOutput out = sbscv::run(scenario);
  sbscv::write_run_output(out, out_dir);
  std::cout << "scenario: " << scenario.name << " (hash "
            << sbscv::scenario_hash(scenario) << ")\n";
  for (const auto& rec : out.records) {
    std::cout << "t=" << rec.t;
    int unsatisfied = 0;
    for (const auto& rep : rec.reports)
      if (!rep.satisfied) ++unsatisfied;
    std::cout << "  bounds=" << rec.reports.size()
              << "  unsatisfied=" << unsatisfied << "  wall_ms=" << rec.wall_ms
              << "\n";
  }
  std::cout << "wrote " << out_dir << "/bounds.csv, records.csv, manifest.json\n";
  for (const auto& rec : out.records)
    for (const auto& rep : rec.reports)
      if (!rep.satisfied) {
        std::cout << "warning: " << rep.name << " at t=" << rec.t
                  << " not satisfied (lhs=" << rep.lhs << ", rhs=" << rep.rhs
                  << ")\n";
        return 2;
      }
  return 0;
}

int do_bounds(const std::string& path, const std::string& only,
              std::int64_t cap) {
  sbscv::Scenario scenario = sbscv::load_scenario(path);
  if (cap > 0) scenario.cap = static_cast<sbscv::Index>(cap);
  const sbscv::RunOutput out = sbscv::run(scenario);
  const std::string rows = sbscv::filter_bounds_csv(out.bounds_csv, only);
  std::cout << rows;
  // header-only output means the run never produced that estimator
  if (rows.find('\n') == rows.rfind('\n')) {
    std::cerr << "no rows for bound \"" << only << "\"\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-variable broadcast-structure laboratory"};
  app.require_subcommand(1);

  std::int64_t cap = 0;
  app.add_option("--cap", cap, "Joint-dimension cap override")
      ->check(CLI::PositiveNumber);

  auto* run_cmd = app.add_subcommand("run", "Evaluate a scenario and write CSV artifacts");
  std::string scenario_path;
  std::string out_dir = "out";
  std::int64_t seed = -1;
  run_cmd->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory (default: out)");
  run_cmd->add_option("--seed", seed, "Seed override");

  auto* verify_cmd = app.add_subcommand("verify", "Run the invariant suite");
  std::string suite = "fast";
  std::int64_t verify_seed = 0;
  bool inject = false;
  verify_cmd->add_option("--suite", suite, "fast | all")
      ->check(CLI::IsMember({"fast", "all"}));
  verify_cmd->add_option("--seed", verify_seed, "Suite RNG seed");
  verify_cmd
      ->add_flag("--inject-gamma-sign-error", inject,
                 "Corrupt the decoherence kernel to prove the suite catches it")
      ->group("");  // hidden: test fixture

  auto* bounds_cmd =
      app.add_subcommand("bounds", "Run a scenario and print rows of one bound");
  std::string bounds_path;
  std::string only;
  bounds_cmd->add_option("scenario", bounds_path, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  bounds_cmd->add_option("--only", only, "Bound name to keep")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cap > 0) sbscv::set_dimension_cap(static_cast<sbscv::Index>(cap));
    if (run_cmd->parsed()) return do_run(scenario_path, out_dir, seed, cap);
    if (verify_cmd->parsed()) {
      sbscv::VerifySuiteOptions options;
      options.suite = suite;
      options.seed = static_cast<std::uint64_t>(verify_seed);
      options.inject_gamma_sign_error = inject;
      return sbscv::run_verify(options, std::cout);
    }
    if (bounds_cmd->parsed()) return do_bounds(bounds_path, only, cap);
  } catch (const sbscv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
