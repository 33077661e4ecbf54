#pragma once

// Scenario runner: evaluates the full bound battery over the configured time
// sweep and emits deterministic CSV/manifest artifacts.

#include <iosfwd>

#include "sbscv/bounds.hpp"
#include "sbscv/scenario.hpp"

namespace sbscv {

struct RunRecord {
  double t = 0.0;
  // Exact quantities (NaN when the scenario has no observed environment).
  double sbs_dist = 0.0;
  double diag_lhs = 0.0;
  double diag_rhs = 0.0;
  double offdiag_lhs = 0.0;      // exact off-diagonal half norm
  double offdiag_rhs_sum = 0.0;  // summed per-block estimates
  double norm_const = 0.0;       // candidate normalization N(t)
  double qsd_err = 0.0;          // 1 - weighted discrimination success
  double max_branch_fidelity = 0.0;
  double wall_ms = 0.0;  // stdout/record only, never in the CSVs
  std::vector<BoundReport> reports;
};

struct RunOutput {
  Scenario scenario;
  std::vector<RunRecord> records;
  std::string bounds_csv;   // t,name,lhs,rhs,margin,satisfied,n_grid,env_dims,pvm_strategy,seed
  std::string records_csv;  // per-time exact summary
  std::string manifest_json;
};

RunOutput run(const Scenario& scenario);

// Write bounds.csv, records.csv and manifest.json under out_dir (created if
// needed).
void write_run_output(const RunOutput& out, const std::string& out_dir);

// Rows of bounds_csv whose name column matches exactly.
std::string filter_bounds_csv(const std::string& bounds_csv, const std::string& name);

struct VerifySuiteOptions {
  std::string suite = "fast";  // fast | all
  std::uint64_t seed = 0;
  // Test fixture: build the decohered state in the off-diagonal check from a
  // sign-flipped kernel exponent so the corresponding bound must fail.
  bool inject_gamma_sign_error = false;
};

// Runs the invariant/property suites with a seeded RNG; prints one line per
// check plus per-bound pass counts; returns 0 iff everything passed.
int run_verify(const VerifySuiteOptions& options, std::ostream& os);

}  // namespace sbscv
