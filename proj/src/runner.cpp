#include "sbscv/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sbscv/version.hpp"

namespace sbscv {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Restores the ambient dimension cap on scope exit.
struct CapGuard {
  Index old_cap;
  explicit CapGuard(Index new_cap) : old_cap(dimension_cap()) {
    if (new_cap > 0) set_dimension_cap(new_cap);
  }
  ~CapGuard() { set_dimension_cap(old_cap); }
};

Partition make_partition(const Grid& grid, const PartitionSpec& spec) {
  if (spec.type == "uniform") return make_uniform_partition(grid, spec.cells);
  return make_cut_partition(grid, spec.cuts);
}

// A modeled traced environment must be converged: doubling its truncation may
// not move any characteristic-function value that enters the kernel by 1e-6
// or more, across every stored grid offset and every requested time.
void check_truncation(const std::vector<EnvModel>& traced,
                      const std::vector<TracedSpec>& specs, const Grid& grid,
                      const std::vector<double>& times) {
  size_t modeled = 0;
  for (const auto& spec : specs) {
    if (spec.closed_form) continue;
    const EnvModel& env = traced.at(modeled++);
    const EnvModel refined =
        make_oscillator_env(2 * spec.dim, spec.kind, spec.coupling, spec.occupation);
    for (double t : times) {
      for (Index d = -(grid.n - 1); d <= grid.n - 1; ++d) {
        const double s = t * static_cast<double>(d) * grid.dx() * env.g;
        const double drift = std::abs(characteristic_function(env, s) -
                                      characteristic_function(refined, s));
        if (drift >= 1e-6) {
          std::ostringstream msg;
          msg << "truncation: environment '" << env.label
              << "' characteristic function moves by " << drift << " at s = " << s
              << " when the truncation is doubled; increase dim";
          throw NumericError(msg.str());
        }
      }
    }
  }
}

GammaKernel build_gamma(const std::vector<EnvModel>& traced,
                        const std::vector<TracedSpec>& specs, double t,
                        const Grid& grid) {
  GammaKernel gamma =
      traced.empty() ? unit_gamma(grid, t) : gamma_from_envs(traced, t, grid);
  for (const auto& spec : specs) {
    if (!spec.closed_form) continue;
    gamma = combine_gamma(gamma, gaussian_gamma(t, spec.alpha, spec.n_exp, grid));
  }
  return gamma;
}

// Half trace norm of the cross-cell part of the decohered system state. The
// conditional unitary is block-diagonal over grid points, so this equals the
// joint-level off-diagonal half norm exactly.
double offdiag_half_norm(const CvDensity& rho_dec, const Partition& partition) {
  CMatrix m = rho_dec.matrix();
  for (Index i = 0; i < partition.grid.n; ++i)
    for (Index j = 0; j < partition.grid.n; ++j)
      if (partition.cell_of[i] == partition.cell_of[j]) m(i, j) = Complex(0.0, 0.0);
  return 0.5 * trace_norm(m);
}

}  // namespace

RunOutput run(const Scenario& scenario) {
  CapGuard cap_guard(scenario.cap);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  const Grid grid = make_grid(scenario.grid);
  const CvDensity rho_s = make_system_state(grid, scenario.system);
  rho_s.validate();
  const EnvEnsemble ens = make_ensemble(scenario);
  check_truncation(ens.traced, scenario.traced, grid, scenario.times);

  const Partition partition = make_partition(grid, scenario.partition);
  const BranchData branches = make_branches(rho_s, partition);
  const bool has_observed = !ens.observed.empty();
  const bool multi_observed = ens.observed.size() >= 2;

  // "fixed" freezes the heuristic assignment of the first time point.
  EnvPvm fixed_pvm;
  bool fixed_ready = false;

  RunOutput out;
  out.scenario = scenario;

  for (double t : scenario.times) {
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.t = t;

    const GammaKernel gamma = build_gamma(ens.traced, scenario.traced, t, grid);
    gamma.validate(1e-10);
    const CvDensity rho_dec = apply_decoherence(rho_s, gamma);

    // Off-diagonal battery: one estimate per ordered cell pair; the summed
    // bound takes the tighter orientation of each unordered pair.
    const int n_cells = partition.n_cells();
    std::vector<std::vector<double>> kup(n_cells, std::vector<double>(n_cells, nan));
    for (int i = 0; i < n_cells; ++i)
      for (int j = 0; j < n_cells; ++j) {
        if (i == j) continue;
        BoundReport r = kupsch_offdiag_bound(
            rho_s, gamma, partition.cells[static_cast<size_t>(i)],
            partition.cells[static_cast<size_t>(j)], scenario.tol);
        kup[static_cast<size_t>(i)][static_cast<size_t>(j)] = r.rhs;
        rec.reports.push_back(std::move(r));
      }

    double rhs_sum = 0.0;
    for (int i = 0; i < n_cells; ++i)
      for (int j = i + 1; j < n_cells; ++j) {
        rhs_sum +=
            std::min(kup[static_cast<size_t>(i)][static_cast<size_t>(j)],
                     kup[static_cast<size_t>(j)][static_cast<size_t>(i)]);
      }
    rec.offdiag_rhs_sum = rhs_sum;
    rec.offdiag_lhs = offdiag_half_norm(rho_dec, partition);
    rec.reports.push_back(make_report("offdiag_exact", rec.offdiag_lhs, rhs_sum,
                                      scenario.tol));

    if (has_observed) {
      JointState rho_t = joint_product(rho_dec, ens.observed);
      apply_conditional_unitary(rho_t, ens.observed, t);

      EnvPvm pvm;
      if (scenario.pvm.strategy == "exhaustive") {
        pvm = exhaustive_env_pvm(branches, ens.observed, t);
      } else if (scenario.pvm.strategy == "fixed") {
        if (!fixed_ready) {
          fixed_pvm = heuristic_env_pvm(branches, ens.observed, t, scenario.pvm.rank);
          fixed_ready = true;
        }
        pvm = fixed_pvm;
      } else {
        pvm = heuristic_env_pvm(branches, ens.observed, t, scenario.pvm.rank);
      }

      BoundReport diag =
          multi_observed
              ? diagonal_bound_multi(rho_t, partition, pvm, branches, ens.observed, t,
                                     scenario.tol)
              : diagonal_bound(rho_t, partition, pvm, branches, ens.observed, t,
                               scenario.tol);
      rec.diag_lhs = diag.lhs;
      rec.diag_rhs = diag.rhs;

      BoundReport further = further_diagonal_bound(rho_t, partition, pvm, branches,
                                                   ens.observed, t, scenario.tol);

      const SbsCandidate cand = build_sbs_candidate(rho_t, partition, pvm, branches);
      rec.norm_const = cand.norm_const;
      rec.sbs_dist = sbs_distance(rho_t, cand);

      // State discrimination on the environment side: kept-branch priors,
      // conditional environment states, the PVM cells as the measurement.
      double kept_weight = 0.0;
      for (int cell : branches.kept)
        kept_weight += branches.weights[static_cast<size_t>(cell)];
      std::vector<double> priors;
      std::vector<CMatrix> states;
      std::vector<CMatrix> effects;
      const Index d = rho_t.env_dim();
      CMatrix q_sum = CMatrix::Zero(d, d);
      for (size_t slot = 0; slot < branches.kept.size(); ++slot) {
        priors.push_back(branches.weights[static_cast<size_t>(branches.kept[slot])] /
                         kept_weight);
        states.push_back(lambda_map(branches.branches[slot], ens.observed, t).mat);
        std::vector<CMatrix> qs;
        for (const auto& part : pvm.envs) qs.push_back(part.cells.at(slot));
        effects.push_back(qs.size() == 1 ? qs[0] : kron_all(qs));
        q_sum += effects.back();
      }
      effects.push_back(CMatrix(CMatrix::Identity(d, d) - q_sum));
      rec.qsd_err = qsd_error(priors, states, effects);

      double max_fid = 0.0;
      for (const RMatrix& f : branch_fidelity_matrices(cand))
        for (Index i = 0; i < f.rows(); ++i)
          for (Index j = 0; j < f.cols(); ++j)
            if (i != j && std::isfinite(f(i, j))) max_fid = std::max(max_fid, f(i, j));
      rec.max_branch_fidelity = max_fid;

      rec.reports.push_back(std::move(diag));
      rec.reports.push_back(std::move(further));
      rec.reports.push_back(make_report("chain_total", rec.sbs_dist,
                                        rec.diag_rhs + rec.offdiag_rhs_sum,
                                        scenario.tol));
    } else {
      rec.sbs_dist = nan;
      rec.diag_lhs = nan;
      rec.diag_rhs = nan;
      rec.norm_const = nan;
      rec.qsd_err = nan;
      rec.max_branch_fidelity = nan;
    }

    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    out.records.push_back(std::move(rec));
  }

  // CSVs: fixed column sets, %.17g numbers, no wall-clock fields.
  std::string env_dims;
  if (ens.observed.empty()) {
    env_dims = "-";
  } else {
    std::ostringstream ed;
    for (size_t k = 0; k < ens.observed.size(); ++k) {
      if (k) ed << "x";
      ed << ens.observed[k].dim;
    }
    env_dims = ed.str();
  }
  const std::string pvm_strategy = has_observed ? scenario.pvm.strategy : "-";

  std::ostringstream bounds;
  bounds << "t,name,lhs,rhs,margin,satisfied,n_grid,env_dims,pvm_strategy,seed\n";
  for (const auto& rec : out.records)
    for (const auto& r : rec.reports)
      bounds << fmt(rec.t) << ',' << r.name << ',' << fmt(r.lhs) << ',' << fmt(r.rhs)
             << ',' << fmt(r.margin) << ',' << (r.satisfied ? 1 : 0) << ','
             << grid.n << ',' << env_dims << ',' << pvm_strategy << ','
             << scenario.seed << '\n';
  out.bounds_csv = bounds.str();

  std::ostringstream records;
  records << "t,sbs_distance,diag_lhs,diag_rhs,offdiag_lhs,offdiag_rhs_sum,"
             "norm_const,qsd_error,max_branch_fidelity\n";
  for (const auto& rec : out.records)
    records << fmt(rec.t) << ',' << fmt(rec.sbs_dist) << ',' << fmt(rec.diag_lhs)
            << ',' << fmt(rec.diag_rhs) << ',' << fmt(rec.offdiag_lhs) << ','
            << fmt(rec.offdiag_rhs_sum) << ',' << fmt(rec.norm_const) << ','
            << fmt(rec.qsd_err) << ',' << fmt(rec.max_branch_fidelity) << '\n';
  out.records_csv = records.str();

  nlohmann::ordered_json manifest;
  manifest["name"] = scenario.name;
  manifest["config_hash"] = scenario_hash(scenario);
  manifest["seed"] = scenario.seed;
  manifest["version"] = kVersion;
  manifest["schema"] = kScenarioSchema;
  manifest["n_records"] = out.records.size();
  manifest["config"] = nlohmann::ordered_json::parse(scenario_json(scenario));
  out.manifest_json = manifest.dump(2) + "\n";

  return out;
}

void write_run_output(const RunOutput& out, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ResourceError("cannot create output directory: " + out_dir);
  const auto write = [&](const std::string& name, const std::string& content) {
    const fs::path path = fs::path(out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ResourceError("cannot write " + path.string());
    f << content;
  };
  write("bounds.csv", out.bounds_csv);
  write("records.csv", out.records_csv);
  write("manifest.json", out.manifest_json);
}

std::string filter_bounds_csv(const std::string& bounds_csv, const std::string& name) {
  std::istringstream in(bounds_csv);
  std::ostringstream out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      out << line << '\n';
      header = false;
      continue;
    }
    const size_t c0 = line.find(',');
    if (c0 == std::string::npos) continue;
    const size_t c1 = line.find(',', c0 + 1);
    if (c1 == std::string::npos) continue;
    if (line.substr(c0 + 1, c1 - c0 - 1) == name) out << line << '\n';
  }
  return out.str();
}

}  // namespace sbscv
