// Python bindings for the core pipeline: grid states, environment models,
// decoherence kernels, partitions/PVMs, the bound evaluators, and the scenario
// runner. Matrices cross the boundary as NumPy arrays via Eigen.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sbscv/bounds.hpp"
#include "sbscv/dynamics.hpp"
#include "sbscv/env.hpp"
#include "sbscv/errors.hpp"
#include "sbscv/grid.hpp"
#include "sbscv/runner.hpp"
#include "sbscv/sbs.hpp"
#include "sbscv/scenario.hpp"
#include "sbscv/version.hpp"

namespace py = pybind11;
using namespace sbscv;

namespace {

std::map<std::string, double> report_details(const BoundReport& r) {
  return std::map<std::string, double>(r.details.begin(), r.details.end());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Grid-exact laboratory for broadcast-structure bounds";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);

  // ---- numerics --------------------------------------------------------
  m.def("trace_norm", &trace_norm, py::arg("a"));
  m.def("trace_distance", &trace_distance, py::arg("a"), py::arg("b"));
  m.def("fidelity", &fidelity, py::arg("rho"), py::arg("sigma"));
  m.def("herm_expm", &herm_expm, py::arg("h"), py::arg("s"));
  m.def(
      "partial_trace",
      [](const CMatrix& mat, const std::vector<Index>& dims,
         const std::vector<int>& keep) {
        return partial_trace(DensityMatrix(mat, dims), keep).mat;
      },
      py::arg("mat"), py::arg("dims"), py::arg("keep"));
  m.def("dimension_cap", &dimension_cap);
  m.def("set_dimension_cap", &set_dimension_cap, py::arg("cap"));

  // ---- grid states -----------------------------------------------------
  py::class_<Grid>(m, "Grid")
      .def(py::init<double, double, Index>(), py::arg("x_min"), py::arg("x_max"),
           py::arg("n"))
      .def_readonly("x_min", &Grid::x_min)
      .def_readonly("x_max", &Grid::x_max)
      .def_readonly("n", &Grid::n)
      .def("dx", &Grid::dx)
      .def("points", &Grid::points);

  py::class_<Interval>(m, "Interval")
      .def(py::init([](double a, double b) { return Interval{a, b}; }),
           py::arg("a"), py::arg("b"))
      .def_readonly("a", &Interval::a)
      .def_readonly("b", &Interval::b);

  py::class_<CvDensity>(m, "CvDensity")
      .def_readonly("grid", &CvDensity::grid)
      .def_readonly("kernel", &CvDensity::kernel)
      .def("matrix", &CvDensity::matrix)
      .def("validate", &CvDensity::validate, py::arg("trace_tol") = 1e-8,
           py::arg("herm_tol") = 1e-10, py::arg("psd_tol") = 1e-10);

  m.def("gaussian_wavepacket", &gaussian_wavepacket, py::arg("grid"),
        py::arg("center"), py::arg("width"), py::arg("momentum") = 0.0);
  m.def("pure_state_density", &pure_state_density, py::arg("grid"), py::arg("psi"));
  m.def("cat_state", &cat_state, py::arg("grid"), py::arg("centers"),
        py::arg("weights"), py::arg("width"));

  // ---- environments ----------------------------------------------------
  py::class_<EnvModel>(m, "EnvModel")
      .def(py::init<CMatrix, double, CMatrix, std::string>(), py::arg("b"),
           py::arg("g"), py::arg("rho0"), py::arg("label") = "env")
      .def_readonly("dim", &EnvModel::dim)
      .def_readonly("g", &EnvModel::g)
      .def_readonly("b", &EnvModel::b)
      .def_readonly("rho0", &EnvModel::rho0)
      .def_readonly("label", &EnvModel::label);

  m.def(
      "make_oscillator_env",
      [](Index dim, const std::string& kind, double coupling, double occupation) {
        return make_oscillator_env(dim, oscillator_kind_from_string(kind),
                                   coupling, occupation);
      },
      py::arg("dim"), py::arg("kind"), py::arg("coupling"),
      py::arg("occupation") = 0.0);
  m.def("characteristic_function", &characteristic_function, py::arg("env"),
        py::arg("s"));
  m.def("branch_state", &branch_state, py::arg("env"), py::arg("t"), py::arg("x"));
  m.def("truncation_drift", &truncation_drift, py::arg("env"), py::arg("refined"),
        py::arg("s_max"), py::arg("n_samples") = 64);

  // ---- decoherence kernels and dynamics ---------------------------------
  py::class_<GammaKernel>(m, "GammaKernel")
      .def_readonly("t", &GammaKernel::t)
      .def_readonly("analytic_gaussian", &GammaKernel::analytic_gaussian)
      .def("matrix", &GammaKernel::matrix)
      .def("validate", &GammaKernel::validate, py::arg("tol") = 1e-12);

  m.def("gamma_from_envs", &gamma_from_envs, py::arg("traced"), py::arg("t"),
        py::arg("grid"));
  m.def("gaussian_gamma", &gaussian_gamma, py::arg("t"), py::arg("alpha"),
        py::arg("n_exp"), py::arg("grid"));
  m.def("unit_gamma", &unit_gamma, py::arg("grid"), py::arg("t"));
  m.def("combine_gamma", &combine_gamma, py::arg("a"), py::arg("b"));
  m.def("apply_decoherence", &apply_decoherence, py::arg("rho"), py::arg("gamma"));

  py::class_<JointState>(m, "JointState")
      .def_readonly("grid", &JointState::grid)
      .def_readonly("env_dims", &JointState::env_dims)
      .def_readonly("mat", &JointState::mat);

  m.def("joint_product", &joint_product, py::arg("sys"), py::arg("envs"));
  m.def(
      "evolve_joint",
      [](JointState state, const std::vector<EnvModel>& envs, double t) {
        apply_conditional_unitary(state, envs, t);
        return state;
      },
      py::arg("state"), py::arg("envs"), py::arg("t"));

  // ---- partitions, PVMs, candidates -------------------------------------
  py::class_<Partition>(m, "Partition")
      .def_readonly("cells", &Partition::cells)
      .def("n_cells", &Partition::n_cells)
      .def("projector", &Partition::projector, py::arg("cell"));

  m.def("make_uniform_partition", &make_uniform_partition, py::arg("grid"),
        py::arg("k"));
  m.def("make_cut_partition", &make_cut_partition, py::arg("grid"), py::arg("cuts"));

  py::class_<BranchData>(m, "BranchData")
      .def_readonly("weights", &BranchData::weights)
      .def_readonly("kept", &BranchData::kept)
      .def_readonly("means", &BranchData::means);

  m.def("make_branches", &make_branches, py::arg("rho_s"), py::arg("partition"));

  py::class_<EnvPvm>(m, "EnvPvm")
      .def(
          "cells",
          [](const EnvPvm& pvm, int env) {
            return pvm.envs.at(static_cast<size_t>(env)).cells;
          },
          py::arg("env"))
      .def("remainder", [](const EnvPvm& pvm, int env) {
        return pvm.envs.at(static_cast<size_t>(env)).remainder;
      });

  m.def("heuristic_env_pvm", &heuristic_env_pvm, py::arg("branches"),
        py::arg("envs"), py::arg("t"), py::arg("rank") = 0);
  m.def("exhaustive_env_pvm", &exhaustive_env_pvm, py::arg("branches"),
        py::arg("envs"), py::arg("t"));
  m.def("pvm_objective", &pvm_objective, py::arg("pvm"), py::arg("branches"),
        py::arg("envs"), py::arg("t"));

  py::class_<SbsCandidate>(m, "SbsCandidate")
      .def_readonly("norm_const", &SbsCandidate::norm_const)
      .def_readonly("kept", &SbsCandidate::kept)
      .def_readonly("weights", &SbsCandidate::weights)
      .def_property_readonly(
          "mat", [](const SbsCandidate& c) { return c.state.mat; });

  m.def("build_sbs_candidate", &build_sbs_candidate, py::arg("rho_t"),
        py::arg("partition"), py::arg("pvm"), py::arg("branches"));
  m.def("sbs_distance", &sbs_distance, py::arg("rho_t"), py::arg("cand"));
  m.def("qsd_error", &qsd_error, py::arg("priors"), py::arg("states"),
        py::arg("measurement"));

  // ---- bound evaluators --------------------------------------------------
  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("name", &BoundReport::name)
      .def_readonly("lhs", &BoundReport::lhs)
      .def_readonly("rhs", &BoundReport::rhs)
      .def_readonly("margin", &BoundReport::margin)
      .def_readonly("satisfied", &BoundReport::satisfied)
      .def_readonly("context", &BoundReport::context)
      .def_property_readonly("details", &report_details)
      .def("__repr__", [](const BoundReport& r) {
        return "<BoundReport " + r.name + " lhs=" + std::to_string(r.lhs) +
               " rhs=" + std::to_string(r.rhs) +
               (r.satisfied ? " satisfied>" : " NOT satisfied>");
      });

  m.def("kupsch_offdiag_bound", &kupsch_offdiag_bound, py::arg("rho_s"),
        py::arg("gamma"), py::arg("di"), py::arg("dj"), py::arg("tol") = 1e-8);
  m.def("gaussian_offdiag_bound", &gaussian_offdiag_bound, py::arg("rho_s"),
        py::arg("t"), py::arg("alpha"), py::arg("n_exp"), py::arg("di"),
        py::arg("dj"), py::arg("tol") = 1e-8);
  m.def("diagonal_bound", &diagonal_bound, py::arg("rho_t"), py::arg("partition"),
        py::arg("pvm"), py::arg("branches"), py::arg("envs"), py::arg("t"),
        py::arg("tol") = 1e-8);
  m.def("diagonal_bound_multi", &diagonal_bound_multi, py::arg("rho_t"),
        py::arg("partition"), py::arg("pvm"), py::arg("branches"), py::arg("envs"),
        py::arg("t"), py::arg("tol") = 1e-8);
  m.def("further_diagonal_bound", &further_diagonal_bound, py::arg("rho_t"),
        py::arg("partition"), py::arg("pvm"), py::arg("branches"), py::arg("envs"),
        py::arg("t"), py::arg("tol") = 1e-8);
  m.def("telescopic_bound", &telescopic_bound, py::arg("a"), py::arg("b"),
        py::arg("tol") = 1e-10);
  m.def("trace_distance_rescale", &trace_distance_rescale, py::arg("L"),
        py::arg("eta"));
  m.def("pure_distance_formula_check", &pure_distance_formula_check,
        py::arg("psi"), py::arg("phi"), py::arg("tol") = 1e-10);

  // ---- scenarios and the runner ------------------------------------------
  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("times", &Scenario::times)
      .def_readonly("seed", &Scenario::seed);

  m.def("parse_scenario", &parse_scenario, py::arg("json_text"));
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("scenario_hash", &scenario_hash, py::arg("scenario"));

  m.def(
      "run_scenario",
      [](const Scenario& scenario) {
        const RunOutput out = run(scenario);
        py::dict d;
        d["bounds_csv"] = out.bounds_csv;
        d["records_csv"] = out.records_csv;
        d["manifest_json"] = out.manifest_json;
        py::list recs;
        for (const auto& rec : out.records) {
          py::dict r;
          r["t"] = rec.t;
          r["sbs_distance"] = rec.sbs_dist;
          r["diag_lhs"] = rec.diag_lhs;
          r["diag_rhs"] = rec.diag_rhs;
          r["offdiag_lhs"] = rec.offdiag_lhs;
          r["offdiag_rhs_sum"] = rec.offdiag_rhs_sum;
          r["norm_const"] = rec.norm_const;
          r["qsd_error"] = rec.qsd_err;
          r["max_branch_fidelity"] = rec.max_branch_fidelity;
          recs.append(r);
        }
        d["records"] = recs;
        return d;
      },
      py::arg("scenario"));
}
