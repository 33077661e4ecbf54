#pragma once

// Spectrum-broadcast-structure candidates: system partitions, per-environment
// PVMs, branch states, the pinched candidate Σ_i (P_i ⊗ Q_i) ρ_t (P_i ⊗ Q_i)/N,
// and the associated distances and discrimination errors.

#include <string>
#include <utility>
#include <vector>

#include "sbscv/dynamics.hpp"

namespace sbscv {

// Cells below this weight are dropped from candidate construction; asking for
// a conditional state on such a cell is an error.
inline constexpr double kEmptyBranchWeight = 1e-12;

struct Partition {
  Grid grid;
  std::vector<Interval> cells;
  std::vector<std::pair<Index, Index>> ranges;  // (first index, count) per cell
  std::vector<int> cell_of;                     // grid point -> cell index

  int n_cells() const { return static_cast<int>(cells.size()); }
  CMatrix projector(int cell) const;
};

// k equal-length cells covering [x_min, x_max).
Partition make_uniform_partition(const Grid& grid, int k);
// Cells [x_min, c_1), [c_1, c_2), ..., [c_m, x_max). Cuts strictly increasing
// and interior; every cell must contain at least one grid point.
Partition make_cut_partition(const Grid& grid, const std::vector<double>& cuts);

// p_i = Σ_{x_j in cell} K(x_j, x_j) dx.
double branch_weight(const CvDensity& rho_s, const Interval& cell);

// P_cell rho P_cell / weight; NumericError("empty branch") below the weight floor.
CvDensity conditional_branch_state(const CvDensity& rho_s, const Interval& cell);

// Branch decomposition of a system state over a partition.
struct BranchData {
  std::vector<double> weights;      // all cells, in partition order
  std::vector<int> kept;            // cells with weight > kEmptyBranchWeight
  std::vector<CvDensity> branches;  // normalized branch states, kept cells only
  std::vector<double> means;        // branch mean positions, kept cells only
};
BranchData make_branches(const CvDensity& rho_s, const Partition& partition);

// Λ_branch(t) = Σ_j |psi(x_j)|^2 dx · ⊗_k exp(-i t x_j g_k B_k) rho0_k exp(+...):
// the branch-averaged conjugation of the observed environments' initial state.
DensityMatrix lambda_map(const CvDensity& branch, const std::vector<EnvModel>& envs,
                         double t);

// Projector family on one environment: one projector per kept cell plus the
// remainder completing the identity.
struct EnvPvmPart {
  std::vector<CMatrix> cells;
  CMatrix remainder;
  std::vector<std::string> warnings;
};
struct EnvPvm {
  std::vector<EnvPvmPart> envs;  // one part per observed environment
};

// Orthogonality, idempotence and completeness (with remainder) within tol.
void validate_env_pvm(const EnvPvm& pvm, const std::vector<EnvModel>& envs,
                      double tol = 1e-10);

// Greedy PVM: cells in descending weight order take the leading eigenvectors of
// their Λ_i (per environment), Gram-Schmidt-orthogonalized against earlier
// cells. rank = 0 selects floor(dim / n_cells). Throws NumericError on rank
// starvation (dim < number of kept cells). Degenerate leading eigenvectors are
// noted in warnings and resolved by cell order.
EnvPvm heuristic_env_pvm(const BranchData& branches, const std::vector<EnvModel>& envs,
                         double t, int rank = 0);

// Discrete exhaustive search (env dim <= 6): enumerate assignments of the
// eigenbasis of Σ_i p_i Λ_i to cells/remainder, plus the two-cell Helstrom
// split, maximizing Σ_i p_i Tr{P_i Λ_i P_i}.
EnvPvm exhaustive_env_pvm(const BranchData& branches, const std::vector<EnvModel>& envs,
                          double t);

// Σ_i p_i Tr{(⊗_k P_i^k) Λ_i (⊗_k P_i^k)}: the objective the PVM searches
// maximize; also the candidate normalization N(t).
double pvm_objective(const EnvPvm& pvm, const BranchData& branches,
                     const std::vector<EnvModel>& envs, double t);

struct SbsCandidate {
  JointState state;  // normalized candidate
  double norm_const = 0.0;                 // N(t), trace before normalization
  std::vector<int> kept;                   // kept cell indices
  std::vector<double> weights;             // p_i for kept cells
  std::vector<double> cell_norms;          // N_i(t) = Tr{(P_i⊗Q_i)ρ(P_i⊗Q_i)}/p_i
  Partition partition;
  EnvPvm pvm;
};

// Σ_i (P_cell_i ⊗ Q_i) rho_t (P_cell_i ⊗ Q_i) / N with Q_i = ⊗_k P_i^k.
// NumericError("degenerate candidate") when N < 1e-12.
SbsCandidate build_sbs_candidate(const JointState& rho_t, const Partition& partition,
                                 const EnvPvm& pvm, const BranchData& branches);

// 0.5 ||rho_t - candidate||_1.
double sbs_distance(const JointState& rho_t, const SbsCandidate& cand);

// (diagonal, off-diagonal): diagonal keeps only same-cell system blocks, and
// the two parts sum back to the input exactly.
std::pair<JointState, JointState> split_diag_offdiag(const JointState& rho,
                                                     const Partition& partition);

// Per observed environment: matrix of fidelities F(rho_i^Ek, rho_j^Ek) between
// reduced branch states of the candidate, kept cells only. Diagonal 1; cells
// whose block trace falls below the weight floor give NaN rows/columns.
std::vector<RMatrix> branch_fidelity_matrices(const SbsCandidate& cand);

// State-discrimination probability error 1 - Σ_i p_i Tr{M_i rho_i M_i^dag}.
// priors must sum to 1 (1e-10); the measurement must resolve the identity
// (Σ M^dag M = I within 1e-8) and have at least as many outcomes as states.
double qsd_error(const std::vector<double>& priors, const std::vector<CMatrix>& states,
                 const std::vector<CMatrix>& measurement);

}  // namespace sbscv
