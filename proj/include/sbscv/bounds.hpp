#pragma once

// Independent evaluators for every inequality/identity the machinery relies
// on. Each evaluator computes its left-hand side exactly on the grid surrogate
// (trace norms via full spectral decompositions) and its right-hand side from
// the closed-form estimate, and reports both with the signed margin.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sbscv/sbs.hpp"

namespace sbscv {

struct BoundReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool satisfied = false;  // lhs <= rhs + tol
  double tol = 1e-8;
  std::string context;
  std::map<std::string, double> details;
};

BoundReport make_report(std::string name, double lhs, double rhs, double tol,
                        std::string context = "");

// Off-diagonal block estimate: ||P_i E_t(rho_S) P_j||_1 (matrix form, dx
// included) against sup over the cell product of 2|Γ| + |Δ_j| |∂_y Γ|, the sup
// taken over grid points plus cell endpoints (endpoints only for analytic
// kernels). When the decohered kernel vanishes identically on the block both
// sides are 0.
BoundReport kupsch_offdiag_bound(const CvDensity& rho_s, const GammaKernel& gamma,
                                 const Interval& di, const Interval& dj,
                                 double tol = 1e-8);

// ||A B||_1 <= ∫ ||A(.,z)||_L2 ||B(z,.)||_L2 dz for kernel operators, with the
// composition and both norms discretized on the given grids.
BoundReport stolz_product_bound(const std::function<Complex(double, double)>& a,
                                const std::function<Complex(double, double)>& b,
                                const Grid& xgrid, const Grid& zgrid,
                                double tol = 1e-8);

// Gaussian-kernel off-diagonal estimate for Γ = exp(-t^n alpha (x-y)^2) on two
// disjoint cells: block trace norm against
// Σ_n p_n ∬ sqrt(2 t^n alpha / pi) e^{-2 t^n alpha (x-y)^2} |psi_n(x)|^2 |psi_n(y)|^2.
BoundReport gaussian_offdiag_bound(const CvDensity& rho_s, double t, double alpha,
                                   double n_exp, const Interval& di,
                                   const Interval& dj, double tol = 1e-8);

// Diagonal-term estimate, any number of observed environments:
//   lhs = 1/2 || Σ_i (P_i ⊗ I) rho_t (P_i ⊗ I) - candidate ||_1
//   rhs = 4 sqrt( Σ_i p_i (1 - Tr{Q_i Λ_i Q_i}) ),  Q_i = ⊗_k P_i^k.
// Per-cell norms N_i land in details ("N_<cell>"), along with the candidate
// normalization cross-check and the Jensen-step slack.
BoundReport diagonal_bound(const JointState& rho_t, const Partition& partition,
                           const EnvPvm& pvm, const BranchData& branches,
                           const std::vector<EnvModel>& envs, double t,
                           double tol = 1e-8);

// Multi-environment variant: same estimate, plus — when the observed
// environments are identical, pure, and carry identical PVMs — the closed-form
// route Σ_j w_j <psi_t(x_j)|P_i|psi_t(x_j)>^{N_E} evaluated independently;
// the max per-cell deviation lands in details["route_agreement"].
BoundReport diagonal_bound_multi(const JointState& rho_t, const Partition& partition,
                                 const EnvPvm& pvm, const BranchData& branches,
                                 const std::vector<EnvModel>& envs, double t,
                                 double tol = 1e-8);

// Further diagonal estimate around the branch means x_i:
//   one env:  rhs = 4 sqrt(2 Σ_i p_i ||Λ_i - rho_{x_i}||_1)
//                 + 4 sqrt(Σ_i p_i ||rho_{x_i} - P_i rho_{x_i} P_i||_1)
//   N_E >= 2: telescoped per-environment sums
//   rhs = 4 sqrt(2 Σ_i p_i Σ_k ∫|psi_i(x)|^2 ||rho^k_x - rho^k_{x_i}||_1 dx)
//       + 4 sqrt(Σ_i p_i Σ_k ||rho^k_{x_i} - P^k_i rho^k_{x_i} P^k_i||_1).
// The min over PVMs is replaced by the supplied PVM (still an upper bound).
// Both terms are reported separately in details.
BoundReport further_diagonal_bound(const JointState& rho_t, const Partition& partition,
                                   const EnvPvm& pvm, const BranchData& branches,
                                   const std::vector<EnvModel>& envs, double t,
                                   double tol = 1e-8);

// ||⊗A_k - ⊗B_k||_1 <= Σ_j (Π_{k<j}||A_k||_1) ||A_j - B_j||_1 (Π_{k>j}||B_k||_1).
BoundReport telescopic_bound(const std::vector<CMatrix>& a,
                             const std::vector<CMatrix>& b, double tol = 1e-10);

// ||rho - eta sigma||_1 <= L implies ||rho - sigma||_1 <= 2L for eta in [0,1]:
// returns the rescaled budget 2L.
double trace_distance_rescale(double L, double eta);

// Identity check: 1/2 || |psi><psi| - |phi><phi| ||_1 (spectral) against
// sqrt(1 - |<phi|psi>|^2). details["abs_diff"] carries the deviation;
// satisfied means the two routes agree within tol.
BoundReport pure_distance_formula_check(const CVector& psi, const CVector& phi,
                                        double tol = 1e-10);

}  // namespace sbscv
