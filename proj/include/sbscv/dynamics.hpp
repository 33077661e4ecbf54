#pragma once

// Exact grid dynamics of the measurement-limit model: the decoherence kernel
// Γ(t, x, y) produced by traced environments, the entrywise decoherence map,
// the conditional unitary exp(-i t X ⊗ Σ g_k B_k) on system ⊗ observed
// environments, and the two equivalent evolution routes (full evolution with
// all N environments followed by partial traces, vs. decohere-then-evolve).

#include <vector>

#include "sbscv/env.hpp"
#include "sbscv/grid.hpp"

namespace sbscv {

// Γ depends on x - y only, so it is stored over the 2n-1 grid offsets.
struct GammaKernel {
  Grid grid;
  double t = 0.0;
  CVector offsets;  // value at offset d = i - j, stored at index d + (n-1)

  // Closed Gaussian form exp(-t^n_exp * alpha * (x-y)^2), with analytic
  // derivative 2 t^n_exp alpha (x-y) Γ.
  bool analytic_gaussian = false;
  double alpha = 0.0;
  double n_exp = 1.0;

  Complex value(Index i, Index j) const { return offsets(i - j + grid.n - 1); }
  // Γ evaluated at arbitrary physical points; only for analytic kernels.
  Complex value_at(double x, double y) const;
  // ∂Γ/∂y at (x_i, y_j): analytic when tagged, else Richardson-refined central
  // differences over the offset axis.
  Complex dgamma_dy(Index i, Index j) const;
  Complex dgamma_dy_at(double x, double y) const;  // analytic kernels only

  CMatrix matrix() const;
  // Unit diagonal, |Γ| <= 1, Hermitian symmetry Γ(x,y) = conj(Γ(y,x)).
  void validate(double tol = 1e-12) const;
};

// Product over traced environments of Tr{exp(-i t (x-y) g_k B_k) rho0_k}.
GammaKernel gamma_from_envs(const std::vector<EnvModel>& traced, double t,
                            const Grid& grid);

// exp(-t^n_exp * alpha * (x-y)^2), tagged analytic.
GammaKernel gaussian_gamma(double t, double alpha, double n_exp, const Grid& grid);

// Γ ≡ 1 (no traced environments).
GammaKernel unit_gamma(const Grid& grid, double t);

// Entrywise product of two kernels over the same grid (e.g. env-derived Γ
// combined with a closed-form tag). The closed form survives only when both
// factors carry it with the same exponent (the alphas add).
GammaKernel combine_gamma(const GammaKernel& a, const GammaKernel& b);

// Entrywise K(x,y) -> Γ(x,y) K(x,y). Diagonal unchanged exactly, trace
// preserved, contractive in trace norm.
CvDensity apply_decoherence(const CvDensity& rho, const GammaKernel& gamma);

// State of system ⊗ observed environments. Factor order (system, env 1, ...).
struct JointState {
  Grid grid;
  std::vector<Index> env_dims;
  CMatrix mat;  // dimension n * prod(env_dims)

  Index env_dim() const;
  Index dim() const { return mat.rows(); }
  DensityMatrix to_density() const;
};

// M_S ⊗ rho0_1 ⊗ ... ⊗ rho0_m.
JointState joint_product(const CvDensity& sys, const std::vector<EnvModel>& envs);

// Dense matrix of the conditional unitary: block-diagonal over grid points,
// block j = exp(-i t x_j Σ g_k B_k). Intended for tests and small systems.
CMatrix conditional_unitary(const Grid& grid, const std::vector<EnvModel>& envs,
                            double t);

// In-place U rho U^dagger using the block structure (no n·D-dim dense unitary).
void apply_conditional_unitary(JointState& state, const std::vector<EnvModel>& envs,
                               double t);

// Scale the (i, j) system block by Γ(x_i, x_j): the decoherence map acting on
// the system factor of a joint state.
JointState apply_decoherence_joint(const JointState& state, const GammaKernel& gamma);

// Evolve system ⊗ all N environments with the full conditional unitary, then
// trace out the traced environments. Factor order (system, observed..., traced...).
JointState evolve_full(const CvDensity& rho_s, const EnvEnsemble& ens, double t);

// The equivalent reduced route: U_t [ (Γ ∘ K) dx ⊗ rho0_observed ] U_t^dagger,
// with Γ from the traced environments alone.
JointState lemma_rhs(const CvDensity& rho_s, const EnvEnsemble& ens, double t);

// Max entrywise |U_t(E_t ⊗ I)(rho) - (E_t ⊗ I)U_t(rho)| on rho_s ⊗ rho0_observed:
// the conditional unitary commutes with the decoherence map.
double check_commutation(const CvDensity& rho_s, const std::vector<EnvModel>& observed,
                         const std::vector<EnvModel>& traced, double t);

}  // namespace sbscv
