#pragma once

// Dense complex-matrix substrate: trace norms, fidelity, Hermitian matrix
// exponentials, Kronecker products and partial traces over declared tensor
// factors. Everything downstream (grids, environments, bounds) sits on top of
// these few operations.

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "sbscv/errors.hpp"

namespace sbscv {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Joint-dimension cap for Kronecker products. Default 8192; the SBSCV_CAP
// environment variable overrides the default, set_dimension_cap overrides both.
Index dimension_cap();
void set_dimension_cap(Index cap);

bool is_finite(const CMatrix& a);
double max_abs(const CMatrix& a);

// Hermitian within tol * (1 + max|a|).
bool is_hermitian(const CMatrix& a, double rel_tol = 1e-12);

// Sum of singular values. Hermitian inputs take the eigenvalue fast path
// (identical result, much cheaper at large dimension). Non-finite input throws.
double trace_norm(const CMatrix& a);

// Largest singular value.
double operator_norm(const CMatrix& a);

// 0.5 * trace_norm(a - b).
double trace_distance(const CMatrix& a, const CMatrix& b);

// exp(-i s h) for Hermitian h, via eigendecomposition. Unitary by construction.
CMatrix herm_expm(const CMatrix& h, double s);

// Kronecker product; throws ResourceError when the result would exceed the cap.
CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix kron_all(const std::vector<CMatrix>& factors);

// Principal square root of a positive semidefinite Hermitian matrix.
// Eigenvalues in [-clip_tol, 0) are clipped to 0; anything more negative is a
// NumericError. clip_tol is absolute.
CMatrix herm_sqrt_psd(const CMatrix& rho, double clip_tol = 1e-10);

// Uhlmann fidelity ||sqrt(rho) sqrt(sigma)||_1^2 for density matrices.
double fidelity(const CMatrix& rho, const CMatrix& sigma);

// A density matrix together with its declared tensor factorization. Factor
// order is fixed throughout: (system, env 1, ..., env N).
struct DensityMatrix {
  CMatrix mat;
  std::vector<Index> dims;

  DensityMatrix() = default;
  DensityMatrix(CMatrix m, std::vector<Index> d);

  Index dim() const { return mat.rows(); }

  // Hermiticity, unit trace, positivity (with the clip rule above).
  void validate(double trace_tol = 1e-8, double herm_tol = 1e-10,
                double psd_tol = 1e-10) const;
};

// Trace out every factor not listed in keep. keep holds indices into
// rho.dims, strictly increasing; the kept factors preserve their order.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

}  // namespace sbscv
