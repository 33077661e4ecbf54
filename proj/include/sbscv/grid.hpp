#pragma once

// Uniform position grid and grid-discretized continuous-variable states.
// Kernels K(x,y) carry units 1/length; the dimensionless matrix form used for
// trace-class statements is M = K * dx. Intervals are half-open [a, b).

#include <utility>
#include <vector>

#include "sbscv/matrix.hpp"

namespace sbscv {

struct Grid {
  double x_min = 0.0;
  double x_max = 1.0;
  Index n = 2;

  Grid() = default;
  Grid(double x_min_, double x_max_, Index n_);

  double dx() const { return (x_max - x_min) / static_cast<double>(n); }
  // Midpoint convention: x_j = x_min + (j + 1/2) dx.
  double point(Index j) const { return x_min + (static_cast<double>(j) + 0.5) * dx(); }
  RVector points() const;

  bool operator==(const Grid& o) const {
    return x_min == o.x_min && x_max == o.x_max && n == o.n;
  }
};

// Half-open interval [a, b).
struct Interval {
  double a = 0.0;
  double b = 0.0;
  double length() const { return b - a; }
};

// Indices j with x_j in [a, b), as (first, count). Throws InvalidInput when the
// interval is malformed, escapes the grid, or contains no grid point.
std::pair<Index, Index> interval_index_range(const Grid& grid, const Interval& iv);

// Diagonal 0/1 projector onto the interval's grid points.
CMatrix interval_projector(const Grid& grid, const Interval& iv);

// diag(x_0, ..., x_{n-1}).
CMatrix position_operator(const Grid& grid);

// Grid-discretized density operator of the central system.
struct CvDensity {
  Grid grid;
  CMatrix kernel;  // K(x_i, x_j), units 1/length

  // M = K * dx: the dimensionless density matrix.
  CMatrix matrix() const { return kernel * grid.dx(); }
  // Probability weight of grid point j: K(x_j, x_j) * dx.
  double weight(Index j) const { return kernel(j, j).real() * grid.dx(); }

  // Hermitian kernel, unit trace (sum K_jj dx = 1), PSD matrix form.
  void validate(double trace_tol = 1e-8, double herm_tol = 1e-10,
                double psd_tol = 1e-10) const;
};

// Normalized packet exp(-(x-center)^2/(4 width^2) + i momentum x) sampled on
// the grid, with sum |psi_j|^2 dx = 1. Requires >= 5*width of margin to each
// boundary and a boundary mass (3 points at each edge) below 1e-12; violations
// are ConfigError ("leak").
CVector gaussian_wavepacket(const Grid& grid, double center, double width,
                            double momentum = 0.0);

// K = psi psi^dagger for an already-normalized grid wavefunction.
CvDensity pure_state_density(const Grid& grid, const CVector& psi);

// Coherent superposition sum_m w_m packet(center_m), renormalized. Relative
// phases enter through complex weights.
CvDensity cat_state(const Grid& grid, const std::vector<double>& centers,
                    const std::vector<Complex>& weights, double width);

// Throws ConfigError when the mass on the 3 outermost points at either edge
// exceeds 1e-12.
void check_boundary_leak(const Grid& grid, const CVector& psi);

}  // namespace sbscv
