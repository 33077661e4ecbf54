#include "sbscv/grid.hpp"

#include <cmath>
#include <sstream>

namespace sbscv {

Grid::Grid(double x_min_, double x_max_, Index n_)
    : x_min(x_min_), x_max(x_max_), n(n_) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max))
    throw ConfigError("Grid: non-finite bounds");
  if (x_max <= x_min) throw ConfigError("Grid: x_max must exceed x_min");
  if (n < 2) throw ConfigError("Grid: need at least 2 points");
}

RVector Grid::points() const {
  RVector p(n);
  for (Index j = 0; j < n; ++j) p(j) = point(j);
  return p;
}

std::pair<Index, Index> interval_index_range(const Grid& grid, const Interval& iv) {
  if (!std::isfinite(iv.a) || !std::isfinite(iv.b) || iv.b <= iv.a)
    throw InvalidInput("interval: need finite a < b");
  if (iv.a < grid.x_min - 1e-12 || iv.b > grid.x_max + 1e-12)
    throw InvalidInput("interval: escapes the grid domain");
  Index first = -1, count = 0;
  for (Index j = 0; j < grid.n; ++j) {
    const double x = grid.point(j);
    if (x >= iv.a && x < iv.b) {
      if (first < 0) first = j;
      ++count;
    } else if (first >= 0) {
      break;  // grid points are increasing, the run is contiguous
    }
  }
  if (count == 0) {
    std::ostringstream msg;
    msg << "interval [" << iv.a << ", " << iv.b << ") contains no grid point";
    throw InvalidInput(msg.str());
  }
  return {first, count};
}

CMatrix interval_projector(const Grid& grid, const Interval& iv) {
  const auto [first, count] = interval_index_range(grid, iv);
  CMatrix p = CMatrix::Zero(grid.n, grid.n);
  for (Index j = first; j < first + count; ++j) p(j, j) = 1.0;
  return p;
}

CMatrix position_operator(const Grid& grid) {
  CMatrix x = CMatrix::Zero(grid.n, grid.n);
  for (Index j = 0; j < grid.n; ++j) x(j, j) = grid.point(j);
  return x;
}

void CvDensity::validate(double trace_tol, double herm_tol, double psd_tol) const {
  if (kernel.rows() != grid.n || kernel.cols() != grid.n)
    throw InvalidInput("CvDensity: kernel size does not match the grid");
  if (!is_finite(kernel)) throw InvalidInput("CvDensity: non-finite kernel");
  if (!is_hermitian(kernel, herm_tol))
    throw InvalidInput("CvDensity: kernel not Hermitian within tolerance");
  const double tr = kernel.trace().real() * grid.dx();
  if (std::abs(tr - 1.0) > trace_tol)
    throw InvalidInput("CvDensity: kernel trace deviates from 1/dx beyond tolerance");
  herm_sqrt_psd(matrix(), psd_tol);
}

void check_boundary_leak(const Grid& grid, const CVector& psi) {
  if (psi.size() != grid.n) throw InvalidInput("boundary check: size mismatch");
  const Index edge = std::min<Index>(3, grid.n);
  double mass = 0.0;
  for (Index j = 0; j < edge; ++j) {
    mass += std::norm(psi(j)) * grid.dx();
    mass += std::norm(psi(grid.n - 1 - j)) * grid.dx();
  }
  if (mass > 1e-12) {
    std::ostringstream msg;
    msg << "state leaks off the grid: boundary mass " << mass << " exceeds 1e-12";
    throw ConfigError(msg.str());
  }
}

CVector gaussian_wavepacket(const Grid& grid, double center, double width,
                            double momentum) {
  if (!(width > 0.0) || !std::isfinite(width))
    throw ConfigError("gaussian_wavepacket: width must be positive");
  if (!std::isfinite(center) || !std::isfinite(momentum))
    throw ConfigError("gaussian_wavepacket: non-finite parameters");
  if (center - grid.x_min < 5.0 * width || grid.x_max - center < 5.0 * width)
    throw ConfigError(
        "gaussian_wavepacket: center closer than 5*width to a grid boundary");
  CVector psi(grid.n);
  for (Index j = 0; j < grid.n; ++j) {
    const double x = grid.point(j);
    const double envelope = std::exp(-(x - center) * (x - center) / (4.0 * width * width));
    psi(j) = envelope * Complex(std::cos(momentum * x), std::sin(momentum * x));
  }
  const double norm2 = psi.squaredNorm() * grid.dx();
  psi /= std::sqrt(norm2);
  check_boundary_leak(grid, psi);
  return psi;
}

CvDensity pure_state_density(const Grid& grid, const CVector& psi) {
  if (psi.size() != grid.n) throw InvalidInput("pure_state_density: size mismatch");
  const double norm2 = psi.squaredNorm() * grid.dx();
  if (std::abs(norm2 - 1.0) > 1e-8)
    throw InvalidInput("pure_state_density: wavefunction not normalized");
  CvDensity rho{grid, psi * psi.adjoint()};
  return rho;
}

CvDensity cat_state(const Grid& grid, const std::vector<double>& centers,
                    const std::vector<Complex>& weights, double width) {
  if (centers.empty() || centers.size() != weights.size())
    throw ConfigError("cat_state: need matching non-empty centers and weights");
  CVector psi = CVector::Zero(grid.n);
  for (size_t m = 0; m < centers.size(); ++m)
    psi += weights[m] * gaussian_wavepacket(grid, centers[m], width);
  const double norm2 = psi.squaredNorm() * grid.dx();
  if (norm2 <= 1e-14)
    throw ConfigError("cat_state: destructive interference leaves no state");
  psi /= std::sqrt(norm2);
  check_boundary_leak(grid, psi);
  return pure_state_density(grid, psi);
}

}  // namespace sbscv
