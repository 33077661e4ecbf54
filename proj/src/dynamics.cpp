#include "sbscv/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace sbscv {

namespace {

double pow_t(double t, double n_exp) {
  return n_exp == 1.0 ? t : std::pow(t, n_exp);
}

// Unitaries exp(-i t x_j S) for every grid point, S = sum of the coupled
// generators on the joint environment space.
std::vector<CMatrix> point_unitaries(const Grid& grid,
                                     const std::vector<EnvModel>& envs, double t) {
  Index d_joint = 1;
  for (const auto& e : envs) d_joint *= e.dim;
  CMatrix s_joint = CMatrix::Zero(d_joint, d_joint);
  for (size_t k = 0; k < envs.size(); ++k) {
    CMatrix term = CMatrix::Identity(1, 1);
    for (size_t l = 0; l < envs.size(); ++l) {
      const CMatrix factor = (l == k)
                                 ? CMatrix(envs[l].g * envs[l].b)
                                 : CMatrix(CMatrix::Identity(envs[l].dim, envs[l].dim));
      term = kron(term, factor);
    }
    s_joint += term;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s_joint);
  std::vector<CMatrix> us;
  us.reserve(grid.n);
  for (Index j = 0; j < grid.n; ++j) {
    const double s = t * grid.point(j);
    CVector phases(d_joint);
    for (Index m = 0; m < d_joint; ++m) {
      const double angle = -s * es.eigenvalues()(m);
      phases(m) = Complex(std::cos(angle), std::sin(angle));
    }
    us.push_back(es.eigenvectors() * phases.asDiagonal() *
                 es.eigenvectors().adjoint());
  }
  return us;
}

}  // namespace

Complex GammaKernel::value_at(double x, double y) const {
  if (!analytic_gaussian)
    throw InvalidInput("GammaKernel: off-grid evaluation needs the analytic form");
  const double u = x - y;
  return std::exp(-pow_t(t, n_exp) * alpha * u * u);
}

Complex GammaKernel::dgamma_dy_at(double x, double y) const {
  if (!analytic_gaussian)
    throw InvalidInput("GammaKernel: off-grid derivative needs the analytic form");
  const double u = x - y;
  return 2.0 * pow_t(t, n_exp) * alpha * u * value_at(x, y);
}

Complex GammaKernel::dgamma_dy(Index i, Index j) const {
  if (analytic_gaussian) return dgamma_dy_at(grid.point(i), grid.point(j));
  // ∂Γ/∂y (x_i, y_j) = -f'(u) for Γ(x,y) = f(x-y), differentiated on the
  // offset axis with Richardson-refined central differences.
  const Index n = grid.n;
  const Index c = (i - j) + (n - 1);  // offset slot
  const double h = grid.dx();
  const Index last = 2 * n - 2;
  auto f = [&](Index k) { return offsets(k); };
  Complex fprime;
  if (c >= 2 && c + 2 <= last) {
    const Complex d1 = (f(c + 1) - f(c - 1)) / (2.0 * h);
    const Complex d2 = (f(c + 2) - f(c - 2)) / (4.0 * h);
    fprime = (4.0 * d1 - d2) / 3.0;
  } else if (c + 2 <= last) {  // forward, second order
    fprime = (-3.0 * f(c) + 4.0 * f(c + 1) - f(c + 2)) / (2.0 * h);
  } else if (c >= 2) {  // backward, second order
    fprime = (3.0 * f(c) - 4.0 * f(c - 1) + f(c - 2)) / (2.0 * h);
  } else {
    throw InvalidInput("GammaKernel: grid too small for offset derivatives");
  }
  return -fprime;
}

CMatrix GammaKernel::matrix() const {
  CMatrix out(grid.n, grid.n);
  for (Index i = 0; i < grid.n; ++i)
    for (Index j = 0; j < grid.n; ++j) out(i, j) = value(i, j);
  return out;
}

void GammaKernel::validate(double tol) const {
  if (offsets.size() != 2 * grid.n - 1)
    throw InvalidInput("GammaKernel: offset table size mismatch");
  if (!offsets.allFinite()) throw InvalidInput("GammaKernel: non-finite values");
  const Index center = grid.n - 1;
  if (std::abs(offsets(center) - Complex(1.0, 0.0)) > tol)
    throw InvalidInput("GammaKernel: Gamma(t,x,x) deviates from 1");
  for (Index d = 0; d < offsets.size(); ++d) {
    if (std::abs(offsets(d)) > 1.0 + tol)
      throw InvalidInput("GammaKernel: |Gamma| exceeds 1");
    const Index mirror = 2 * center - d;
    if (std::abs(offsets(d) - std::conj(offsets(mirror))) > tol)
      throw InvalidInput("GammaKernel: Hermitian symmetry violated");
  }
}

GammaKernel gamma_from_envs(const std::vector<EnvModel>& traced, double t,
                            const Grid& grid) {
  GammaKernel gamma{grid, t, CVector(2 * grid.n - 1)};
  const Index center = grid.n - 1;
  for (Index d = -(grid.n - 1); d <= grid.n - 1; ++d) {
    if (d == 0) {
      gamma.offsets(center) = Complex(1.0, 0.0);
      continue;
    }
    const double u = static_cast<double>(d) * grid.dx();
    Complex prod(1.0, 0.0);
    for (const auto& env : traced)
      prod *= characteristic_function(env, t * u * env.g);
    gamma.offsets(center + d) = prod;
  }
  gamma.validate(1e-10);
  return gamma;
}

GammaKernel gaussian_gamma(double t, double alpha, double n_exp, const Grid& grid) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw InvalidInput("gaussian_gamma: alpha must be positive");
  if (!(n_exp > 0.0) || !std::isfinite(n_exp))
    throw InvalidInput("gaussian_gamma: n_exp must be positive");
  if (t < 0.0 || !std::isfinite(t))
    throw InvalidInput("gaussian_gamma: t must be non-negative");
  GammaKernel gamma{grid, t, CVector(2 * grid.n - 1), true, alpha, n_exp};
  const Index center = grid.n - 1;
  for (Index d = -(grid.n - 1); d <= grid.n - 1; ++d) {
    const double u = static_cast<double>(d) * grid.dx();
    gamma.offsets(center + d) = std::exp(-pow_t(t, n_exp) * alpha * u * u);
  }
  return gamma;
}

GammaKernel unit_gamma(const Grid& grid, double t) {
  GammaKernel gamma{grid, t, CVector::Ones(2 * grid.n - 1)};
  return gamma;
}

GammaKernel combine_gamma(const GammaKernel& a, const GammaKernel& b) {
  if (!(a.grid == b.grid) || a.t != b.t)
    throw InvalidInput("combine_gamma: grids/times differ");
  GammaKernel out{a.grid, a.t, a.offsets.cwiseProduct(b.offsets)};
  if (a.analytic_gaussian && b.analytic_gaussian && a.n_exp == b.n_exp) {
    out.analytic_gaussian = true;
    out.alpha = a.alpha + b.alpha;
    out.n_exp = a.n_exp;
  }
  return out;
}

CvDensity apply_decoherence(const CvDensity& rho, const GammaKernel& gamma) {
  if (!(rho.grid == gamma.grid))
    throw InvalidInput("apply_decoherence: kernel and state grids differ");
  CvDensity out{rho.grid, CMatrix(rho.grid.n, rho.grid.n)};
  for (Index i = 0; i < rho.grid.n; ++i)
    for (Index j = 0; j < rho.grid.n; ++j)
      out.kernel(i, j) = rho.kernel(i, j) * gamma.value(i, j);
  return out;
}

Index JointState::env_dim() const {
  Index d = 1;
  for (Index e : env_dims) d *= e;
  return d;
}

DensityMatrix JointState::to_density() const {
  std::vector<Index> dims{grid.n};
  dims.insert(dims.end(), env_dims.begin(), env_dims.end());
  return DensityMatrix(mat, dims);
}

JointState joint_product(const CvDensity& sys, const std::vector<EnvModel>& envs) {
  CMatrix joint = sys.matrix();
  std::vector<Index> dims;
  for (const auto& e : envs) {
    joint = kron(joint, e.rho0);
    dims.push_back(e.dim);
  }
  return JointState{sys.grid, std::move(dims), std::move(joint)};
}

CMatrix conditional_unitary(const Grid& grid, const std::vector<EnvModel>& envs,
                            double t) {
  const auto us = point_unitaries(grid, envs, t);
  const Index d = us.empty() ? 1 : us.front().rows();
  const Index total = grid.n * d;
  if (total > dimension_cap()) {
    std::ostringstream msg;
    msg << "conditional_unitary: dimension " << total << " exceeds cap "
        << dimension_cap();
    throw ResourceError(msg.str());
  }
  CMatrix u = CMatrix::Zero(total, total);
  for (Index j = 0; j < grid.n; ++j) u.block(j * d, j * d, d, d) = us[j];
  return u;
}

void apply_conditional_unitary(JointState& state, const std::vector<EnvModel>& envs,
                               double t) {
  Index d = 1;
  for (const auto& e : envs) d *= e.dim;
  if (state.env_dim() != d || state.mat.rows() != state.grid.n * d)
    throw InvalidInput("apply_conditional_unitary: environment dimensions mismatch");
  const auto us = point_unitaries(state.grid, envs, t);
  // Block (i, j) maps to U_i block U_j^dagger.
  for (Index i = 0; i < state.grid.n; ++i)
    for (Index j = 0; j < state.grid.n; ++j)
      state.mat.block(i * d, j * d, d, d) =
          us[i] * state.mat.block(i * d, j * d, d, d) * us[j].adjoint();
}

JointState apply_decoherence_joint(const JointState& state, const GammaKernel& gamma) {
  if (!(state.grid == gamma.grid))
    throw InvalidInput("apply_decoherence_joint: grids differ");
  const Index d = state.env_dim();
  JointState out = state;
  for (Index i = 0; i < state.grid.n; ++i)
    for (Index j = 0; j < state.grid.n; ++j)
      if (i != j)
        out.mat.block(i * d, j * d, d, d) *= gamma.value(i, j);
  return out;
}

JointState evolve_full(const CvDensity& rho_s, const EnvEnsemble& ens, double t) {
  std::vector<EnvModel> all = ens.observed;
  all.insert(all.end(), ens.traced.begin(), ens.traced.end());
  JointState joint = joint_product(rho_s, all);
  apply_conditional_unitary(joint, all, t);
  // Trace out the traced factors (system = 0, observed = 1..N_E).
  std::vector<int> keep{0};
  for (size_t k = 0; k < ens.observed.size(); ++k) keep.push_back(1 + static_cast<int>(k));
  DensityMatrix reduced = partial_trace(joint.to_density(), keep);
  std::vector<Index> obs_dims;
  for (const auto& e : ens.observed) obs_dims.push_back(e.dim);
  return JointState{rho_s.grid, std::move(obs_dims), std::move(reduced.mat)};
}

JointState lemma_rhs(const CvDensity& rho_s, const EnvEnsemble& ens, double t) {
  const GammaKernel gamma = ens.traced.empty()
                                ? unit_gamma(rho_s.grid, t)
                                : gamma_from_envs(ens.traced, t, rho_s.grid);
  const CvDensity decohered = apply_decoherence(rho_s, gamma);
  JointState joint = joint_product(decohered, ens.observed);
  apply_conditional_unitary(joint, ens.observed, t);
  return joint;
}

double check_commutation(const CvDensity& rho_s, const std::vector<EnvModel>& observed,
                         const std::vector<EnvModel>& traced, double t) {
  const GammaKernel gamma = traced.empty() ? unit_gamma(rho_s.grid, t)
                                           : gamma_from_envs(traced, t, rho_s.grid);
  const JointState start = joint_product(rho_s, observed);

  JointState decohere_first = apply_decoherence_joint(start, gamma);
  apply_conditional_unitary(decohere_first, observed, t);

  JointState evolve_first = start;
  apply_conditional_unitary(evolve_first, observed, t);
  evolve_first = apply_decoherence_joint(evolve_first, gamma);

  return max_abs(decohere_first.mat - evolve_first.mat);
}

}  // namespace sbscv
