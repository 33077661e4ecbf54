#include "sbscv/env.hpp"

#include <cmath>
#include <sstream>

namespace sbscv {

EnvModel::EnvModel(CMatrix b_, double g_, CMatrix rho0_, std::string label_)
    : dim(b_.rows()), g(g_), b(std::move(b_)), rho0(std::move(rho0_)),
      label(std::move(label_)) {
  if (dim < 1 || b.rows() != b.cols()) throw InvalidInput("EnvModel: B not square");
  if (!std::isfinite(g)) throw InvalidInput("EnvModel: non-finite coupling");
  if (!is_hermitian(b, 1e-12))
    throw InvalidInput("EnvModel: generator not Hermitian within tolerance");
  DensityMatrix check(rho0, {dim});
  check.validate();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(b);
  evals = es.eigenvalues();
  evecs = es.eigenvectors();
  rho0_eig = evecs.adjoint() * rho0 * evecs;
}

Complex characteristic_function(const EnvModel& env, double s) {
  if (!std::isfinite(s)) throw InvalidInput("characteristic_function: non-finite s");
  Complex acc(0.0, 0.0);
  for (Index m = 0; m < env.dim; ++m) {
    const double angle = -s * env.evals(m);
    acc += env.rho0_eig(m, m).real() * Complex(std::cos(angle), std::sin(angle));
  }
  return acc;
}

CMatrix branch_state(const EnvModel& env, double t, double x) {
  const double s = t * x * env.g;
  if (!std::isfinite(s)) throw InvalidInput("branch_state: non-finite t*x*g");
  CVector phases(env.dim);
  for (Index m = 0; m < env.dim; ++m) {
    const double angle = -s * env.evals(m);
    phases(m) = Complex(std::cos(angle), std::sin(angle));
  }
  const CMatrix inner =
      phases.asDiagonal() * env.rho0_eig * phases.conjugate().asDiagonal();
  return env.evecs * inner * env.evecs.adjoint();
}

OscillatorKind oscillator_kind_from_string(const std::string& s) {
  if (s == "position") return OscillatorKind::position;
  if (s == "momentum") return OscillatorKind::momentum;
  if (s == "number") return OscillatorKind::number;
  throw ConfigError("unknown oscillator kind '" + s +
                    "' (expected position|momentum|number)");
}

std::string to_string(OscillatorKind kind) {
  switch (kind) {
    case OscillatorKind::position: return "position";
    case OscillatorKind::momentum: return "momentum";
    case OscillatorKind::number: return "number";
  }
  return "?";
}

EnvModel make_oscillator_env(Index dim, OscillatorKind kind, double coupling,
                             double occupation) {
  if (dim < 2) throw ConfigError("make_oscillator_env: dim must be at least 2");
  if (occupation < 0.0 || !std::isfinite(occupation))
    throw ConfigError("make_oscillator_env: occupation must be >= 0");

  CMatrix a = CMatrix::Zero(dim, dim);  // annihilation: a|n> = sqrt(n)|n-1>
  for (Index n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const CMatrix adag = a.adjoint();

  CMatrix b;
  switch (kind) {
    case OscillatorKind::position: b = (a + adag) / std::sqrt(2.0); break;
    case OscillatorKind::momentum: b = Complex(0.0, 1.0) * (adag - a) / std::sqrt(2.0); break;
    case OscillatorKind::number: b = adag * a; break;
  }

  CMatrix rho0 = CMatrix::Zero(dim, dim);
  if (occupation == 0.0) {
    rho0(0, 0) = 1.0;
  } else {
    // Gibbs weights q^n with q = occ/(1+occ), renormalized on the truncation.
    const double q = occupation / (1.0 + occupation);
    double z = 0.0, w = 1.0;
    for (Index n = 0; n < dim; ++n, w *= q) z += w;
    w = 1.0;
    for (Index n = 0; n < dim; ++n, w *= q) rho0(n, n) = w / z;
  }

  std::ostringstream label;
  label << to_string(kind) << "-d" << dim << "-occ" << occupation;
  return EnvModel(std::move(b), coupling, std::move(rho0), label.str());
}

double truncation_drift(const EnvModel& env, const EnvModel& refined, double s_max,
                        int n_samples) {
  if (!(s_max > 0.0) || n_samples < 2)
    throw InvalidInput("truncation_drift: need s_max > 0 and >= 2 samples");
  double worst = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const double s =
        -s_max + 2.0 * s_max * static_cast<double>(k) / (n_samples - 1);
    worst = std::max(worst,
                     std::abs(characteristic_function(env, s) -
                              characteristic_function(refined, s)));
  }
  return worst;
}

}  // namespace sbscv
