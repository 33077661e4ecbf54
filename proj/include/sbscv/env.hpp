#pragma once

// Finite-dimensional environment models for the von Neumann coupling
// X ⊗ Σ_k g_k B_k: a Hermitian generator B, a coupling g and an initial state
// rho0, with the eigendecomposition of B cached for characteristic functions
// and conjugated branch states.

#include <string>
#include <vector>

#include "sbscv/matrix.hpp"

namespace sbscv {

struct EnvModel {
  Index dim = 0;
  double g = 1.0;
  CMatrix b;     // Hermitian generator
  CMatrix rho0;  // initial environment state
  std::string label;

  // Cached: b = evecs * diag(evals) * evecs^dagger, rho0_eig = evecs^dagger rho0 evecs.
  RVector evals;
  CMatrix evecs;
  CMatrix rho0_eig;

  EnvModel() = default;
  EnvModel(CMatrix b_, double g_, CMatrix rho0_, std::string label_ = "env");
};

// gamma(s) = Tr{ exp(-i s B) rho0 }. |gamma| <= 1, gamma(0) = 1,
// gamma(-s) = conj(gamma(s)).
Complex characteristic_function(const EnvModel& env, double s);

// exp(-i t x g B) rho0 exp(+i t x g B).
CMatrix branch_state(const EnvModel& env, double t, double x);

enum class OscillatorKind { position, momentum, number };
OscillatorKind oscillator_kind_from_string(const std::string& s);
std::string to_string(OscillatorKind kind);

// Truncated Fock-basis oscillator. position = (a + a^dag)/sqrt(2),
// momentum = i(a^dag - a)/sqrt(2), number = a^dag a. occupation = 0 gives the
// ground state; occupation > 0 a thermal Gibbs state with that mean occupation
// (eigenvalue ratio q = occ/(1+occ), renormalized over the truncated space).
EnvModel make_oscillator_env(Index dim, OscillatorKind kind, double coupling,
                             double occupation = 0.0);

struct EnvEnsemble {
  std::vector<EnvModel> observed;  // kept (monitored) environments
  std::vector<EnvModel> traced;    // environments traced out -> decoherence kernel
};

// Max |gamma_env - gamma_refined| over n_samples points of [-s_max, s_max].
// Used for the truncation acceptance rule (doubling dim must move the
// characteristic function by < 1e-6 on the used s-range).
double truncation_drift(const EnvModel& env, const EnvModel& refined, double s_max,
                        int n_samples = 64);

}  // namespace sbscv
