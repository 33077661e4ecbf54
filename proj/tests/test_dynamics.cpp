#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "oracles.hpp"
#include "sbscv/dynamics.hpp"

using namespace sbscv;

namespace {

EnvModel two_level_env(double g) {
  CMatrix b = CMatrix::Zero(2, 2);
  b(1, 1) = 1.0;
  return EnvModel(b, g, 0.5 * CMatrix::Identity(2, 2), "two-level");
}

CvDensity centered_packet(const Grid& g, double width = 0.5) {
  return pure_state_density(g, gaussian_wavepacket(g, 0.0, width));
}

}  // namespace

TEST_CASE("decoherence kernel from environments: limits and product form") {
  const Grid g(-6.0, 6.0, 16);

  const GammaKernel at_zero = gamma_from_envs({two_level_env(0.7)}, 0.0, g);
  for (Index d = 0; d < 2 * g.n - 1; ++d)
    CHECK(std::abs(at_zero.offsets(d) - Complex(1.0, 0.0)) <= 1e-14);

  const GammaKernel no_envs = gamma_from_envs({}, 1.3, g);
  for (Index d = 0; d < 2 * g.n - 1; ++d)
    CHECK(std::abs(no_envs.offsets(d) - Complex(1.0, 0.0)) == 0.0);

  // Two identical two-level environments: the kernel is the square of one
  // factor, ((1 + e^{-i t g (x-y)}) / 2)^2.
  const double t = 1.3, gc = 0.7;
  const GammaKernel two =
      gamma_from_envs({two_level_env(gc), two_level_env(gc)}, t, g);
  CHECK_NOTHROW(two.validate());
  for (Index i = 0; i < g.n; ++i)
    for (Index j = 0; j < g.n; ++j) {
      const double s = t * gc * (g.point(i) - g.point(j));
      const Complex one = 0.5 * (1.0 + std::exp(Complex(0.0, -s)));
      CHECK(std::abs(two.value(i, j) - one * one) <= 1e-12);
    }

  // An additional traced environment can only suppress coherence further.
  const GammaKernel one_env = gamma_from_envs({two_level_env(gc)}, t, g);
  for (Index i = 0; i < g.n; ++i)
    for (Index j = 0; j < g.n; ++j)
      CHECK(std::abs(two.value(i, j)) <= std::abs(one_env.value(i, j)) + 1e-12);
}

TEST_CASE("combine_gamma multiplies kernels entrywise") {
  const Grid g(-6.0, 6.0, 16);
  const GammaKernel a = gamma_from_envs({two_level_env(0.7)}, 0.9, g);
  const GammaKernel b = gaussian_gamma(0.9, 0.4, 1.0, g);
  const GammaKernel ab = combine_gamma(a, b);
  CHECK_NOTHROW(ab.validate());
  for (Index i = 0; i < g.n; ++i)
    for (Index j = 0; j < g.n; ++j)
      CHECK(std::abs(ab.value(i, j) - a.value(i, j) * b.value(i, j)) <= 1e-14);

  const GammaKernel unit = unit_gamma(g, 0.9);
  const GammaKernel bu = combine_gamma(b, unit);
  CHECK(!bu.analytic_gaussian);  // the numeric factor drops the closed-form tag
  for (Index i = 0; i < g.n; ++i)
    for (Index j = 0; j < g.n; ++j)
      CHECK(std::abs(bu.value(i, j) - b.value(i, j)) == 0.0);

  // Two closed-form factors with the same exponent stay closed-form; the
  // rates add.
  const GammaKernel b2 = gaussian_gamma(0.9, 0.25, 1.0, g);
  const GammaKernel both = combine_gamma(b, b2);
  CHECK(both.analytic_gaussian);
  CHECK(both.alpha == doctest::Approx(0.65).epsilon(1e-14));
  CHECK(std::abs(both.value_at(1.0, -1.0) -
                 std::exp(-0.9 * 0.65 * 4.0)) <= 1e-12);
}

TEST_CASE("closed-form Gaussian kernel: pointer-wavelet identities") {
  const Grid g(-6.0, 6.0, 48);
  const double alpha = 0.7, n_exp = 1.0;
  for (double t : {0.3, 1.0, 2.0}) {
    const GammaKernel gamma = gaussian_gamma(t, alpha, n_exp, g);
    CHECK_NOTHROW(gamma.validate());
    const double c = std::pow(t, n_exp) * alpha;
    CHECK(std::abs(gamma.value_at(1.7, 1.7) - Complex(1.0, 0.0)) == 0.0);

    for (auto [x, y] : std::vector<std::pair<double, double>>{
             {0.0, 1.0}, {-2.0, 1.5}, {0.3, -0.4}}) {
      // Split into overlapping half-width factors: the composition of the two
      // halves reproduces the kernel.
      const double mid = 0.5 * (x + y);
      const double half = 10.0 / std::sqrt(c) + std::abs(x - y);
      const Complex conv = oracles::quadrature(
          [&](double z) {
            return Complex(2.0 * std::sqrt(c / M_PI) *
                               std::exp(-2.0 * c * (x - z) * (x - z)) *
                               std::exp(-2.0 * c * (z - y) * (z - y)),
                           0.0);
          },
          mid - half, mid + half);
      CHECK(std::abs(conv - gamma.value_at(x, y)) <= 1e-8);

      // Fourier route: the kernel is the characteristic function of the
      // pointer distribution |phi_eta|^2 with eta^2 = 2c.
      const double eta = std::sqrt(2.0 * c);
      const double s = x - y;
      const Complex mass = oracles::quadrature(
          [&](double z) {
            return Complex(
                std::exp(-z * z / (2.0 * eta * eta)) / std::sqrt(2.0 * M_PI) / eta,
                0.0);
          },
          -12.0 * eta, 12.0 * eta);
      CHECK(std::abs(mass - Complex(1.0, 0.0)) <= 1e-8);
      const Complex ft = oracles::quadrature(
          [&](double z) {
            return std::exp(-z * z / (2.0 * eta * eta)) / std::sqrt(2.0 * M_PI) /
                   eta * std::exp(Complex(0.0, -s * z));
          },
          -12.0 * eta, 12.0 * eta);
      CHECK(std::abs(ft - gamma.value_at(x, y)) <= 1e-8);
    }
  }
}

TEST_CASE("kernel derivative: numeric offsets agree with the analytic form") {
  const Grid g(-6.0, 6.0, 128);
  const double t = 1.2;
  // Environment-derived kernel of a position-kind ground state has the closed
  // form exp(-t^2 g^2 (x-y)^2 / 4); its numeric derivative path must match.
  const EnvModel env = make_oscillator_env(40, OscillatorKind::position, 0.9);
  const GammaKernel numeric = gamma_from_envs({env}, t, g);
  const double c = t * t * env.g * env.g / 4.0;
  for (Index i : {40, 64, 80})
    for (Index j : {50, 64, 90}) {
      const double u = g.point(i) - g.point(j);
      const Complex expected = 2.0 * c * u * std::exp(-c * u * u);
      CHECK(std::abs(numeric.dgamma_dy(i, j) - expected) <= 1e-4);
    }

  // Same kernel in closed form: alpha chosen so t^1 * alpha = c.
  const GammaKernel analytic = gaussian_gamma(t, c / t, 1.0, g);
  CHECK(std::abs(analytic.value_at(0.3, -0.7) -
                 std::exp(-c * std::pow(0.3 + 0.7, 2))) <= 1e-12);
  CHECK(std::abs(analytic.dgamma_dy_at(0.3, -0.7) -
                 2.0 * c * 1.0 * std::exp(-c * 1.0)) <= 1e-12);
}

TEST_CASE("entrywise decoherence: identity kernel, suppression factor, PSD") {
  const Grid g(-8.0, 8.0, 128);
  const CvDensity cat =
      cat_state(g, {-3.0, 3.0}, {Complex(1.0, 0.0), Complex(1.0, 0.0)}, 0.5);

  const CvDensity same = apply_decoherence(cat, unit_gamma(g, 2.0));
  CHECK(max_abs(same.kernel - cat.kernel) == 0.0);

  const double c = 0.5;
  const GammaKernel gamma = gaussian_gamma(1.0, c, 1.0, g);
  const CvDensity dec = apply_decoherence(cat, gamma);
  CHECK_NOTHROW(dec.validate());

  // Diagonal untouched, trace preserved exactly.
  for (Index j = 0; j < g.n; ++j)
    CHECK(std::abs(dec.kernel(j, j) - cat.kernel(j, j)) == 0.0);

  // Every entry scaled by exactly exp(-c (x_i - x_j)^2).
  for (Index i = 0; i < g.n; i += 7)
    for (Index j = 0; j < g.n; j += 7) {
      const double u = g.point(i) - g.point(j);
      CHECK(std::abs(dec.kernel(i, j) - cat.kernel(i, j) * std::exp(-c * u * u)) <=
            1e-10);
    }

  // Trace-norm contractive.
  CHECK(trace_norm(dec.matrix()) <= trace_norm(cat.matrix()) + 1e-9);
}

TEST_CASE("conditional unitary: identity limits and group property") {
  const Grid g(-1.5, 1.5, 3);  // points -1, 0, 1
  const std::vector<EnvModel> envs{
      make_oscillator_env(4, OscillatorKind::position, 0.8),
      make_oscillator_env(3, OscillatorKind::number, 0.5, 0.2)};
  const Index d = 12;

  const CMatrix u0 = conditional_unitary(g, envs, 0.0);
  CHECK(max_abs(u0 - CMatrix::Identity(3 * d, 3 * d)) <= 1e-13);

  const CMatrix u = conditional_unitary(g, envs, 0.9);
  CHECK(max_abs(u * u.adjoint() - CMatrix::Identity(3 * d, 3 * d)) <= 1e-10);
  // x = 0 block is the identity regardless of t.
  CHECK(max_abs(u.block(d, d, d, d) - CMatrix::Identity(d, d)) <= 1e-13);

  const CMatrix u2 = conditional_unitary(g, envs, 0.4);
  const CMatrix u12 = conditional_unitary(g, envs, 1.3);
  CHECK(max_abs(u * u2 - u12) <= 1e-9);
}

TEST_CASE("full evolution equals decohere-then-evolve") {
  const Grid g(-6.0, 6.0, 16);
  const CvDensity rho = centered_packet(g);
  EnvEnsemble ens;
  ens.observed = {make_oscillator_env(8, OscillatorKind::position, 1.0)};
  ens.traced = {make_oscillator_env(2, OscillatorKind::position, 0.6),
                make_oscillator_env(3, OscillatorKind::number, 0.5, 0.2)};

  // t = 0: nothing happens.
  const JointState start = evolve_full(rho, ens, 0.0);
  const JointState prod = joint_product(rho, ens.observed);
  CHECK(max_abs(start.mat - prod.mat) <= 1e-12);

  for (double t : {0.3, 1.0, 3.0}) {
    const JointState full = evolve_full(rho, ens, t);
    const JointState reduced = lemma_rhs(rho, ens, t);
    CHECK(std::abs(full.mat.trace().real() - 1.0) <= 1e-10);
    CHECK(max_abs(full.mat - reduced.mat) <= 1e-10);
    CHECK_NOTHROW(full.to_density().validate());
  }
}

TEST_CASE("decoherence map commutes with the conditional unitary") {
  const Grid g(-6.0, 6.0, 16);
  const CvDensity rho = centered_packet(g);
  const std::vector<EnvModel> observed{
      make_oscillator_env(8, OscillatorKind::position, 1.0)};
  const std::vector<EnvModel> traced{
      make_oscillator_env(2, OscillatorKind::position, 0.6)};

  // At t = 0 both routes are the identity up to complex-multiply rounding in
  // the (exactly unit) kernel entries.
  CHECK(check_commutation(rho, observed, traced, 0.0) <= 1e-30);

  // A zero generator produces no decoherence and no evolution.
  const std::vector<EnvModel> inert{
      EnvModel(CMatrix::Zero(2, 2), 1.0, 0.5 * CMatrix::Identity(2, 2), "inert")};
  CHECK(check_commutation(rho, observed, inert, 1.7) <= 1e-12);

  CHECK(check_commutation(rho, observed, traced, 1.7) <= 1e-10);
}

TEST_CASE("joint decoherence scales system blocks") {
  const Grid g(-6.0, 6.0, 16);
  const CvDensity rho = centered_packet(g);
  const std::vector<EnvModel> observed{
      make_oscillator_env(4, OscillatorKind::position, 1.0)};
  const JointState joint = joint_product(rho, observed);
  const JointState same = apply_decoherence_joint(joint, unit_gamma(g, 1.0));
  CHECK(max_abs(same.mat - joint.mat) == 0.0);

  const GammaKernel gamma = gaussian_gamma(1.0, 0.3, 1.0, g);
  const JointState dec = apply_decoherence_joint(joint, gamma);
  const Index d = 4;
  for (Index i = 0; i < g.n; i += 5)
    for (Index j = 0; j < g.n; j += 5) {
      const CMatrix expected = joint.mat.block(i * d, j * d, d, d) *
                               gamma.value(i, j);
      CHECK(max_abs(dec.mat.block(i * d, j * d, d, d) - expected) <= 1e-14);
    }
}
