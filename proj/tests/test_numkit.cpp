#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "oracles.hpp"
#include "sbscv/matrix.hpp"

using namespace sbscv;

namespace {

CMatrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = Complex(normal(rng), normal(rng));
  return a;
}

CMatrix random_hermitian(Index n, std::uint64_t seed) {
  const CMatrix a = random_matrix(n, n, seed);
  return 0.5 * (a + a.adjoint());
}

CMatrix random_density(Index n, std::uint64_t seed) {
  const CMatrix a = random_matrix(n, n, seed);
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

CVector random_unit(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(normal(rng), normal(rng));
  return v.normalized();
}

}  // namespace

TEST_CASE("trace norm: identity, density matrices, rank-1 cross terms") {
  CHECK(trace_norm(CMatrix::Identity(2, 2)) == doctest::Approx(2.0).epsilon(1e-14));

  const CMatrix rho = random_density(6, 101);
  CHECK(std::abs(trace_norm(rho) - 1.0) <= 1e-12);

  // |psi><phi| has a single singular value ||psi|| ||phi|| = 1.
  const CVector psi = random_unit(8, 102);
  const CVector phi = random_unit(8, 103);
  const CMatrix cross = psi * phi.adjoint();
  CHECK(std::abs(trace_norm(cross) - 1.0) <= 1e-12);
  CHECK(std::abs(trace_norm(cross) - oracles::trace_norm_svd(cross)) <= 1e-12);

  // General (non-Hermitian) matrices agree with the independent SVD route.
  for (std::uint64_t s : {201, 202, 203}) {
    const CMatrix a = random_matrix(7, 7, s);
    CHECK(std::abs(trace_norm(a) - oracles::trace_norm_svd(a)) <= 1e-10);
  }
}

TEST_CASE("trace norm: triangle inequality and absolute homogeneity") {
  std::mt19937_64 rng(300);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    const CMatrix a = random_matrix(5, 5, 400 + rep);
    const CMatrix b = random_matrix(5, 5, 500 + rep);
    CHECK(trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-10);
    const double c = coeff(rng);
    CHECK(std::abs(trace_norm(c * a) - std::abs(c) * trace_norm(a)) <= 1e-10);
  }
}

TEST_CASE("trace norm: Hoelder pairing with the operator norm") {
  for (int rep = 0; rep < 10; ++rep) {
    const CMatrix a = random_matrix(6, 6, 600 + rep);
    const CMatrix c = random_matrix(6, 6, 700 + rep);
    CHECK(trace_norm(a * c) <= operator_norm(a) * trace_norm(c) + 1e-10);
  }
}

TEST_CASE("trace distance of a matrix from itself is zero") {
  const CMatrix rho = random_density(5, 800);
  CHECK(trace_distance(rho, rho) <= 1e-14);
  const CMatrix sigma = random_density(5, 801);
  CHECK(std::abs(trace_distance(rho, sigma) - 0.5 * trace_norm(rho - sigma)) <= 1e-14);
}

TEST_CASE("fidelity: self, orthogonal pure states, pure-state overlap, symmetry") {
  const CMatrix rho = random_density(6, 900);
  CHECK(std::abs(fidelity(rho, rho) - 1.0) <= 1e-8);

  CVector e0 = CVector::Zero(4), e1 = CVector::Zero(4);
  e0(0) = 1.0;
  e1(1) = 1.0;
  const CMatrix p0 = e0 * e0.adjoint();
  const CMatrix p1 = e1 * e1.adjoint();
  CHECK(fidelity(p0, p1) <= 1e-12);

  const CVector psi = random_unit(6, 901);
  const CVector phi = random_unit(6, 902);
  const double overlap = std::norm((phi.adjoint() * psi)(0));
  CHECK(std::abs(fidelity(psi * psi.adjoint(), phi * phi.adjoint()) - overlap) <= 1e-8);

  const CMatrix sigma = random_density(6, 903);
  CHECK(std::abs(fidelity(rho, sigma) - fidelity(sigma, rho)) <= 1e-8);
}

TEST_CASE("herm_expm: s = 0, diagonal generators, Taylor oracle, unitarity") {
  const CMatrix h = random_hermitian(5, 1000);
  const CMatrix u0 = herm_expm(h, 0.0);
  CHECK(max_abs(u0 - CMatrix::Identity(5, 5)) <= 1e-13);

  // Diagonal generator: entries are plain phases.
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = -0.5;
  d(2, 2) = 2.0;
  const double s = 1.3;
  const CMatrix ud = herm_expm(d, s);
  for (Index i = 0; i < 3; ++i) {
    CHECK(std::abs(ud(i, i) - std::exp(Complex(0.0, -s * d(i, i).real()))) <= 1e-13);
    for (Index j = 0; j < 3; ++j)
      if (i != j) CHECK(std::abs(ud(i, j)) <= 1e-13);
  }

  const CMatrix h8 = random_hermitian(8, 1001);
  const CMatrix u = herm_expm(h8, 0.7);
  CHECK(max_abs(u - oracles::expm_taylor(h8, 0.7)) <= 1e-9);
  CHECK(max_abs(u * u.adjoint() - CMatrix::Identity(8, 8)) <= 1e-10);

  // Group property exp(-i(s+r)H) = exp(-isH) exp(-irH).
  const CMatrix u2 = herm_expm(h8, 0.4);
  CHECK(max_abs(herm_expm(h8, 1.1) - u * u2) <= 1e-10);
}

TEST_CASE("kron: identities, mixed-product rule, trace multiplicativity") {
  CHECK(max_abs(kron(CMatrix::Identity(2, 2), CMatrix::Identity(3, 3)) -
                CMatrix::Identity(6, 6)) == 0.0);

  const CMatrix a = random_matrix(3, 3, 1100);
  const CMatrix b = random_matrix(3, 3, 1101);
  const CMatrix i4 = CMatrix::Identity(4, 4);
  CHECK(max_abs(kron(a, i4) * kron(b, i4) - kron(a * b, i4)) <= 1e-12);

  const CMatrix c = random_matrix(4, 4, 1102);
  const Complex lhs = kron(a, c).trace();
  const Complex rhs = a.trace() * c.trace();
  CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));

  const std::vector<CMatrix> factors{a, c, CMatrix::Identity(2, 2)};
  CHECK(max_abs(kron_all(factors) - kron(kron(a, c), CMatrix::Identity(2, 2))) == 0.0);
}

TEST_CASE("kron: dimension cap enforced and restorable") {
  const Index previous = dimension_cap();
  set_dimension_cap(8);
  CHECK_THROWS_AS(kron(CMatrix::Identity(4, 4), CMatrix::Identity(4, 4)),
                  ResourceError);
  // At the cap exactly is allowed.
  CHECK_NOTHROW(kron(CMatrix::Identity(2, 2), CMatrix::Identity(4, 4)));
  set_dimension_cap(previous);
  CHECK(dimension_cap() == previous);
}

TEST_CASE("partial trace: product states, Bell state, loop oracle on 2x3x2") {
  const CMatrix rho_a = random_density(3, 1200);
  const CMatrix rho_b = random_density(4, 1201);
  const DensityMatrix joint{kron(rho_a, rho_b), {3, 4}};
  const DensityMatrix red_a = partial_trace(joint, {0});
  CHECK(max_abs(red_a.mat - rho_a) <= 1e-12);
  CHECK(red_a.dims == std::vector<Index>{3});
  const DensityMatrix red_b = partial_trace(joint, {1});
  CHECK(max_abs(red_b.mat - rho_b) <= 1e-12);

  // Bell pair: either marginal is maximally mixed.
  CVector bell = CVector::Zero(4);
  bell(0) = 1.0 / std::sqrt(2.0);
  bell(3) = 1.0 / std::sqrt(2.0);
  const DensityMatrix bell_rho{bell * bell.adjoint(), {2, 2}};
  CHECK(max_abs(partial_trace(bell_rho, {0}).mat - 0.5 * CMatrix::Identity(2, 2)) <=
        1e-14);
  CHECK(max_abs(partial_trace(bell_rho, {1}).mat - 0.5 * CMatrix::Identity(2, 2)) <=
        1e-14);

  // Three factors, keep the outer two; checked against the index-loop oracle.
  const CMatrix big = random_density(12, 1202);
  const DensityMatrix rho{big, {2, 3, 2}};
  const DensityMatrix kept = partial_trace(rho, {0, 2});
  CHECK(kept.dims == std::vector<Index>{2, 2});
  CHECK(max_abs(kept.mat - oracles::partial_trace_loops(big, {2, 3, 2}, {0, 2})) <=
        1e-12);
  // Trace preserved.
  CHECK(std::abs(kept.mat.trace().real() - 1.0) <= 1e-12);
}

TEST_CASE("herm_sqrt_psd: clip rule boundaries") {
  // Small negative eigenvalue inside the clip window: squared root reproduces
  // the clipped matrix.
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 0.25;
  d(2, 2) = -5e-11;
  const CMatrix r = herm_sqrt_psd(d);
  CHECK(std::abs(r(0, 0).real() - 1.0) <= 1e-12);
  CHECK(std::abs(r(1, 1).real() - 0.5) <= 1e-12);
  CHECK(std::abs(r(2, 2)) <= 1e-5);  // clipped to zero (sqrt of ~0)

  d(2, 2) = -1e-9;  // beyond the clip window
  CHECK_THROWS_AS(herm_sqrt_psd(d), NumericError);
}

TEST_CASE("DensityMatrix validation catches broken inputs") {
  const CMatrix rho = random_density(4, 1300);
  CHECK_NOTHROW(DensityMatrix(rho, {4}).validate());

  CMatrix traceless = rho * 0.5;
  CHECK_THROWS_AS(DensityMatrix(traceless, {4}).validate(), Error);

  CMatrix non_herm = rho;
  non_herm(0, 1) += Complex(0.0, 1e-3);
  CHECK_THROWS_AS(DensityMatrix(non_herm, {4}).validate(), Error);
}

TEST_CASE("non-finite input is rejected") {
  CMatrix bad = CMatrix::Identity(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK(!is_finite(bad));
  CHECK_THROWS_AS(trace_norm(bad), Error);
}
