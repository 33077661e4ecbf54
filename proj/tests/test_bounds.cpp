#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sbscv/bounds.hpp"

using namespace sbscv;

namespace {

CvDensity separated_cat() {
  const Grid g(-8.0, 8.0, 96);
  return cat_state(g, {-3.0, 3.0}, {Complex(1.0, 0.0), Complex(1.0, 0.0)}, 0.5);
}

CMatrix random_density(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = Complex(normal(rng), normal(rng));
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

struct CatFixture {
  CvDensity cat;
  Partition part;
  BranchData branches;
  std::vector<EnvModel> envs;
  double t = 1.0;
  JointState rho_t;
  EnvPvm pvm;
};

CatFixture make_cat_fixture(std::vector<EnvModel> envs, double t) {
  CatFixture f;
  const Grid g(-6.0, 6.0, 48);
  f.cat = cat_state(g, {-2.0, 2.0}, {Complex(1.0, 0.0), Complex(1.0, 0.0)}, 0.35);
  f.part = make_cut_partition(g, {0.0});
  f.branches = make_branches(f.cat, f.part);
  f.envs = std::move(envs);
  f.t = t;
  f.rho_t = joint_product(f.cat, f.envs);
  apply_conditional_unitary(f.rho_t, f.envs, t);
  f.pvm = heuristic_env_pvm(f.branches, f.envs, t, 1);
  return f;
}

}  // namespace

TEST_CASE("off-diagonal block estimate: exactly disjoint support") {
  const Grid g(-8.0, 8.0, 96);
  // Build a two-lobe state whose amplitudes are exactly zero outside [-4, 4):
  // the outer blocks of the kernel vanish identically.
  CVector psi = gaussian_wavepacket(g, -3.0, 0.5) + gaussian_wavepacket(g, 3.0, 0.5);
  for (Index j = 0; j < g.n; ++j)
    if (std::abs(g.point(j)) >= 4.0) psi(j) = 0.0;
  psi /= std::sqrt(psi.squaredNorm() * g.dx());
  const CvDensity rho = pure_state_density(g, psi);

  const GammaKernel gamma = gaussian_gamma(1.0, 0.5, 1.0, g);
  const BoundReport rep =
      kupsch_offdiag_bound(rho, gamma, {-8.0, -4.0}, {4.0, 8.0});
  CHECK(rep.lhs == 0.0);
  CHECK(rep.rhs == 0.0);
  CHECK(rep.satisfied);
  CHECK(rep.context == "disjoint support");
}

TEST_CASE("off-diagonal block estimate: trivial kernel") {
  const CvDensity cat = separated_cat();
  const GammaKernel ones = unit_gamma(cat.grid, 1.0);
  const BoundReport rep = kupsch_offdiag_bound(cat, ones, {-5.0, -1.0}, {1.0, 5.0});
  // No decoherence: the estimate degenerates to 2 while the block norm stays
  // below the state norm.
  CHECK(rep.satisfied);
  CHECK(rep.rhs >= 2.0 - 1e-12);
  CHECK(rep.lhs <= 1.0 + 1e-12);
}

TEST_CASE("off-diagonal block estimate: Gaussian kernel sweep with SVD oracle") {
  const CvDensity cat = separated_cat();
  const Grid& g = cat.grid;
  const Interval di{-5.0, -1.0}, dj{1.0, 5.0};
  double prev_lhs = 2.0;
  for (double t : {0.5, 1.0, 2.0, 4.0}) {
    const GammaKernel gamma = gaussian_gamma(t, 1.0, 1.0, g);
    const BoundReport rep = kupsch_offdiag_bound(cat, gamma, di, dj);
    CHECK(rep.satisfied);
    CHECK(rep.margin > 0.0);

    // Rebuild the decohered block and take the independent SVD route.
    const auto [fi, ci] = interval_index_range(g, di);
    const auto [fj, cj] = interval_index_range(g, dj);
    CMatrix block(ci, cj);
    for (Index a = 0; a < ci; ++a)
      for (Index b = 0; b < cj; ++b)
        block(a, b) = cat.kernel(fi + a, fj + b) * g.dx() *
                      gamma.value(fi + a, fj + b);
    CHECK(std::abs(rep.lhs - oracles::trace_norm_svd(block)) <= 1e-10);

    // Stronger decoherence shrinks the block.
    CHECK(rep.lhs < prev_lhs);
    prev_lhs = rep.lhs;
  }

  // Mismatched grids are rejected.
  const Grid other(-8.0, 8.0, 64);
  CHECK_THROWS_AS(
      kupsch_offdiag_bound(cat, gaussian_gamma(1.0, 1.0, 1.0, other), di, dj),
      InvalidInput);
}

TEST_CASE("kernel product estimate: degenerate identity factors reach equality") {
  const Grid g(-4.0, 4.0, 48);
  const double dz = g.dx();
  auto delta = [dz](double x, double z) {
    return std::abs(x - z) < 0.5 * dz ? Complex(1.0 / dz, 0.0) : Complex(0.0, 0.0);
  };
  const BoundReport rep = stolz_product_bound(delta, delta, g, g);
  CHECK(rep.satisfied);
  CHECK(std::abs(rep.lhs - rep.rhs) <= 1e-8 * rep.rhs);
  CHECK(std::abs(rep.lhs - static_cast<double>(g.n)) <= 1e-8 * g.n);
}

TEST_CASE("kernel product estimate: smooth random kernels") {
  const Grid xg(-4.0, 4.0, 48);
  const Grid zg(-6.0, 6.0, 64);
  std::mt19937_64 rng(510);
  std::uniform_real_distribution<double> up(0.4, 2.0);
  std::uniform_real_distribution<double> uc(-1.0, 1.0);
  for (int rep_i = 0; rep_i < 6; ++rep_i) {
    const double p1 = up(rng), p2 = up(rng), q1 = up(rng), q2 = up(rng);
    const double c1 = uc(rng), c2 = uc(rng), c3 = uc(rng), c4 = uc(rng);
    const double ph = uc(rng);
    auto a = [=](double x, double z) {
      return std::exp(Complex(-p1 * (x - c1) * (x - c1) - p2 * (z - c2) * (z - c2),
                              ph * x * z));
    };
    auto b = [=](double z, double y) {
      return std::exp(Complex(-q1 * (z - c3) * (z - c3) - q2 * (y - c4) * (y - c4),
                              -ph * z * y));
    };
    const BoundReport rep = stolz_product_bound(a, b, xg, zg);
    CHECK(rep.satisfied);
    CHECK(rep.lhs >= 0.0);
  }
}

TEST_CASE("closed-form Gaussian off-diagonal estimate: honest failure report") {
  // On a separated cat the closed-form right-hand side integrates squared
  // lobe densities and comes out orders of magnitude below the exact block
  // norm: the evaluator must report the violation, not hide it.
  const CvDensity cat = separated_cat();
  const Interval di{-5.0, -1.0}, dj{1.0, 5.0};
  double prev_rhs = std::numeric_limits<double>::infinity();
  for (double t : {0.5, 1.0, 2.0, 4.0}) {
    const BoundReport rep = gaussian_offdiag_bound(cat, t, 1.0, 1.0, di, dj);
    if (t <= 1.0) {
      CHECK(!rep.satisfied);
      CHECK(rep.margin < 0.0);
      CHECK(rep.rhs < 1e-4 * rep.lhs);  // several orders below the exact value
    }
    // The companion integral route with the correct square roots dominates
    // the exact block norm wherever the closed form fails.
    REQUIRE(rep.details.count("stolz_route") == 1);
    CHECK(rep.details.at("stolz_route") >= rep.lhs - 1e-10);
    // The estimate itself decays with time.
    CHECK(rep.rhs < prev_rhs);
    prev_rhs = rep.rhs;
  }

  CHECK_THROWS_AS(gaussian_offdiag_bound(cat, 0.0, 1.0, 1.0, di, dj), InvalidInput);
  CHECK_THROWS_AS(gaussian_offdiag_bound(cat, 1.0, -0.5, 1.0, di, dj), InvalidInput);
  CHECK_THROWS_AS(gaussian_offdiag_bound(cat, 1.0, 1.0, 1.0, di, {-2.0, 5.0}),
                  InvalidInput);
}

TEST_CASE("diagonal estimate: satisfied with coherent bookkeeping") {
  const CatFixture f = make_cat_fixture(
      {make_oscillator_env(6, OscillatorKind::position, 0.5)}, 1.0);
  const BoundReport rep =
      diagonal_bound(f.rho_t, f.part, f.pvm, f.branches, f.envs, f.t);
  CHECK(rep.satisfied);
  CHECK(rep.lhs >= 0.0);

  // Recompute the estimate from first principles.
  double sum = 0.0;
  for (size_t slot = 0; slot < f.branches.kept.size(); ++slot) {
    const double w = f.branches.weights[static_cast<size_t>(f.branches.kept[slot])];
    const DensityMatrix lam = lambda_map(f.branches.branches[slot], f.envs, f.t);
    const CMatrix& q = f.pvm.envs[0].cells[slot];
    sum += w * (1.0 - (lam.mat * q).trace().real());
  }
  CHECK(std::abs(rep.rhs - 4.0 * std::sqrt(sum)) <= 1e-10);

  CHECK(rep.details.at("jensen_slack") >= -1e-12);
  CHECK(rep.details.at("norm_agreement") <= 1e-10);
  CHECK(rep.details.count("N_0") == 1);
  CHECK(rep.details.count("N_1") == 1);
  CHECK(rep.details.at("N_0") >= 0.9);  // well-separated branches
}

TEST_CASE("diagonal estimate, several environments: closed-form cross route") {
  const CatFixture f = make_cat_fixture(
      {make_oscillator_env(4, OscillatorKind::position, 0.8),
       make_oscillator_env(4, OscillatorKind::position, 0.8)},
      1.0);
  const BoundReport rep =
      diagonal_bound_multi(f.rho_t, f.part, f.pvm, f.branches, f.envs, f.t);
  CHECK(rep.satisfied);
  REQUIRE(rep.details.count("route_agreement") == 1);
  CHECK(rep.details.at("route_agreement") <= 1e-8);

  // Distinct environments: the cross route is declared unavailable.
  const CatFixture g = make_cat_fixture(
      {make_oscillator_env(4, OscillatorKind::position, 0.8),
       make_oscillator_env(3, OscillatorKind::number, 0.5, 0.2)},
      1.0);
  const BoundReport rep2 =
      diagonal_bound_multi(g.rho_t, g.part, g.pvm, g.branches, g.envs, g.t);
  CHECK(rep2.satisfied);
  CHECK(rep2.details.count("route_agreement") == 0);
  CHECK(rep2.context.find("unavailable") != std::string::npos);
}

TEST_CASE("further diagonal estimate: non-negative terms around branch means") {
  const CatFixture f = make_cat_fixture(
      {make_oscillator_env(6, OscillatorKind::position, 0.5)}, 1.0);
  const BoundReport diag =
      diagonal_bound(f.rho_t, f.part, f.pvm, f.branches, f.envs, f.t);
  const BoundReport rep =
      further_diagonal_bound(f.rho_t, f.part, f.pvm, f.branches, f.envs, f.t);
  CHECK(rep.satisfied);
  CHECK(rep.details.at("term_mix") >= 0.0);
  CHECK(rep.details.at("term_project") >= 0.0);
  CHECK(std::abs(rep.rhs - rep.details.at("term_mix") -
                 rep.details.at("term_project")) <= 1e-12);
  // Same exact left-hand side as the per-cell pinching distance.
  CHECK(std::abs(rep.lhs - diag.lhs) <= 1e-12);
  CHECK(rep.context.empty());  // branch means sit inside their cells

  // Two environments take the telescoped per-environment route.
  const CatFixture g = make_cat_fixture(
      {make_oscillator_env(4, OscillatorKind::position, 0.8),
       make_oscillator_env(4, OscillatorKind::position, 0.8)},
      1.0);
  const BoundReport rep2 =
      further_diagonal_bound(g.rho_t, g.part, g.pvm, g.branches, g.envs, g.t);
  CHECK(rep2.satisfied);
  CHECK(rep2.details.at("term_mix") >= 0.0);
  CHECK(rep2.details.at("term_project") >= 0.0);
}

TEST_CASE("telescoping product difference") {
  const std::vector<Index> dims{2, 3, 2};
  for (int rep_i = 0; rep_i < 8; ++rep_i) {
    std::vector<CMatrix> a, b;
    for (size_t k = 0; k < dims.size(); ++k) {
      a.push_back(random_density(dims[k], 900 + 10 * rep_i + k));
      b.push_back(random_density(dims[k], 950 + 10 * rep_i + k));
    }
    const BoundReport rep = telescopic_bound(a, b);
    CHECK(rep.satisfied);
    CHECK(rep.lhs >= 0.0);

    const BoundReport same = telescopic_bound(a, a);
    CHECK(same.lhs <= 1e-12);
    CHECK(same.rhs <= 1e-12);
  }
  CHECK_THROWS_AS(telescopic_bound({}, {}), InvalidInput);
  CHECK_THROWS_AS(telescopic_bound({CMatrix::Identity(2, 2)},
                                   {CMatrix::Identity(3, 3)}),
                  InvalidInput);
}

TEST_CASE("trace-distance rescaling after normalization loss") {
  CHECK(trace_distance_rescale(0.3, 0.9) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK_THROWS_AS(trace_distance_rescale(0.3, -0.1), InvalidInput);
  CHECK_THROWS_AS(trace_distance_rescale(0.3, 1.1), InvalidInput);
  CHECK_THROWS_AS(trace_distance_rescale(-0.1, 0.5), InvalidInput);

  // Property: || rho - sigma ||_1 <= 2 || rho - eta sigma ||_1 for eta in [0,1].
  for (int rep_i = 0; rep_i < 20; ++rep_i) {
    const CMatrix rho = random_density(5, 1200 + rep_i);
    const CMatrix sigma = random_density(5, 1300 + rep_i);
    for (double eta : {0.0, 0.35, 0.8, 1.0}) {
      const double budget = trace_norm(rho - eta * sigma);
      CHECK(trace_norm(rho - sigma) <= trace_distance_rescale(budget, eta) + 1e-10);
    }
  }
}

TEST_CASE("pure-state distance formula: spectral route vs overlap route") {
  const CVector psi = random_unit(8, 1400);
  const BoundReport same = pure_distance_formula_check(psi, psi);
  CHECK(same.satisfied);
  CHECK(same.lhs <= 1e-12);
  CHECK(same.rhs <= 1e-7);

  CVector e0 = CVector::Zero(8), e1 = CVector::Zero(8);
  e0(0) = 1.0;
  e1(1) = 1.0;
  const BoundReport ortho = pure_distance_formula_check(e0, e1);
  CHECK(ortho.satisfied);
  CHECK(std::abs(ortho.lhs - 1.0) <= 1e-12);
  CHECK(std::abs(ortho.rhs - 1.0) <= 1e-12);

  for (int rep_i = 0; rep_i < 25; ++rep_i) {
    const CVector a = random_unit(8, 1500 + rep_i);
    const CVector b = random_unit(8, 1600 + rep_i);
    const BoundReport rep = pure_distance_formula_check(a, b);
    CHECK(rep.satisfied);
    CHECK(rep.details.at("abs_diff") <= 1e-10);
  }

  CHECK_THROWS_AS(pure_distance_formula_check(e0, 0.5 * e1), InvalidInput);
}
