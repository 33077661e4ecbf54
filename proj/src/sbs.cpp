#include "sbscv/sbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace sbscv {

namespace {

Partition finalize_partition(const Grid& grid, std::vector<Interval> cells) {
  Partition p{grid, std::move(cells), {}, std::vector<int>(grid.n, -1)};
  for (size_t i = 0; i < p.cells.size(); ++i) {
    std::pair<Index, Index> range;
    try {
      range = interval_index_range(grid, p.cells[i]);
    } catch (const InvalidInput& e) {
      std::ostringstream msg;
      msg << "partition cell " << i << ": " << e.what();
      throw InvalidInput(msg.str());
    }
    p.ranges.push_back(range);
    for (Index j = range.first; j < range.first + range.second; ++j) {
      if (p.cell_of[j] != -1)
        throw InvalidInput("partition cells overlap on a grid point");
      p.cell_of[j] = static_cast<int>(i);
    }
  }
  for (Index j = 0; j < grid.n; ++j)
    if (p.cell_of[j] == -1)
      throw InvalidInput("partition does not cover every grid point");
  return p;
}

// Q_i = ⊗_k P_i^k for kept-cell slot i.
CMatrix joint_cell_projector(const EnvPvm& pvm, size_t slot) {
  std::vector<CMatrix> parts;
  parts.reserve(pvm.envs.size());
  for (const auto& part : pvm.envs) parts.push_back(part.cells.at(slot));
  return kron_all(parts);
}

}  // namespace

CMatrix Partition::projector(int cell) const {
  if (cell < 0 || cell >= n_cells()) throw InvalidInput("Partition: cell out of range");
  return interval_projector(grid, cells[static_cast<size_t>(cell)]);
}

Partition make_uniform_partition(const Grid& grid, int k) {
  if (k < 1) throw InvalidInput("make_uniform_partition: need at least one cell");
  const double w = (grid.x_max - grid.x_min) / k;
  std::vector<Interval> cells;
  for (int i = 0; i < k; ++i) {
    const double a = grid.x_min + i * w;
    const double b = (i == k - 1) ? grid.x_max : grid.x_min + (i + 1) * w;
    cells.push_back(Interval{a, b});
  }
  return finalize_partition(grid, std::move(cells));
}

Partition make_cut_partition(const Grid& grid, const std::vector<double>& cuts) {
  for (size_t i = 0; i < cuts.size(); ++i) {
    if (cuts[i] <= grid.x_min || cuts[i] >= grid.x_max)
      throw InvalidInput("make_cut_partition: cut outside the open grid interior");
    if (i > 0 && cuts[i] <= cuts[i - 1])
      throw InvalidInput("make_cut_partition: cuts must be strictly increasing");
  }
  std::vector<Interval> cells;
  double a = grid.x_min;
  for (double c : cuts) {
    cells.push_back(Interval{a, c});
    a = c;
  }
  cells.push_back(Interval{a, grid.x_max});
  return finalize_partition(grid, std::move(cells));
}

double branch_weight(const CvDensity& rho_s, const Interval& cell) {
  const auto [first, count] = interval_index_range(rho_s.grid, cell);
  double w = 0.0;
  for (Index j = first; j < first + count; ++j)
    w += rho_s.kernel(j, j).real() * rho_s.grid.dx();
  return w;
}

CvDensity conditional_branch_state(const CvDensity& rho_s, const Interval& cell) {
  const double w = branch_weight(rho_s, cell);
  if (w <= kEmptyBranchWeight) {
    std::ostringstream msg;
    msg << "empty branch: weight " << w << " on [" << cell.a << ", " << cell.b << ")";
    throw NumericError(msg.str());
  }
  const auto [first, count] = interval_index_range(rho_s.grid, cell);
  CMatrix kernel = CMatrix::Zero(rho_s.grid.n, rho_s.grid.n);
  kernel.block(first, first, count, count) =
      rho_s.kernel.block(first, first, count, count) / w;
  return CvDensity{rho_s.grid, std::move(kernel)};
}

BranchData make_branches(const CvDensity& rho_s, const Partition& partition) {
  BranchData data;
  for (int i = 0; i < partition.n_cells(); ++i) {
    const Interval& cell = partition.cells[static_cast<size_t>(i)];
    const double w = branch_weight(rho_s, cell);
    data.weights.push_back(w);
    if (w <= kEmptyBranchWeight) continue;
    data.kept.push_back(i);
    data.branches.push_back(conditional_branch_state(rho_s, cell));
    const CvDensity& branch = data.branches.back();
    double mean = 0.0;
    for (Index j = 0; j < rho_s.grid.n; ++j)
      mean += rho_s.grid.point(j) * branch.weight(j);
    data.means.push_back(mean);
  }
  if (data.kept.empty())
    throw NumericError("empty branch decomposition: no cell carries weight");
  return data;
}

DensityMatrix lambda_map(const CvDensity& branch, const std::vector<EnvModel>& envs,
                         double t) {
  if (envs.empty()) throw InvalidInput("lambda_map: need at least one environment");
  std::vector<Index> dims;
  Index d = 1;
  for (const auto& e : envs) {
    dims.push_back(e.dim);
    d *= e.dim;
  }
  CMatrix out = CMatrix::Zero(d, d);
  for (Index j = 0; j < branch.grid.n; ++j) {
    const double w = branch.weight(j);
    if (w <= 0.0) continue;
    const double x = branch.grid.point(j);
    if (envs.size() == 1) {
      out += w * branch_state(envs[0], t, x);
    } else {
      std::vector<CMatrix> factors;
      factors.reserve(envs.size());
      for (const auto& e : envs) factors.push_back(branch_state(e, t, x));
      out += w * kron_all(factors);
    }
  }
  return DensityMatrix(std::move(out), std::move(dims));
}

void validate_env_pvm(const EnvPvm& pvm, const std::vector<EnvModel>& envs,
                      double tol) {
  if (pvm.envs.size() != envs.size())
    throw InvalidInput("EnvPvm: one projector family per environment required");
  for (size_t k = 0; k < envs.size(); ++k) {
    const auto& part = pvm.envs[k];
    const Index d = envs[k].dim;
    CMatrix sum = CMatrix::Zero(d, d);
    for (size_t i = 0; i < part.cells.size(); ++i) {
      const CMatrix& p = part.cells[i];
      if (p.rows() != d || p.cols() != d)
        throw InvalidInput("EnvPvm: projector dimension mismatch");
      if (!is_hermitian(p, tol)) throw InvalidInput("EnvPvm: projector not Hermitian");
      if (max_abs(p * p - p) > tol)
        throw InvalidInput("EnvPvm: projector not idempotent");
      for (size_t l = i + 1; l < part.cells.size(); ++l)
        if (max_abs(p * part.cells[l]) > tol)
          throw InvalidInput("EnvPvm: cell projectors not orthogonal");
      sum += p;
    }
    if (part.remainder.rows() != d || part.remainder.cols() != d)
      throw InvalidInput("EnvPvm: remainder dimension mismatch");
    if (max_abs(part.remainder * part.remainder - part.remainder) > tol)
      throw InvalidInput("EnvPvm: remainder not idempotent");
    sum += part.remainder;
    if (max_abs(sum - CMatrix::Identity(d, d)) > tol)
      throw InvalidInput("EnvPvm: family does not resolve the identity");
  }
}

EnvPvm heuristic_env_pvm(const BranchData& branches, const std::vector<EnvModel>& envs,
                         double t, int rank) {
  if (envs.empty()) throw InvalidInput("heuristic_env_pvm: need environments");
  const size_t n_cells = branches.kept.size();

  // Heaviest branches claim their subspaces first.
  std::vector<size_t> order(n_cells);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return branches.weights[static_cast<size_t>(branches.kept[a])] >
           branches.weights[static_cast<size_t>(branches.kept[b])];
  });

  EnvPvm pvm;
  for (const auto& env : envs) {
    const Index d = env.dim;
    if (d < static_cast<Index>(n_cells)) {
      std::ostringstream msg;
      msg << "rank starvation: environment dim " << d << " cannot host "
          << n_cells << " projector cells";
      throw NumericError(msg.str());
    }
    const Index quota =
        rank > 0 ? static_cast<Index>(rank) : std::max<Index>(1, d / static_cast<Index>(n_cells));

    EnvPvmPart part;
    part.cells.assign(n_cells, CMatrix());
    std::vector<CVector> used;

    for (size_t slot : order) {
      const DensityMatrix lam = lambda_map(branches.branches[slot], {env}, t);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(lam.mat);
      std::vector<CVector> basis;
      bool leading_rejected = false;
      for (Index m = d - 1; m >= 0 && static_cast<Index>(basis.size()) < quota; --m) {
        CVector v = es.eigenvectors().col(m);
        for (int pass = 0; pass < 2; ++pass)
          for (const auto& u : used) v -= u.dot(v) * u;
        const double norm = v.norm();
        if (norm <= 1e-8) {
          if (m == d - 1 && es.eigenvalues()(m) > 1e-12) leading_rejected = true;
          continue;
        }
        v /= norm;
        basis.push_back(v);
        used.push_back(v);
      }
      if (basis.empty()) {
        std::ostringstream msg;
        msg << "rank starvation: no orthogonal direction left for cell "
            << branches.kept[slot] << " in environment '" << env.label << "'";
        throw NumericError(msg.str());
      }
      if (leading_rejected) {
        std::ostringstream msg;
        msg << "cell " << branches.kept[slot]
            << ": leading eigenvector degenerate with an earlier cell; assigned by order";
        part.warnings.push_back(msg.str());
      }
      CMatrix p = CMatrix::Zero(d, d);
      for (const auto& v : basis) p += v * v.adjoint();
      part.cells[slot] = std::move(p);
    }

    CMatrix sum = CMatrix::Zero(d, d);
    for (const auto& p : part.cells) sum += p;
    part.remainder = CMatrix::Identity(d, d) - sum;
    // Hermitize against roundoff so downstream idempotence checks stay sharp.
    part.remainder = ((part.remainder + part.remainder.adjoint()) / 2.0).eval();
    pvm.envs.push_back(std::move(part));
  }
  validate_env_pvm(pvm, envs, 1e-9);
  return pvm;
}

EnvPvm exhaustive_env_pvm(const BranchData& branches, const std::vector<EnvModel>& envs,
                          double t) {
  const size_t n_cells = branches.kept.size();
  EnvPvm pvm;
  for (const auto& env : envs) {
    const Index d = env.dim;
    if (d > 6)
      throw ResourceError("exhaustive_env_pvm: environment dim > 6");

    std::vector<CMatrix> lams;
    std::vector<double> p_i;
    CMatrix score = CMatrix::Zero(d, d);
    for (size_t slot = 0; slot < n_cells; ++slot) {
      const double w = branches.weights[static_cast<size_t>(branches.kept[slot])];
      lams.push_back(lambda_map(branches.branches[slot], {env}, t).mat);
      p_i.push_back(w);
      score += w * lams.back();
    }

    auto objective = [&](const std::vector<CMatrix>& cells) {
      double val = 0.0;
      for (size_t i = 0; i < n_cells; ++i)
        val += p_i[i] * (lams[i] * cells[i]).trace().real();
      return val;
    };

    // Family 1: eigenbasis of the weighted score operator; each basis vector
    // goes to the cell where it earns the most (separable objective, so the
    // per-vector argmax is the exact optimum over all assignments).
    Eigen::SelfAdjointEigenSolver<CMatrix> es(score);
    std::vector<CMatrix> best(n_cells, CMatrix::Zero(d, d));
    for (Index m = 0; m < d; ++m) {
      const CVector v = es.eigenvectors().col(m);
      size_t pick = 0;
      double gain = -1.0;
      for (size_t i = 0; i < n_cells; ++i) {
        const double g = p_i[i] * (v.dot(lams[i] * v)).real();
        if (g > gain + 1e-15) {
          gain = g;
          pick = i;
        }
      }
      best[pick] += v * v.adjoint();
    }
    double best_val = objective(best);

    // Family 2 (two cells): Helstrom split of the weighted difference.
    if (n_cells == 2) {
      Eigen::SelfAdjointEigenSolver<CMatrix> hs(CMatrix(p_i[0] * lams[0] - p_i[1] * lams[1]));
      std::vector<CMatrix> hel(2, CMatrix::Zero(d, d));
      for (Index m = 0; m < d; ++m) {
        const CVector v = hs.eigenvectors().col(m);
        hel[hs.eigenvalues()(m) >= 0.0 ? 0 : 1] += v * v.adjoint();
      }
      const double hel_val = objective(hel);
      if (hel_val > best_val + 1e-15) {
        best = hel;
        best_val = hel_val;
      }
    }

    EnvPvmPart part;
    part.cells = best;
    CMatrix sum = CMatrix::Zero(d, d);
    for (const auto& p : part.cells) sum += p;
    part.remainder = ((CMatrix::Identity(d, d) - sum +
                       (CMatrix::Identity(d, d) - sum).adjoint()) / 2.0).eval();
    pvm.envs.push_back(std::move(part));
  }
  validate_env_pvm(pvm, envs, 1e-9);
  return pvm;
}

double pvm_objective(const EnvPvm& pvm, const BranchData& branches,
                     const std::vector<EnvModel>& envs, double t) {
  double val = 0.0;
  for (size_t slot = 0; slot < branches.kept.size(); ++slot) {
    const double w = branches.weights[static_cast<size_t>(branches.kept[slot])];
    const DensityMatrix lam = lambda_map(branches.branches[slot], envs, t);
    const CMatrix q = joint_cell_projector(pvm, slot);
    val += w * (lam.mat * q).trace().real();
  }
  return val;
}

SbsCandidate build_sbs_candidate(const JointState& rho_t, const Partition& partition,
                                 const EnvPvm& pvm, const BranchData& branches) {
  if (!(rho_t.grid == partition.grid))
    throw InvalidInput("build_sbs_candidate: grid mismatch");
  if (pvm.envs.size() != rho_t.env_dims.size())
    throw InvalidInput("build_sbs_candidate: PVM does not match environment count");
  const Index d = rho_t.env_dim();

  SbsCandidate cand;
  cand.partition = partition;
  cand.pvm = pvm;
  cand.kept = branches.kept;
  cand.state = JointState{rho_t.grid, rho_t.env_dims,
                          CMatrix::Zero(rho_t.mat.rows(), rho_t.mat.cols())};

  double norm = 0.0;
  std::vector<double> block_traces;
  for (size_t slot = 0; slot < branches.kept.size(); ++slot) {
    const int cell = branches.kept[slot];
    const auto [first, count] = partition.ranges[static_cast<size_t>(cell)];
    const CMatrix q = joint_cell_projector(pvm, slot);
    double block_trace = 0.0;
    for (Index a = first; a < first + count; ++a)
      for (Index b = first; b < first + count; ++b) {
        const CMatrix blk = q * rho_t.mat.block(a * d, b * d, d, d) * q;
        cand.state.mat.block(a * d, b * d, d, d) = blk;
        if (a == b) block_trace += blk.trace().real();
      }
    block_traces.push_back(block_trace);
    norm += block_trace;
    cand.weights.push_back(branches.weights[static_cast<size_t>(cell)]);
  }
  if (norm < 1e-12) {
    std::ostringstream msg;
    msg << "degenerate candidate: normalization " << norm << " below 1e-12";
    throw NumericError(msg.str());
  }
  cand.norm_const = norm;
  cand.state.mat /= norm;
  for (size_t slot = 0; slot < block_traces.size(); ++slot)
    cand.cell_norms.push_back(block_traces[slot] / cand.weights[slot]);
  return cand;
}

double sbs_distance(const JointState& rho_t, const SbsCandidate& cand) {
  if (rho_t.mat.rows() != cand.state.mat.rows())
    throw InvalidInput("sbs_distance: dimension mismatch");
  return 0.5 * trace_norm(rho_t.mat - cand.state.mat);
}

std::pair<JointState, JointState> split_diag_offdiag(const JointState& rho,
                                                     const Partition& partition) {
  if (!(rho.grid == partition.grid))
    throw InvalidInput("split_diag_offdiag: grid mismatch");
  const Index d = rho.env_dim();
  JointState diag = rho;
  for (Index i = 0; i < rho.grid.n; ++i)
    for (Index j = 0; j < rho.grid.n; ++j)
      if (partition.cell_of[i] != partition.cell_of[j])
        diag.mat.block(i * d, j * d, d, d).setZero();
  JointState off = rho;
  off.mat -= diag.mat;
  return {std::move(diag), std::move(off)};
}

std::vector<RMatrix> branch_fidelity_matrices(const SbsCandidate& cand) {
  const size_t n_kept = cand.kept.size();
  const size_t n_env = cand.state.env_dims.size();
  const Index d = cand.state.env_dim();

  // Reduced branch state per (cell slot, environment); empty matrix = undefined.
  std::vector<std::vector<CMatrix>> reduced(n_kept, std::vector<CMatrix>(n_env));
  for (size_t slot = 0; slot < n_kept; ++slot) {
    const int cell = cand.kept[static_cast<size_t>(slot)];
    const auto [first, count] =
        cand.partition.ranges[static_cast<size_t>(cell)];
    CMatrix block = cand.state.mat.block(first * d, first * d, count * d, count * d);
    const double tr = block.trace().real();
    if (tr < kEmptyBranchWeight) continue;
    block /= tr;
    std::vector<Index> dims{count};
    dims.insert(dims.end(), cand.state.env_dims.begin(), cand.state.env_dims.end());
    const DensityMatrix joint(block, dims);
    for (size_t k = 0; k < n_env; ++k)
      reduced[slot][k] = partial_trace(joint, {static_cast<int>(k) + 1}).mat;
  }

  std::vector<RMatrix> out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (size_t k = 0; k < n_env; ++k) {
    RMatrix f(n_kept, n_kept);
    for (size_t i = 0; i < n_kept; ++i)
      for (size_t j = i; j < n_kept; ++j) {
        double val;
        if (reduced[i][k].size() == 0 || reduced[j][k].size() == 0)
          val = nan;
        else if (i == j)
          val = 1.0;
        else
          val = fidelity(reduced[i][k], reduced[j][k]);
        f(static_cast<Index>(i), static_cast<Index>(j)) = val;
        f(static_cast<Index>(j), static_cast<Index>(i)) = val;
      }
    out.push_back(std::move(f));
  }
  return out;
}

double qsd_error(const std::vector<double>& priors, const std::vector<CMatrix>& states,
                 const std::vector<CMatrix>& measurement) {
  if (priors.empty() || priors.size() != states.size())
    throw InvalidInput("qsd_error: need matching priors and states");
  if (measurement.size() < states.size())
    throw InvalidInput("qsd_error: need at least one measurement operator per state");
  double sum = 0.0;
  for (double p : priors) {
    if (p < -1e-12 || !std::isfinite(p))
      throw InvalidInput("qsd_error: priors must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-10)
    throw InvalidInput("qsd_error: priors must sum to 1");

  const Index d = states.front().rows();
  CMatrix resolution = CMatrix::Zero(d, d);
  for (const auto& m : measurement) {
    if (m.rows() != d || m.cols() != d)
      throw InvalidInput("qsd_error: operator dimension mismatch");
    resolution += m.adjoint() * m;
  }
  if (max_abs(resolution - CMatrix::Identity(d, d)) > 1e-8)
    throw InvalidInput("qsd_error: non-resolving measurement");

  double success = 0.0;
  for (size_t i = 0; i < states.size(); ++i) {
    if (states[i].rows() != d || states[i].cols() != d)
      throw InvalidInput("qsd_error: state dimension mismatch");
    success +=
        priors[i] * (measurement[i] * states[i] * measurement[i].adjoint()).trace().real();
  }
  return 1.0 - success;
}

}  // namespace sbscv
