#include "sbscv/matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace sbscv {

namespace {

std::atomic<Index> g_cap{0};  // 0 = uninitialized

Index default_cap() {
  if (const char* env = std::getenv("SBSCV_CAP")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 1) return static_cast<Index>(v);
  }
  return 8192;
}

}  // namespace

Index dimension_cap() {
  Index c = g_cap.load();
  return c > 0 ? c : default_cap();
}

void set_dimension_cap(Index cap) {
  if (cap < 2) throw InvalidInput("dimension cap must be at least 2");
  g_cap.store(cap);
}

bool is_finite(const CMatrix& a) { return a.allFinite(); }

double max_abs(const CMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_hermitian(const CMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = 1.0 + max_abs(a);
  return max_abs(a - a.adjoint()) <= rel_tol * scale;
}

double trace_norm(const CMatrix& a) {
  if (!is_finite(a)) throw InvalidInput("trace_norm: non-finite entries");
  if (a.size() == 0) return 0.0;
  if (is_hermitian(a)) {
    // For Hermitian a the singular values are |eigenvalues|.
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues().sum();
}

double operator_norm(const CMatrix& a) {
  if (!is_finite(a)) throw InvalidInput("operator_norm: non-finite entries");
  if (a.size() == 0) return 0.0;
  if (is_hermitian(a)) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

double trace_distance(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidInput("trace_distance: shape mismatch");
  return 0.5 * trace_norm(a - b);
}

CMatrix herm_expm(const CMatrix& h, double s) {
  if (h.rows() != h.cols()) throw InvalidInput("herm_expm: matrix not square");
  if (!is_finite(h) || !std::isfinite(s))
    throw InvalidInput("herm_expm: non-finite input");
  if (!is_hermitian(h, 1e-12))
    throw InvalidInput("herm_expm: matrix not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const Index n = h.rows();
  CVector phases(n);
  for (Index k = 0; k < n; ++k) {
    const double angle = -s * es.eigenvalues()(k);
    phases(k) = Complex(std::cos(angle), std::sin(angle));
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  const Index rows = a.rows() * b.rows();
  const Index cols = a.cols() * b.cols();
  const Index cap = dimension_cap();
  if (rows > cap || cols > cap) {
    std::ostringstream msg;
    msg << "kron: result dimension " << rows << "x" << cols
        << " exceeds the configured cap " << cap;
    throw ResourceError(msg.str());
  }
  CMatrix out(rows, cols);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix kron_all(const std::vector<CMatrix>& factors) {
  if (factors.empty()) return CMatrix::Identity(1, 1);
  CMatrix out = factors.front();
  for (size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

CMatrix herm_sqrt_psd(const CMatrix& rho, double clip_tol) {
  if (!is_hermitian(rho, 1e-10))
    throw InvalidInput("herm_sqrt_psd: matrix not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  RVector vals = es.eigenvalues();
  for (Index k = 0; k < vals.size(); ++k) {
    if (vals(k) < -clip_tol) {
      std::ostringstream msg;
      msg << "herm_sqrt_psd: eigenvalue " << vals(k) << " below the clip window -"
          << clip_tol;
      throw NumericError(msg.str());
    }
    vals(k) = vals(k) < 0.0 ? 0.0 : std::sqrt(vals(k));
  }
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const CMatrix& rho, const CMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw InvalidInput("fidelity: shape mismatch");
  const CMatrix sr = herm_sqrt_psd(rho);
  const CMatrix ss = herm_sqrt_psd(sigma);
  const double root = trace_norm(sr * ss);
  return root * root;
}

DensityMatrix::DensityMatrix(CMatrix m, std::vector<Index> d)
    : mat(std::move(m)), dims(std::move(d)) {
  Index prod = 1;
  for (Index di : dims) {
    if (di < 1) throw InvalidInput("DensityMatrix: factor dimension < 1");
    prod *= di;
  }
  if (mat.rows() != mat.cols() || mat.rows() != prod)
    throw InvalidInput("DensityMatrix: matrix size does not match declared factors");
}

void DensityMatrix::validate(double trace_tol, double herm_tol, double psd_tol) const {
  if (!is_finite(mat)) throw InvalidInput("DensityMatrix: non-finite entries");
  if (!is_hermitian(mat, herm_tol))
    throw InvalidInput("DensityMatrix: not Hermitian within tolerance");
  const double tr = mat.trace().real();
  if (std::abs(tr - 1.0) > trace_tol)
    throw InvalidInput("DensityMatrix: trace deviates from 1 beyond tolerance");
  herm_sqrt_psd(mat, psd_tol);  // throws NumericError on real negativity
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  const int m = static_cast<int>(rho.dims.size());
  for (size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] < 0 || keep[i] >= m)
      throw InvalidInput("partial_trace: keep index out of range");
    if (i > 0 && keep[i] <= keep[i - 1])
      throw InvalidInput("partial_trace: keep indices must be strictly increasing");
  }

  std::vector<int> traced;
  for (int f = 0; f < m; ++f)
    if (std::find(keep.begin(), keep.end(), f) == keep.end()) traced.push_back(f);

  // Column-strides of each factor in the flattened index (row-major over
  // factors: factor 0 is the slowest).
  std::vector<Index> stride(m, 1);
  for (int f = m - 2; f >= 0; --f) stride[f] = stride[f + 1] * rho.dims[f + 1];

  Index dim_keep = 1;
  std::vector<Index> keep_dims;
  for (int f : keep) {
    dim_keep *= rho.dims[f];
    keep_dims.push_back(rho.dims[f]);
  }
  Index dim_traced = 1;
  for (int f : traced) dim_traced *= rho.dims[f];

  // Flat offset of each kept multi-index / traced multi-index.
  auto offsets_for = [&](const std::vector<int>& factors, Index count) {
    std::vector<Index> offs(static_cast<size_t>(count), 0);
    Index reps = 1;
    for (int f : factors) {
      const Index d = rho.dims[f];
      const Index block = count / (reps * d);
      Index idx = 0;
      for (Index r = 0; r < reps; ++r)
        for (Index v = 0; v < d; ++v)
          for (Index b = 0; b < block; ++b) offs[idx++] += v * stride[f];
      reps *= d;
    }
    return offs;
  };
  const std::vector<Index> keep_off = offsets_for(keep, dim_keep);
  const std::vector<Index> tr_off = offsets_for(traced, dim_traced);

  CMatrix out = CMatrix::Zero(dim_keep, dim_keep);
  for (Index i = 0; i < dim_keep; ++i)
    for (Index j = 0; j < dim_keep; ++j) {
      Complex acc(0.0, 0.0);
      for (Index c = 0; c < dim_traced; ++c)
        acc += rho.mat(keep_off[i] + tr_off[c], keep_off[j] + tr_off[c]);
      out(i, j) = acc;
    }
  if (keep_dims.empty()) keep_dims.push_back(1);
  return DensityMatrix(std::move(out), std::move(keep_dims));
}

}  // namespace sbscv
