#include "patchbound/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace patchbound {

double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

bool is_hermitian(const CMatrix& m, double rel_tol) {
  return hermiticity_defect(m) <= rel_tol;
}

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

HermitianEigen hermitian_eigen(const CMatrix& m, double rel_tol) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "hermitian_eigen: matrix is " << m.rows() << "x" << m.cols();
    throw std::invalid_argument(os.str());
  }
  const double defect = hermiticity_defect(m);
  if (defect > rel_tol) {
    std::ostringstream os;
    os << "hermitian_eigen: relative hermiticity defect " << defect
       << " exceeds tolerance " << rel_tol;
    throw std::invalid_argument(os.str());
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eigen: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SvdResult svd(const CMatrix& m) {
  if (m.size() == 0) return {CMatrix(m.rows(), 0), RVector(0), CMatrix(0, m.cols())};
  Eigen::BDCSVD<CMatrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("svd: decomposition failed");
  return {solver.matrixU(), solver.singularValues(), solver.matrixV().adjoint()};
}

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == m.cols() && is_hermitian(m, 1e-12)) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m),
                                                  Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<CMatrix> solver(m);
  return solver.singularValues()(0);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

CMatrix apply_local(const CMatrix& states, const CMatrix& op, int first_site,
                    int span, int d, int n_sites) {
  if (first_site < 0 || span < 1 || first_site + span > n_sites)
    throw std::invalid_argument("apply_local: support outside the chain");
  const Index left = ipow(d, first_site);
  const Index mid = ipow(d, span);
  const Index right = ipow(d, n_sites - first_site - span);
  if (states.rows() != left * mid * right || op.rows() != mid || op.cols() != mid)
    throw std::invalid_argument("apply_local: dimension mismatch");

  using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  CMatrix out(states.rows(), states.cols());
  RowMat block(mid, right);
  for (Index col = 0; col < states.cols(); ++col) {
    const cplx* in = states.col(col).data();
    cplx* res = out.col(col).data();
    for (Index l = 0; l < left; ++l) {
      Eigen::Map<const RowMat> src(in + l * mid * right, mid, right);
      Eigen::Map<RowMat> dst(res + l * mid * right, mid, right);
      block.noalias() = op * src;
      dst = block;
    }
  }
  return out;
}

CVector apply_local(const CVector& state, const CMatrix& op, int first_site,
                    int span, int d, int n_sites) {
  CMatrix cols = state;
  return apply_local(cols, op, first_site, span, d, n_sites).col(0);
}

cplx complex_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(0.5));
  const double re = dist(rng);
  const double im = dist(rng);
  return {re, im};
}

CMatrix random_complex_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  CMatrix m(rows, cols);
  // Fill in row-major order so the stream-to-entry map matches the
  // serialized layout.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = complex_normal(rng);
  return m;
}

namespace {

void project_out(CVector& w, const std::vector<CVector>& vecs) {
  for (const auto& v : vecs) w -= v * v.dot(w);
}

}  // namespace

EigenPair lanczos_lowest(const LinearOperator& op, const CVector& start,
                         const std::vector<CVector>& deflate,
                         const LanczosOptions& opts) {
  const Index dim = start.size();
  CVector v = start;
  project_out(v, deflate);
  project_out(v, deflate);
  if (v.norm() == 0.0) throw std::invalid_argument("lanczos: start vector vanishes");
  v.normalize();

  const Index available = dim - static_cast<Index>(deflate.size());
  const int kdim = static_cast<int>(std::max<Index>(1, std::min<Index>(opts.krylov_dim, available)));

  EigenPair best;
  best.vector = v;
  CVector w(dim), hx(dim);
  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    std::vector<CVector> basis;
    basis.reserve(kdim);
    basis.push_back(v);
    std::vector<double> alpha, beta;
    for (int j = 0; j < kdim; ++j) {
      op(basis[j], w);
      project_out(w, deflate);
      const double a = basis[j].dot(w).real();
      alpha.push_back(a);
      // two passes of full reorthogonalization
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) w -= b * b.dot(w);
        project_out(w, deflate);
      }
      const double b = w.norm();
      if (j + 1 == kdim || b < 1e-13 * std::max(1.0, std::abs(a))) break;
      beta.push_back(b);
      basis.push_back(w / b);
    }
    const int k = static_cast<int>(alpha.size());
    RMatrix t = RMatrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> tri(t);
    const RVector coeff = tri.eigenvectors().col(0);
    CVector x = CVector::Zero(dim);
    for (int i = 0; i < k; ++i) x += coeff(i) * basis[i];
    project_out(x, deflate);
    x.normalize();
    op(x, hx);
    project_out(hx, deflate);
    const double theta = x.dot(hx).real();
    const double res = (hx - theta * x).norm();
    best.value = theta;
    best.vector = x;
    best.residual = res;
    if (res <= opts.tol) {
      best.converged = true;
      return best;
    }
    v = x;
  }
  return best;
}

std::vector<EigenPair> lanczos_lowest_k(const LinearOperator& op, Index dim,
                                        int k, std::uint64_t seed,
                                        const LanczosOptions& opts) {
  std::mt19937_64 rng(seed);
  std::vector<EigenPair> pairs;
  std::vector<CVector> found;
  for (int i = 0; i < k; ++i) {
    CVector start(dim);
    for (Index j = 0; j < dim; ++j) start(j) = complex_normal(rng);
    auto pair = lanczos_lowest(op, start, found, opts);
    found.push_back(pair.vector);
    pairs.push_back(std::move(pair));
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
  return pairs;
}

}  // namespace patchbound
