#pragma once

// Dense complex kernels shared by every module.
//
// Storage convention: product-space vectors are indexed with site 0 as the
// most significant digit, i.e. index = sum_k s_k * d^(n-1-k). Serialized
// matrices are always written row-major.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace patchbound {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

struct HermitianEigen {
  RVector values;   // ascending
  CMatrix vectors;  // columns are orthonormal eigenvectors
};

struct SvdResult {
  CMatrix u;   // m x k isometry
  RVector s;   // descending, k = min(m, n)
  CMatrix vh;  // k x n co-isometry
};

/// max|M - M^dag| divided by max|M| (0 for the zero matrix).
double hermiticity_defect(const CMatrix& m);
bool is_hermitian(const CMatrix& m, double rel_tol = 1e-12);

/// Eigen-decomposition of a Hermitian matrix. Throws std::invalid_argument
/// when the relative hermiticity defect exceeds `rel_tol`.
HermitianEigen hermitian_eigen(const CMatrix& m, double rel_tol = 1e-12);

/// Thin SVD, M = U diag(s) V^dag.
SvdResult svd(const CMatrix& m);

double spectral_norm(const CMatrix& m);
CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix hermitian_part(const CMatrix& m);

std::int64_t ipow(std::int64_t base, int exp);

/// Applies an operator acting on `span` consecutive sites starting at
/// `first_site` to every column of `states` (each column a vector on
/// `n_sites` sites of local dimension `d`).
CMatrix apply_local(const CMatrix& states, const CMatrix& op, int first_site,
                    int span, int d, int n_sites);
CVector apply_local(const CVector& state, const CMatrix& op, int first_site,
                    int span, int d, int n_sites);

/// Complex Gaussian with E|z|^2 = 1.
cplx complex_normal(std::mt19937_64& rng);
CMatrix random_complex_matrix(Index rows, Index cols, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Krylov eigensolver for matrix-free Hermitian operators.

using LinearOperator = std::function<void(const CVector& in, CVector& out)>;

struct LanczosOptions {
  int krylov_dim = 60;
  int max_restarts = 200;
  double tol = 1e-10;  // absolute residual tolerance ||Hv - ev||
};

struct EigenPair {
  double value = 0.0;
  CVector vector;
  double residual = 0.0;
  bool converged = false;
};

/// Lowest eigenpair of `op` restricted to the orthogonal complement of
/// `deflate` (which must hold orthonormal vectors).
EigenPair lanczos_lowest(const LinearOperator& op, const CVector& start,
                         const std::vector<CVector>& deflate = {},
                         const LanczosOptions& opts = {});

/// The `k` lowest eigenpairs, found one at a time with deflation.
std::vector<EigenPair> lanczos_lowest_k(const LinearOperator& op, Index dim,
                                        int k, std::uint64_t seed,
                                        const LanczosOptions& opts = {});

}  // namespace patchbound
