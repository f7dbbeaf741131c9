#include "patchbound/linalg.hpp"

#include <gtest/gtest.h>

using namespace patchbound;

namespace {

CMatrix random_hermitian(Index n, std::mt19937_64& rng) {
  const CMatrix g = random_complex_matrix(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

}  // namespace

TEST(HermitianEigen, DiagonalSortsAscending) {
  CMatrix m = CMatrix::Zero(3, 3);
  m(0, 0) = 3;
  m(1, 1) = 1;
  m(2, 2) = 2;
  const auto eig = hermitian_eigen(m);
  EXPECT_NEAR(eig.values(0), 1.0, 1e-14);
  EXPECT_NEAR(eig.values(1), 2.0, 1e-14);
  EXPECT_NEAR(eig.values(2), 3.0, 1e-14);
}

TEST(HermitianEigen, Identity) {
  const auto eig = hermitian_eigen(CMatrix::Identity(4, 4));
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(eig.values(i), 1.0, 1e-14);
}

TEST(HermitianEigen, RejectsNonHermitian) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(hermitian_eigen(m), std::invalid_argument);
  EXPECT_THROW(hermitian_eigen(CMatrix::Zero(2, 3)), std::invalid_argument);
}

TEST(HermitianEigen, Reconstruction20) {
  std::mt19937_64 rng(7);
  const CMatrix m = random_hermitian(20, rng);
  const auto eig = hermitian_eigen(m);
  const CMatrix back = eig.vectors * eig.values.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
  EXPECT_LE((back - m).norm(), 1e-10 * spectral_norm(m));
  EXPECT_LE((eig.vectors.adjoint() * eig.vectors - CMatrix::Identity(20, 20)).norm(), 1e-12);
}

TEST(Svd, DiagonalAndRankOne) {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 1;
  const auto s = svd(d);
  EXPECT_NEAR(s.s(0), 2.0, 1e-14);
  EXPECT_NEAR(s.s(1), 1.0, 1e-14);

  std::mt19937_64 rng(3);
  const CMatrix u = random_complex_matrix(6, 1, rng);
  const CMatrix v = random_complex_matrix(5, 1, rng);
  const auto r = svd(u * v.adjoint());
  int above = 0;
  for (Index i = 0; i < r.s.size(); ++i) above += r.s(i) > 1e-12 ? 1 : 0;
  EXPECT_EQ(above, 1);
}

TEST(Svd, Reconstruction30x12) {
  std::mt19937_64 rng(11);
  const CMatrix m = random_complex_matrix(30, 12, rng);
  const auto r = svd(m);
  const CMatrix back = r.u * r.s.cast<cplx>().asDiagonal() * r.vh;
  EXPECT_LE((back - m).norm(), 1e-10 * spectral_norm(m));
  EXPECT_LE((r.u.adjoint() * r.u - CMatrix::Identity(12, 12)).norm(), 1e-12);
  EXPECT_LE((r.vh * r.vh.adjoint() - CMatrix::Identity(12, 12)).norm(), 1e-12);
}

TEST(Property, ThousandRandomReconstructions) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 64);
  double worst_eig = 0.0, worst_svd = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = size(rng);
    const CMatrix h = random_hermitian(n, rng);
    const auto eig = hermitian_eigen(h);
    const CMatrix back = eig.vectors * eig.values.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
    worst_eig = std::max(worst_eig, (back - h).norm() / spectral_norm(h));

    const Index rows = size(rng);
    const CMatrix g = random_complex_matrix(rows, n, rng);
    const auto r = svd(g);
    const CMatrix gb = r.u * r.s.cast<cplx>().asDiagonal() * r.vh;
    worst_svd = std::max(worst_svd, (gb - g).norm() / spectral_norm(g));
  }
  EXPECT_LE(worst_eig, 1e-10);
  EXPECT_LE(worst_svd, 1e-10);
}

TEST(ApplyLocal, MatchesKronEmbedding) {
  std::mt19937_64 rng(5);
  const int d = 3, n = 4;
  const CMatrix op = random_complex_matrix(9, 9, rng);
  const CVector v = random_complex_matrix(81, 1, rng);
  const CMatrix full = kron(kron(CMatrix::Identity(3, 3), op), CMatrix::Identity(3, 3));
  EXPECT_LE((apply_local(v, op, 1, 2, d, n) - full * v).norm(), 1e-12);
}

TEST(Lanczos, LowestEigenpairsMatchDense) {
  std::mt19937_64 rng(9);
  const CMatrix h = random_hermitian(120, rng);
  const auto eig = hermitian_eigen(h);
  LinearOperator op = [&](const CVector& in, CVector& out) { out = h * in; };
  LanczosOptions opts;
  opts.tol = 1e-10;
  const auto pairs = lanczos_lowest_k(op, 120, 3, 1, opts);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(pairs[i].value, eig.values(i), 1e-9);
    EXPECT_TRUE(pairs[i].converged);
  }
}
