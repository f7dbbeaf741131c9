#include "patchbound/sdp.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace patchbound;

namespace {

// minimize t subject to t I - M >= 0
SdpProblem lambda_max_problem(const CMatrix& m) {
  SdpProblem p;
  p.c = RVector::Ones(1);
  p.f0 = -m;
  p.f.push_back(CMatrix::Identity(m.rows(), m.cols()));
  return p;
}

}  // namespace

TEST(Svec, PreservesInnerProduct) {
  std::mt19937_64 rng(5);
  for (int n : {1, 2, 5}) {
    const CMatrix a = hermitian_part(random_complex_matrix(n, n, rng));
    const CMatrix b = hermitian_part(random_complex_matrix(n, n, rng));
    EXPECT_NEAR(svec(a).dot(svec(b)), (a * b).trace().real(), 1e-12);
    EXPECT_LE((smat(svec(a), n) - a).norm(), 1e-14);
  }
}

TEST(Solve, LambdaMaxOfDiagonal) {
  CMatrix m = CMatrix::Zero(3, 3);
  m.diagonal() << 1.0, 2.0, 3.0;
  const auto sol = solve_sdp(lambda_max_problem(m));
  ASSERT_EQ(sol.status, SdpStatus::Optimal) << sol.message;
  EXPECT_NEAR(sol.x(0), 3.0, 1e-8);
  EXPECT_NEAR(sol.z.trace().real(), 1.0, 1e-8);
  EXPECT_NEAR(std::abs(sol.z(2, 2)), 1.0, 1e-6);
}

TEST(Solve, LambdaMaxOfRandomHermitian) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 3; ++rep) {
    const CMatrix m = hermitian_part(random_complex_matrix(36, 36, rng));
    const double direct = hermitian_eigen(m).values(35);
    const auto sol = solve_sdp(lambda_max_problem(m));
    ASSERT_EQ(sol.status, SdpStatus::Optimal);
    EXPECT_NEAR(sol.x(0), direct, 1e-8);
    EXPECT_NEAR(sol.dual_objective, direct, 1e-8);
  }
}

TEST(Solve, WeakDualityOnFeasibleIterates) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 5; ++rep) {
    const auto p = random_feasible_sdp(8, 20, rng);
    const auto sol = solve_sdp(p);
    ASSERT_EQ(sol.status, SdpStatus::Optimal);
    int feasible = 0;
    for (const auto& it : sol.history) {
      if (it.primal_infeasibility > 1e-9 || it.dual_infeasibility > 1e-9) continue;
      ++feasible;
      // residuals of 1e-9 perturb the objectives by residual times |x| or |Z|
      const double scale = std::max(1.0, std::abs(it.primal_objective));
      EXPECT_LE(it.dual_objective - it.primal_objective, 1e-8 * scale) << "iteration " << it.iter;
    }
    EXPECT_GE(feasible, 1);
    EXPECT_LE(sol.dual_objective, sol.primal_objective + 1e-8);
  }
}

TEST(Solve, RandomFeasibleInstances) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 19);
    const int m = 1 + static_cast<int>(rng() % std::min(200, n * n - 1));
    const auto p = random_feasible_sdp(n, m, rng);
    const auto sol = solve_sdp(p);
    ASSERT_EQ(sol.status, SdpStatus::Optimal) << "n=" << n << " m=" << m << " " << sol.message;
    EXPECT_LE(std::abs(sol.gap), 1e-8);
    EXPECT_GE(sol.slack_min_eigenvalue(), -1e-9);
    EXPECT_GE(sol.dual_min_eigenvalue(), -1e-9);
    for (int i = 0; i < m; ++i) EXPECT_NEAR((p.f[i] * sol.z).trace().real(), p.c(i), 1e-7);
  }
}

TEST(Solve, ScalingLeavesOptimizerUnchanged) {
  std::mt19937_64 rng(29);
  const auto p = random_feasible_sdp(10, 30, rng);
  const auto base = solve_sdp(p);
  ASSERT_EQ(base.status, SdpStatus::Optimal);
  for (double s : {0.01, 7.0, 250.0}) {
    SdpProblem q = p;
    q.f0 *= s;
    for (auto& f : q.f) f *= s;
    const auto sol = solve_sdp(q);
    ASSERT_EQ(sol.status, SdpStatus::Optimal);
    EXPECT_LE((sol.x - base.x).lpNorm<Eigen::Infinity>(), 1e-7) << "s=" << s;
  }
}

TEST(Solve, DetectsInfeasibleLmi) {
  // -1 - x >= 0 and x - 1 >= 0 cannot both hold
  SdpProblem p;
  p.c = RVector::Zero(1);
  p.f0 = CMatrix::Zero(2, 2);
  p.f0.diagonal() << -1.0, -1.0;
  CMatrix f = CMatrix::Zero(2, 2);
  f.diagonal() << -1.0, 1.0;
  p.f.push_back(f);
  const auto sol = solve_sdp(p);
  EXPECT_EQ(sol.status, SdpStatus::Infeasible) << sol.message;
}

TEST(Solve, DetectsUnboundedObjective) {
  // minimize x subject to 1 - x >= 0
  SdpProblem p;
  p.c = RVector::Ones(1);
  p.f0 = CMatrix::Identity(1, 1);
  p.f.push_back(-CMatrix::Identity(1, 1));
  const auto sol = solve_sdp(p);
  EXPECT_EQ(sol.status, SdpStatus::Unbounded) << sol.message;
}

TEST(Solve, IterationLimitReturnsDiagnostics) {
  std::mt19937_64 rng(31);
  const auto p = random_feasible_sdp(6, 10, rng);
  SdpOptions opts;
  opts.max_iter = 2;
  const auto sol = solve_sdp(p, opts);
  EXPECT_EQ(sol.status, SdpStatus::MaxIter);
  EXPECT_EQ(sol.x.size(), 10);
  EXPECT_FALSE(sol.history.empty());
  EXPECT_FALSE(sol.message.empty());
}

TEST(Validate, RejectsMalformedProblems) {
  SdpProblem p;
  p.c = RVector::Ones(1);
  p.f0 = CMatrix::Identity(2, 2);
  p.f.push_back(CMatrix::Identity(3, 3));
  EXPECT_THROW(validate(p), std::invalid_argument);
  p.f[0] = CMatrix::Zero(2, 2);
  p.f[0](0, 1) = 1.0;
  EXPECT_THROW(validate(p), std::invalid_argument);
  p.f[0](1, 0) = 1.0;
  p.c = RVector::Ones(2);
  EXPECT_THROW(validate(p), std::invalid_argument);
}

TEST(Json, RoundTripIsExact) {
  std::mt19937_64 rng(37);
  const auto p = random_feasible_sdp(5, 7, rng);
  const auto q = sdp_from_json(sdp_to_json(p));
  ASSERT_EQ(q.m(), p.m());
  EXPECT_EQ(q.c, p.c);
  EXPECT_EQ(q.f0, p.f0);
  for (int i = 0; i < p.m(); ++i) EXPECT_EQ(q.f[i], p.f[i]);
}
