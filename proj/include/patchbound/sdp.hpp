#pragma once

#include "patchbound/linalg.hpp"

#include <random>
#include <string>
#include <vector>

namespace patchbound {

/// minimize c^T x  subject to  F0 + sum_i x_i F_i >= 0  (complex Hermitian n x n).
///
/// Dual: maximize -Tr(F0 Z)  subject to  Tr(F_i Z) = c_i,  Z >= 0.
struct SdpProblem {
  RVector c;
  CMatrix f0;
  std::vector<CMatrix> f;

  int m() const { return static_cast<int>(f.size()); }
  int n() const { return static_cast<int>(f0.rows()); }
};

enum class SdpStatus { Optimal, Infeasible, Unbounded, MaxIter };
std::string to_string(SdpStatus status);

struct SdpOptions {
  double tol = 1e-9;
  int max_iter = 200;
  double infeasibility_tol = 1e-8;
  bool keep_history = true;
};

struct SdpIterate {
  int iter = 0;
  double primal_objective = 0.0;  // c^T x
  double dual_objective = 0.0;    // -Tr(F0 Z)
  double primal_infeasibility = 0.0;  // relative || Z_iter - F(x) ||
  double dual_infeasibility = 0.0;    // relative || Tr(F_i Z) - c_i ||
  double mu = 0.0;
  double step_primal = 0.0;
  double step_dual = 0.0;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::MaxIter;
  RVector x;
  CMatrix z;      // dual matrix
  CMatrix slack;  // F(x) evaluated from x
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;  // primal - dual objective
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  std::vector<SdpIterate> history;
  std::string message;

  double slack_min_eigenvalue() const;
  double dual_min_eigenvalue() const;
};

/// Rejects problems whose matrices are not Hermitian or not n x n.
void validate(const SdpProblem& problem);

/// Primal-dual interior point with Nesterov-Todd scaling and Mehrotra
/// predictor-corrector steps; infeasible start.
SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options = {});

/// Hermitian n x n <-> n^2 reals preserving Re Tr(A B).
RVector svec(const CMatrix& h);
CMatrix smat(const RVector& v, Index n);

/// Strictly primal and dual feasible instance: F0 = Z0 - sum x0_i F_i and
/// c_i = Tr(F_i X0) with Z0, X0 positive definite, so the optimum is attained.
SdpProblem random_feasible_sdp(int n, int m, std::mt19937_64& rng);

/// Debug dump; doubles are written with round-trip precision.
std::string sdp_to_json(const SdpProblem& problem);
SdpProblem sdp_from_json(const std::string& text);

}  // namespace patchbound
