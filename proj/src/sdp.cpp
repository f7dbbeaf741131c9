#include "patchbound/sdp.hpp"

#include "patchbound/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace patchbound {

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::Unbounded: return "unbounded";
    case SdpStatus::MaxIter: return "max_iter";
  }
  return "unknown";
}

double SdpSolution::slack_min_eigenvalue() const {
  return slack.size() ? hermitian_eigen(slack, 1e-8).values(0) : 0.0;
}

double SdpSolution::dual_min_eigenvalue() const {
  return z.size() ? hermitian_eigen(z, 1e-8).values(0) : 0.0;
}

RVector svec(const CMatrix& h) {
  const Index n = h.rows();
  RVector v(n * n);
  Index k = 0;
  const double r2 = std::sqrt(2.0);
  for (Index j = 0; j < n; ++j) {
    v(k++) = h(j, j).real();
    for (Index i = 0; i < j; ++i) {
      v(k++) = r2 * h(i, j).real();
      v(k++) = r2 * h(i, j).imag();
    }
  }
  return v;
}

CMatrix smat(const RVector& v, Index n) {
  CMatrix h(n, n);
  Index k = 0;
  const double r2 = 1.0 / std::sqrt(2.0);
  for (Index j = 0; j < n; ++j) {
    h(j, j) = v(k++);
    for (Index i = 0; i < j; ++i) {
      const cplx z(r2 * v(k), r2 * v(k + 1));
      k += 2;
      h(i, j) = z;
      h(j, i) = std::conj(z);
    }
  }
  return h;
}

void validate(const SdpProblem& p) {
  const Index n = p.f0.rows();
  if (n == 0 || p.f0.cols() != n) throw std::invalid_argument("sdp: F0 must be square and non-empty");
  if (p.c.size() != static_cast<Index>(p.f.size()))
    throw std::invalid_argument("sdp: cost vector length differs from the number of matrices");
  if (!is_hermitian(p.f0, 1e-12)) throw std::invalid_argument("sdp: F0 is not Hermitian");
  for (std::size_t i = 0; i < p.f.size(); ++i) {
    if (p.f[i].rows() != n || p.f[i].cols() != n) {
      std::ostringstream os;
      os << "sdp: F" << i + 1 << " is not " << n << "x" << n;
      throw std::invalid_argument(os.str());
    }
    if (!is_hermitian(p.f[i], 1e-12)) {
      std::ostringstream os;
      os << "sdp: F" << i + 1 << " is not Hermitian";
      throw std::invalid_argument(os.str());
    }
  }
}

namespace {

constexpr double kPolishFactor = 1e-6;

// Largest step t in (0, inf] keeping D + t * Delta positive semidefinite.
double max_step(const RVector& d, const CMatrix& delta) {
  const RVector s = d.cwiseSqrt().cwiseInverse();
  const CMatrix scaled = s.cast<cplx>().asDiagonal() * delta * s.cast<cplx>().asDiagonal();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian_part(scaled), Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  return lo < 0 ? -1.0 / lo : std::numeric_limits<double>::infinity();
}

bool cholesky(const CMatrix& m, CMatrix& l) {
  Eigen::LLT<CMatrix> llt(m);
  if (llt.info() != Eigen::Success) return false;
  l = llt.matrixL();
  return true;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& opts) {
  validate(problem);
  const Index n = problem.n();
  const Index m = problem.m();
  const Index nn = n * n;

  // Internal standard form: min <C,X> s.t. <A_i,X> = b_i, X >= 0, with the
  // dual max b^T y s.t. sum y_i A_i + Z = C. Here C = F0, A_i = -F_i, b = -c,
  // so y is the user's x, Z the LMI slack and X the user's dual matrix.
  const CMatrix& cm = problem.f0;
  const RVector b = -problem.c;
  RMatrix a(m, nn);  // svec(A_i) in rows
  for (Index i = 0; i < m; ++i) a.row(i) = -svec(problem.f[i]).transpose();
  const RVector c_vec = svec(cm);
  const double norm_b = b.norm();
  const double norm_c = c_vec.norm();

  double max_a = 0.0, ratio = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double ni = a.row(i).norm();
    max_a = std::max(max_a, ni);
    ratio = std::max(ratio, (1.0 + std::abs(b(i))) / (1.0 + ni));
  }
  const double rn = std::sqrt(static_cast<double>(n));
  const double xi = std::max({10.0, rn, static_cast<double>(n) * ratio});
  const double eta = std::max({10.0, rn, max_a, norm_c});
  CMatrix x = xi * CMatrix::Identity(n, n);
  CMatrix z = eta * CMatrix::Identity(n, n);
  RVector y = RVector::Zero(m);

  SdpSolution sol;
  sol.status = SdpStatus::MaxIter;
  std::optional<SdpSolution> best;
  double best_mu = 0.0;
  int stalled = 0;

  auto apply_a = [&](const CMatrix& mat) { return RVector(a * svec(mat)); };
  auto apply_at = [&](const RVector& v) { return smat(a.transpose() * v, n); };

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    const RVector rp = b - apply_a(x);
    const CMatrix rd = cm - z - apply_at(y);
    const double pobj_int = svec(x).dot(c_vec);  // <C, X>
    const double dobj_int = b.dot(y);
    const double pinf = rp.norm() / (1.0 + norm_b);
    const double dinf = svec(rd).norm() / (1.0 + norm_c);
    const double gap = pobj_int - dobj_int;
    const double mu = svec(x).dot(svec(z)) / n;

    SdpIterate rec;
    rec.iter = iter;
    rec.primal_objective = -dobj_int;
    rec.dual_objective = -pobj_int;
    rec.primal_infeasibility = dinf;
    rec.dual_infeasibility = pinf;
    rec.mu = mu;

    sol.iterations = iter;
    sol.x = y;
    sol.z = x;
    sol.primal_objective = -dobj_int;
    sol.dual_objective = -pobj_int;
    sol.gap = gap;
    sol.primal_infeasibility = dinf;
    sol.dual_infeasibility = pinf;

    // Once within tolerance keep iterating while complementarity still
    // shrinks; the optimizer x converges more slowly than the objective.
    const double scale = 1.0 + std::abs(pobj_int) + std::abs(dobj_int);
    const bool meets = pinf <= opts.tol && dinf <= opts.tol && std::abs(gap) <= opts.tol * scale;
    if (best && (!meets || mu >= best_mu)) {
      if (opts.keep_history) sol.history.push_back(rec);
      break;
    }
    if (meets) {
      if (opts.keep_history) sol.history.push_back(rec);
      sol.status = SdpStatus::Optimal;
      best = sol;
      best_mu = mu;
      if (n * mu <= kPolishFactor * opts.tol * scale || iter == opts.max_iter) break;
      if (opts.keep_history) sol.history.pop_back();
    }
    // Farkas-type certificates along diverging iterates.
    if (dobj_int > 0) {
      const double r = (cm - rd).norm() / dobj_int;  // || sum y A + Z || / b^T y
      if (r <= opts.infeasibility_tol) {
        sol.status = SdpStatus::Unbounded;
        sol.message = "LMI admits a recession direction with negative cost";
        if (opts.keep_history) sol.history.push_back(rec);
        break;
      }
    }
    if (pobj_int < 0) {
      const double r = (apply_a(x)).norm() / -pobj_int;
      if (r <= opts.infeasibility_tol) {
        sol.status = SdpStatus::Infeasible;
        sol.message = "no x makes the LMI positive semidefinite";
        if (opts.keep_history) sol.history.push_back(rec);
        break;
      }
    }
    if (iter == opts.max_iter) {
      if (opts.keep_history) sol.history.push_back(rec);
      sol.message = "iteration limit reached";
      break;
    }

    // Nesterov-Todd scaling point: G^dag Z G = G^-1 X G^-dag = diag(dv).
    CMatrix lx, lz;
    if (!cholesky(x, lx) || !cholesky(z, lz)) {
      sol.message = "iterate lost positive definiteness";
      if (opts.keep_history) sol.history.push_back(rec);
      break;
    }
    Eigen::BDCSVD<CMatrix> sv(lz.adjoint() * lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVector dv = sv.singularValues();
    if (dv.minCoeff() <= 0.0) {
      sol.message = "scaling matrix became singular";
      if (opts.keep_history) sol.history.push_back(rec);
      break;
    }
    const CMatrix g = lx * sv.matrixV() * dv.cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal();
    const CMatrix gh = g.adjoint();

    RMatrix at(m, nn);
    for (Index i = 0; i < m; ++i) at.row(i) = svec(gh * (-problem.f[i]) * g).transpose();
    RMatrix schur = RMatrix::Zero(m, m);
    schur.selfadjointView<Eigen::Lower>().rankUpdate(at);
    schur.triangularView<Eigen::StrictlyUpper>() = schur.transpose();

    Eigen::LLT<RMatrix> llt(schur);
    Eigen::LDLT<RMatrix> ldlt;
    const bool use_llt = llt.info() == Eigen::Success;
    if (!use_llt) {
      const double shift = 1e-14 * std::max(1.0, schur.diagonal().maxCoeff());
      ldlt.compute(schur + shift * RMatrix::Identity(m, m));
    }
    auto solve_schur = [&](const RVector& rhs) -> RVector { return use_llt ? RVector(llt.solve(rhs)) : RVector(ldlt.solve(rhs)); };

    const CMatrix rd_t = gh * rd * g;
    const RVector rd_t_vec = svec(rd_t);
    struct Direction {
      RVector dy;
      CMatrix dx, dz;
    };
    auto solve_direction = [&](const CMatrix& r) {
      Direction dir;
      const RVector rhs_y = rp - at * (svec(r) - rd_t_vec);
      dir.dy = solve_schur(rhs_y);
      for (int k = 0; k < 2; ++k) dir.dy += solve_schur(rhs_y - at * (at.transpose() * dir.dy));
      dir.dz = smat(rd_t_vec - at.transpose() * dir.dy, n);
      dir.dx = r - dir.dz;
      return dir;
    };

    const CMatrix dmat = dv.cast<cplx>().asDiagonal();
    const Direction pred = solve_direction(-dmat);
    const double ap = std::min(1.0, max_step(dv, pred.dx));
    const double bp = std::min(1.0, max_step(dv, pred.dz));
    const CMatrix xa = dmat + ap * pred.dx;
    const CMatrix za = dmat + bp * pred.dz;
    const double mu_aff = (xa * za).trace().real() / n;
    const double expon = std::max(1.0, 3.0 * std::pow(std::min(ap, bp), 2));
    const double sigma = std::min(1.0, std::pow(std::max(0.0, mu_aff) / mu, expon));

    CMatrix rhs = 2.0 * sigma * mu * CMatrix::Identity(n, n) - 2.0 * dmat * dmat -
                  (pred.dx * pred.dz + pred.dz * pred.dx);
    CMatrix rc(n, n);
    for (Index k = 0; k < n; ++k)
      for (Index l = 0; l < n; ++l) rc(k, l) = rhs(k, l) / (dv(k) + dv(l));
    const Direction corr = solve_direction(rc);

    const double a_max = max_step(dv, corr.dx);
    const double b_max = max_step(dv, corr.dz);
    const double gamma = 0.9 + 0.09 * std::min(ap, bp);
    const double alpha = std::min(1.0, gamma * a_max);
    const double beta = std::min(1.0, gamma * b_max);
    rec.step_primal = beta;
    rec.step_dual = alpha;
    if (opts.keep_history) sol.history.push_back(rec);

    // Remove the drift off A(X) = b with a least-norm step in the scaled
    // metric, kept only if the scaled iterate stays positive definite.
    CMatrix x_scaled = dmat + alpha * corr.dx;
    const RVector drift = rp - alpha * (at * svec(corr.dx));
    const CMatrix fixed = hermitian_part(x_scaled + smat(at.transpose() * solve_schur(drift), n));
    if (Eigen::LLT<CMatrix>(fixed).info() == Eigen::Success) x_scaled = fixed;
    x = hermitian_part(g * x_scaled * gh);
    y += beta * corr.dy;
    z = hermitian_part(z + beta * (rd - apply_at(corr.dy)));

    stalled = (alpha < 1e-8 && beta < 1e-8) ? stalled + 1 : 0;
    if (stalled >= 5) {
      sol.message = "step lengths collapsed";
      sol.iterations = iter + 1;
      break;
    }
  }

  if (best) {
    std::vector<SdpIterate> history = std::move(sol.history);
    sol = std::move(*best);
    sol.history = std::move(history);

    // Late iterates drift off A(X) = b through the ill-conditioned Schur
    // system; a least-norm correction restores it at a perturbation far
    // below the tolerance.
    RMatrix gram_matrix = RMatrix::Zero(m, m);
    gram_matrix.selfadjointView<Eigen::Lower>().rankUpdate(a);
    const Eigen::LDLT<RMatrix> gram(gram_matrix.selfadjointView<Eigen::Lower>());
    const RVector rp = b - apply_a(sol.z);
    const CMatrix fixed = hermitian_part(sol.z + apply_at(gram.solve(rp)));
    const RVector rp_fixed = b - apply_a(fixed);
    if (gram.info() == Eigen::Success && rp_fixed.norm() < rp.norm()) {
      sol.z = fixed;
      const double pobj_int = svec(fixed).dot(c_vec);
      sol.dual_objective = -pobj_int;
      sol.gap = pobj_int - b.dot(sol.x);
      sol.dual_infeasibility = rp_fixed.norm() / (1.0 + norm_b);
    }
  }
  sol.slack = problem.f0;
  for (Index i = 0; i < m; ++i) sol.slack += sol.x(i) * problem.f[i];
  sol.slack = hermitian_part(sol.slack);
  sol.primal_objective = problem.c.dot(sol.x);
  return sol;
}

SdpProblem random_feasible_sdp(int n, int m, std::mt19937_64& rng) {
  if (n < 1 || m < 0) throw std::invalid_argument("random_feasible_sdp: bad size");
  auto hermitian = [&]() {
    const CMatrix g = random_complex_matrix(n, n, rng);
    return CMatrix((g + g.adjoint()) / std::sqrt(2.0 * n));
  };
  auto positive = [&]() {
    const CMatrix g = random_complex_matrix(n, n, rng);
    return CMatrix(g * g.adjoint() / n + 0.1 * CMatrix::Identity(n, n));
  };
  SdpProblem p;
  p.c.resize(m);
  const CMatrix x0 = positive();
  p.f0 = positive();
  std::normal_distribution<double> normal;
  for (int i = 0; i < m; ++i) {
    p.f.push_back(hermitian());
    p.f0 -= normal(rng) * p.f.back();
    p.c(i) = (p.f.back() * x0).trace().real();
  }
  p.f0 = hermitian_part(p.f0);
  return p;
}

// ---------------------------------------------------------------------------

using nlohmann::json;

std::string sdp_to_json(const SdpProblem& p) {
  json j;
  j["format"] = "patchbound-sdp-1";
  j["m"] = p.m();
  j["n"] = p.n();
  j["c"] = std::vector<double>(p.c.data(), p.c.data() + p.c.size());
  j["F0"] = matrix_to_json(p.f0);
  json fs = json::array();
  for (const auto& f : p.f) fs.push_back(matrix_to_json(f));
  j["F"] = fs;
  return j.dump();
}

SdpProblem sdp_from_json(const std::string& text) {
  const json j = json::parse(text);
  SdpProblem p;
  const auto c = j.at("c").get<std::vector<double>>();
  p.c = Eigen::Map<const RVector>(c.data(), static_cast<Index>(c.size()));
  p.f0 = matrix_from_json(j.at("F0"));
  for (const auto& f : j.at("F")) p.f.push_back(matrix_from_json(f));
  validate(p);
  return p;
}

}  // namespace patchbound
