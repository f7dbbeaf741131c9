#include "patchbound/bounds.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace patchbound {

std::string to_string(BoundMethod method) { return method == BoundMethod::Basic ? "basic" : "cgo"; }

BoundResult basic_bounds(const CMatrix& b_projected) {
  if (b_projected.rows() == 0) throw std::invalid_argument("basic_bounds: empty subspace");
  const auto eig = hermitian_eigen(b_projected, 1e-10);
  BoundResult r;
  r.q = static_cast<int>(b_projected.rows());
  r.k_min = eig.values(0);
  r.k_max = eig.values(eig.values.size() - 1);
  return r;
}

BoundResult basic_bounds(const PatchSubspace& sub, const ObservableSpec& observable) {
  BoundResult r = basic_bounds(project_local(sub, observable.matrix, observable.first_site, 2));
  r.l = observable.first_site - sub.window.first;
  return r;
}

ExponentialFit fit_exponential_decay(const std::vector<double>& x, const std::vector<double>& y,
                                     double floor) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
    if (y[i] >= floor && std::isfinite(y[i])) {
      xs.push_back(x[i]);
      ys.push_back(std::log(y[i]));
    }
  ExponentialFit fit;
  fit.points_used = static_cast<int>(xs.size());
  if (xs.size() < 2) return fit;
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) return fit;
  fit.rate = -sxy / sxx;
  fit.length = fit.rate > 0 ? 1.0 / fit.rate : std::numeric_limits<double>::infinity();
  fit.ok = fit.rate > 0;
  return fit;
}

DecayProfile eigen_decay_profile(const MpsState& mps, const ObservableSpec& observable,
                                 const std::vector<int>& radii, int keep) {
  if (radii.size() < 3) throw std::invalid_argument("eigen_decay_profile: need at least 3 radii to fit");
  DecayProfile profile;
  profile.oracle = expectation(mps, observable);
  std::vector<double> xs, ys;
  for (int l : radii) {
    PatchOptions opts;
    opts.keep = keep;
    const auto sub = extract_patch_basis(mps, ball_window(observable.first_site, l), opts);
    const RVector b = hermitian_eigen(project_local(sub, observable.matrix, observable.first_site, 2), 1e-10).values;
    DecayPoint p;
    p.l = l;
    p.q = sub.q;
    p.deviation = (b.array() - profile.oracle).abs().maxCoeff();
    p.lambda2_min = hermitian_eigen(projected_density(sub), 1e-10).values.minCoeff();
    profile.points.push_back(p);
    xs.push_back(l);
    ys.push_back(p.deviation);
  }
  profile.fit = fit_exponential_decay(xs, ys);
  return profile;
}

AgspResult agsp_residual(const CVector& state, int n_sites, const PatchSubspace& sub,
                         const ObservableSpec& observable) {
  if (!sub.basis) throw std::length_error("agsp_residual: window too large for a dense basis");
  const int d = sub.local_dim;
  const Index mid = sub.window_dim();
  const Index left = ipow(d, sub.window.first);
  const Index right = ipow(d, n_sites - 1 - sub.window.last);
  if (state.size() != left * mid * right) throw std::invalid_argument("agsp_residual: dimension mismatch");

  AgspResult r;
  const double norm2 = state.squaredNorm();
  r.expectation = dense_expectation(state, observable.matrix, observable.first_site, d, n_sites);
  const CMatrix bl = project_local(sub, observable.matrix, observable.first_site, 2);
  const CVector applied = apply_subspace_operator(sub, bl, state, n_sites);
  r.residual = (applied - r.expectation * state).norm() / std::sqrt(norm2);

  // W^dag rho_L W accumulated without forming rho_L
  using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const CMatrix& w = *sub.basis;
  CMatrix rho_q = CMatrix::Zero(sub.q, sub.q);
  for (Index a = 0; a < left; ++a) {
    Eigen::Map<const RowMat> m(state.data() + a * mid * right, mid, right);
    const CMatrix y = w.adjoint() * m;
    rho_q.noalias() += y * y.adjoint();
  }
  rho_q /= norm2;
  r.leakage = 1.0 - rho_q.trace().real();
  const auto eig = hermitian_eigen(bl, 1e-10);
  for (Index b = 0; b < eig.values.size(); ++b) {
    const CVector v = eig.vectors.col(b);
    const double weight = v.dot(rho_q * v).real();
    r.markov_sum += weight * std::pow(eig.values(b) - r.expectation, 2);
  }
  return r;
}

CMatrix trace_boundary(const CMatrix& op, int window_sites, int local_dim) {
  if (window_sites < 3) throw std::invalid_argument("trace_boundary: window needs an interior");
  const Index full = ipow(local_dim, window_sites);
  if (op.rows() != full || op.cols() != full)
    throw std::invalid_argument("trace_boundary: operator does not match the window partition");
  const Index d = local_dim;
  const Index mid = ipow(local_dim, window_sites - 2);
  CMatrix out = CMatrix::Zero(mid, mid);
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b)
      for (Index i = 0; i < mid; ++i)
        for (Index j = 0; j < mid; ++j) out(i, j) += op((a * mid + i) * d + b, (a * mid + j) * d + b);
  return out;
}

double commutator_residual(const CMatrix& rho, const CMatrix& h_l, int window_sites, int local_dim) {
  if (rho.rows() != h_l.rows() || rho.cols() != h_l.cols())
    throw std::invalid_argument("commutator_residual: rho and H_L differ in shape");
  const CMatrix comm = rho * h_l - h_l * rho;
  return trace_boundary(comm, window_sites, local_dim).norm();
}

}  // namespace patchbound
