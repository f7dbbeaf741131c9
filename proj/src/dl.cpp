#include "patchbound/dl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace patchbound {

LayeredProjectors build_layers(const SpinChainModel& model, double cutoff) {
  if (!model.frustration_free())
    throw std::invalid_argument("build_layers: " + model.name() + " is not frustration-free");
  LayeredProjectors out;
  out.n_sites = model.n_sites;
  out.local_dim = model.local_dim;
  out.layers.resize(2);
  for (const auto& term : model.terms) {
    const auto eig = hermitian_eigen(term.matrix);
    const double e0 = eig.values(0);
    CMatrix p = CMatrix::Zero(term.matrix.rows(), term.matrix.cols());
    for (Index k = 0; k < eig.values.size() && eig.values(k) - e0 <= cutoff; ++k)
      p += eig.vectors.col(k) * eig.vectors.col(k).adjoint();
    out.layers[term.site % 2].push_back({term.site, p});
  }
  return out;
}

CVector apply_layer(const LayeredProjectors& layers, int layer, const CVector& state) {
  CVector v = state;
  for (const auto& p : layers.layers.at(layer))
    v = apply_local(v, p.matrix, p.site, 2, layers.local_dim, layers.n_sites);
  return v;
}

CVector apply_dl(const LayeredProjectors& layers, const CVector& state, int power) {
  CVector v = state;
  const int g = static_cast<int>(layers.layers.size());
  for (int k = 0; k < power; ++k)
    for (int layer = g - 1; layer >= 0; --layer) v = apply_layer(layers, layer, v);
  return v;
}

CVector apply_dl_adjoint(const LayeredProjectors& layers, const CVector& state, int power) {
  CVector v = state;
  const int g = static_cast<int>(layers.layers.size());
  for (int k = 0; k < power; ++k)
    for (int layer = 0; layer < g; ++layer) v = apply_layer(layers, layer, v);
  return v;
}

std::vector<CVector> frustration_free_ground_space(const SpinChainModel& model) {
  if (model.kind != ModelKind::AKLT)
    throw std::invalid_argument("frustration_free_ground_space: no zero-energy construction for " + model.name());
  const int n = model.n_sites;
  CMatrix states(model.dimension(), 4);
  for (int left = 0; left < 2; ++left)
    for (int right = 0; right < 2; ++right) states.col(2 * left + right) = to_dense(aklt_valence_bond_state(n, left, right));
  // orthonormalize through the eigenvectors of the 4 x 4 Gram matrix
  const auto eig = hermitian_eigen(hermitian_part(states.adjoint() * states));
  std::vector<CVector> out;
  for (Index k = 3; k >= 0; --k) {
    if (eig.values(k) <= 1e-12 * eig.values(3)) continue;
    out.push_back(states * eig.vectors.col(k) / std::sqrt(eig.values(k)));
  }
  return out;
}

namespace {

CVector project_out(const std::vector<CVector>& ground, CVector v) {
  for (const auto& g : ground) v -= g * g.dot(v);
  return v;
}

}  // namespace

DlDecay dl_contraction_rate(const LayeredProjectors& layers, const std::vector<CVector>& ground, int l_max) {
  if (ground.empty()) throw std::invalid_argument("dl_contraction_rate: empty ground space");
  DlDecay out;
  out.degenerate = ground.size() > 1;
  out.norms.push_back(1.0);
  const Index dim = ground.front().size();
  std::mt19937_64 rng(1);
  CVector start(dim);
  for (Index i = 0; i < dim; ++i) start(i) = complex_normal(rng);
  LanczosOptions opts;
  opts.tol = 1e-11;
  std::vector<double> xs, ys;
  for (int l = 1; l <= l_max; ++l) {
    // -(DL^l Q)^dag (DL^l Q): its lowest eigenvalue is -||DL^l Q||^2
    const LinearOperator op = [&](const CVector& in, CVector& out_v) {
      out_v = -project_out(ground, apply_dl_adjoint(layers, apply_dl(layers, project_out(ground, in), l), l));
    };
    const EigenPair top = lanczos_lowest(op, start, ground, opts);
    const double norm = std::sqrt(std::max(0.0, -top.value));
    out.norms.push_back(norm);
    xs.push_back(l);
    ys.push_back(norm);
  }
  if (l_max >= 1) out.c = out.norms[1] * out.norms[1];
  out.fit = fit_exponential_decay(xs, ys);
  return out;
}

int lightcone_depth(const Window& window, int first_site, int span) {
  const int room = std::min(first_site - window.first, window.last - (first_site + span - 1));
  return std::max(0, room / 2);
}

LightconeCheck lightcone_identity_check(const LayeredProjectors& layers, const PatchSubspace& sub,
                                        const CVector& omega, const CMatrix& op, int first_site,
                                        int l_prime) {
  if (l_prime < 0) throw std::invalid_argument("lightcone_identity_check: negative power");
  const int n = layers.n_sites;
  const CMatrix identity = CMatrix::Identity(sub.q, sub.q);
  const CVector b_omega = apply_local(CVector(omega / omega.norm()), op, first_site, 2, layers.local_dim, n);
  LightconeCheck out;
  out.l_prime = l_prime;
  out.depth_limit = lightcone_depth(sub.window, first_site);
  out.inside_cone = l_prime <= out.depth_limit;
  if (l_prime == 0) return out;
  const CVector direct = apply_subspace_operator(sub, identity, b_omega, n);
  const CVector pulled = apply_subspace_operator(sub, identity, apply_dl(layers, b_omega, l_prime), n);
  out.residual = (direct - pulled).norm();
  return out;
}

AgspDlComparison agsp_dl_comparison(const LayeredProjectors& layers, const std::vector<CVector>& ground,
                                    const MpsState& mps, const PatchSubspace& sub,
                                    const ObservableSpec& observable) {
  const int n = layers.n_sites;
  CVector omega = to_dense(mps);
  omega /= omega.norm();
  AgspDlComparison out;
  out.l = observable.first_site - sub.window.first;
  out.l_prime = lightcone_depth(sub.window, observable.first_site);
  out.residual = agsp_residual(omega, n, sub, observable).residual;
  const CVector b_omega = apply_local(omega, observable.matrix, observable.first_site, 2, layers.local_dim, n);
  const CVector leaked = project_out(ground, b_omega);
  out.leaked = leaked.norm();
  out.degeneracy = ((b_omega - leaked) - omega * omega.dot(b_omega)).norm();
  out.complement_norm = dl_contraction_rate(layers, ground, out.l_prime).norms.back();
  out.holds = out.residual <= out.complement_norm * out.leaked + out.degeneracy + 1e-9;
  return out;
}

}  // namespace patchbound
