#include "patchbound/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace patchbound {

namespace ops {

CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

CMatrix spin1_x() {
  const double r = 1.0 / std::sqrt(2.0);
  CMatrix m = CMatrix::Zero(3, 3);
  m(0, 1) = m(1, 0) = m(1, 2) = m(2, 1) = r;
  return m;
}

CMatrix spin1_y() {
  const double r = 1.0 / std::sqrt(2.0);
  CMatrix m = CMatrix::Zero(3, 3);
  m(0, 1) = cplx(0, -r);
  m(1, 0) = cplx(0, r);
  m(1, 2) = cplx(0, -r);
  m(2, 1) = cplx(0, r);
  return m;
}

CMatrix spin1_z() {
  CMatrix m = CMatrix::Zero(3, 3);
  m(0, 0) = 1;
  m(2, 2) = -1;
  return m;
}

}  // namespace ops

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

CMatrix aklt_bond() {
  const CMatrix ss = kron(ops::spin1_x(), ops::spin1_x()) +
                     kron(ops::spin1_y(), ops::spin1_y()) +
                     kron(ops::spin1_z(), ops::spin1_z());
  return 0.5 * ss + (1.0 / 6.0) * ss * ss + (1.0 / 3.0) * CMatrix::Identity(9, 9);
}

// Share of a site's field carried by the bond (i, i+1).
double field_weight(int site, int n_sites) {
  return (site == 0 || site == n_sites - 1) ? 1.0 : 0.5;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::AKLT: return "aklt";
    case ModelKind::TransverseIsing: return "ising";
    case ModelKind::TransverseXY: return "xy";
    case ModelKind::RandomFieldXY: return "rfxy";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  const std::string n = lower(name);
  if (n == "aklt" || n == "a") return ModelKind::AKLT;
  if (n == "ising" || n == "transverseising" || n == "b") return ModelKind::TransverseIsing;
  if (n == "xy" || n == "transversexy" || n == "c") return ModelKind::TransverseXY;
  if (n == "rfxy" || n == "randomfieldxy" || n == "d") return ModelKind::RandomFieldXY;
  throw std::invalid_argument("unknown model '" + name + "'");
}

SpinChainModel build_model(ModelKind kind, int n_sites, const ModelParams& params) {
  if (n_sites < 4) throw std::invalid_argument("build_model: need at least 4 sites");
  if (!std::isfinite(params.h) || params.h < 0.0)
    throw std::invalid_argument("build_model: field h must be finite and non-negative");
  if (!std::isfinite(params.alpha) || params.alpha < -1.0 || params.alpha > 1.0)
    throw std::invalid_argument("build_model: anisotropy alpha must lie in [-1, 1]");

  SpinChainModel model;
  model.kind = kind;
  model.n_sites = n_sites;
  model.params = params;

  if (kind == ModelKind::AKLT) {
    model.local_dim = 3;
    const CMatrix h = aklt_bond();
    for (int i = 0; i + 1 < n_sites; ++i) model.terms.push_back({i, h});
    return model;
  }

  model.local_dim = 2;
  model.fields.assign(n_sites, params.h);
  if (kind == ModelKind::RandomFieldXY) {
    if (!(params.field_min <= params.field_max))
      throw std::invalid_argument("build_model: empty field range");
    std::mt19937_64 rng(params.field_seed);
    std::uniform_real_distribution<double> dist(params.field_min, params.field_max);
    for (auto& f : model.fields) f = dist(rng);
  }

  const double prefactor = -1.0 / (2.0 * std::sqrt(1.0 + params.h * params.h));
  const CMatrix id = CMatrix::Identity(2, 2);
  CMatrix coupling;
  if (kind == ModelKind::TransverseIsing) {
    coupling = kron(ops::pauli_x(), ops::pauli_x());
  } else {
    coupling = 0.5 * (1.0 - params.alpha) * kron(ops::pauli_x(), ops::pauli_x()) +
               0.5 * (1.0 + params.alpha) * kron(ops::pauli_y(), ops::pauli_y());
  }
  for (int i = 0; i + 1 < n_sites; ++i) {
    const double wl = field_weight(i, n_sites) * model.fields[i];
    const double wr = field_weight(i + 1, n_sites) * model.fields[i + 1];
    CMatrix term = coupling + wl * kron(ops::pauli_z(), id) + wr * kron(id, ops::pauli_z());
    model.terms.push_back({i, prefactor * term});
  }
  return model;
}

std::string to_string(ObservableKind kind) {
  switch (kind) {
    case ObservableKind::PxPx: return "pxpx";
    case ObservableKind::PzPz: return "pzpz";
    case ObservableKind::RandomProjector: return "random";
  }
  return "unknown";
}

ObservableKind parse_observable_kind(const std::string& name) {
  const std::string n = lower(name);
  if (n == "pxpx") return ObservableKind::PxPx;
  if (n == "pzpz") return ObservableKind::PzPz;
  if (n == "random" || n == "randomprojector") return ObservableKind::RandomProjector;
  throw std::invalid_argument("unknown observable '" + name + "'");
}

ObservableSpec build_observable(ObservableKind kind, int first_site, int n_sites,
                                int local_dim, int rank, std::uint64_t seed) {
  if (first_site < 0 || first_site + 1 >= n_sites)
    throw std::invalid_argument("build_observable: sites outside the chain");
  const int dim = local_dim * local_dim;
  ObservableSpec spec;
  spec.kind = kind;
  spec.first_site = first_site;
  spec.local_dim = local_dim;
  spec.seed = seed;
  spec.rank = rank;

  switch (kind) {
    case ObservableKind::PzPz:
    case ObservableKind::PxPx: {
      if (local_dim != 2)
        throw std::invalid_argument("build_observable: PxPx/PzPz need spin-1/2 sites");
      CVector up(2);
      if (kind == ObservableKind::PzPz)
        up << 1, 0;
      else
        up << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
      const CMatrix p = up * up.adjoint();
      spec.matrix = kron(p, p);
      spec.rank = 1;
      break;
    }
    case ObservableKind::RandomProjector: {
      if (rank < 1 || rank > dim)
        throw std::invalid_argument("build_observable: projector rank outside [1, d^2]");
      std::mt19937_64 rng(seed);
      const CMatrix g = random_complex_matrix(dim, rank, rng);
      Eigen::HouseholderQR<CMatrix> qr(g);
      const CMatrix q = qr.householderQ() * CMatrix::Identity(dim, rank);
      spec.matrix = q * q.adjoint();
      break;
    }
  }
  return spec;
}

CMatrix patch_hamiltonian(const SpinChainModel& model, const Window& window) {
  if (window.first < 0 || window.last >= model.n_sites || window.size() < 1)
    throw std::invalid_argument("patch_hamiltonian: window outside the chain");
  const std::int64_t dim = ipow(model.local_dim, window.size());
  if (dim > kDenseVectorLimit)
    throw std::length_error("patch_hamiltonian: window dimension exceeds 2^20");
  if (dim > kDenseMatrixLimit)
    throw std::length_error("patch_hamiltonian: dense matrix too large; use apply_patch_hamiltonian");
  return apply_patch_hamiltonian(model, window, CMatrix::Identity(dim, dim));
}

CMatrix apply_patch_hamiltonian(const SpinChainModel& model, const Window& window,
                                const CMatrix& states) {
  if (window.first < 0 || window.last >= model.n_sites || window.size() < 1)
    throw std::invalid_argument("apply_patch_hamiltonian: window outside the chain");
  const int len = window.size();
  CMatrix out = CMatrix::Zero(states.rows(), states.cols());
  for (const auto& term : model.terms) {
    if (!window.contains(term.site) || !window.contains(term.site + 1)) continue;
    out += apply_local(states, term.matrix, term.site - window.first, 2, model.local_dim, len);
  }
  return out;
}

CVector apply_hamiltonian(const SpinChainModel& model, const CVector& state) {
  CMatrix cols = state;
  return apply_patch_hamiltonian(model, Window{0, model.n_sites - 1}, cols).col(0);
}

namespace {

constexpr std::int64_t kDenseDiagonalizationLimit = 256;

void check_exact_dimension(const SpinChainModel& model) {
  if (model.dimension() > kDenseVectorLimit)
    throw std::length_error("exact diagonalization: dimension d^N exceeds 2^20");
}

}  // namespace

std::vector<ExactState> exact_low_spectrum(const SpinChainModel& model, int k,
                                           std::uint64_t seed) {
  check_exact_dimension(model);
  const Index dim = model.dimension();
  if (k < 1 || k > dim) throw std::invalid_argument("exact_low_spectrum: bad k");
  std::vector<ExactState> out;
  if (dim <= kDenseDiagonalizationLimit) {
    const CMatrix h = patch_hamiltonian(model, Window{0, model.n_sites - 1});
    const auto eig = hermitian_eigen(h);
    for (int i = 0; i < k; ++i) {
      const CVector v = eig.vectors.col(i);
      out.push_back({eig.values(i), v, (h * v - eig.values(i) * v).norm()});
    }
    return out;
  }
  LinearOperator op = [&model](const CVector& in, CVector& res) {
    res = apply_hamiltonian(model, in);
  };
  LanczosOptions opts;
  opts.tol = 1e-11;
  opts.krylov_dim = dim > (1 << 18) ? 40 : 60;
  for (const auto& p : lanczos_lowest_k(op, dim, k, seed, opts))
    out.push_back({p.value, p.vector, p.residual});
  return out;
}

ExactState exact_ground(const SpinChainModel& model, std::uint64_t seed) {
  return exact_low_spectrum(model, 1, seed).front();
}

double dense_expectation(const CVector& state, const CMatrix& op, int first_site,
                         int local_dim, int n_sites) {
  const CVector applied = apply_local(state, op, first_site, 2, local_dim, n_sites);
  return state.dot(applied).real() / state.squaredNorm();
}

}  // namespace patchbound
