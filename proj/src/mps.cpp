#include "patchbound/mps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace patchbound {

std::vector<int> MpsState::bond_dims() const {
  std::vector<int> dims;
  dims.reserve(n_sites + 1);
  for (int i = 0; i < n_sites; ++i) dims.push_back(left_dim(i));
  dims.push_back(right_dim(n_sites - 1));
  return dims;
}

int MpsState::max_bond_dim() const {
  const auto dims = bond_dims();
  return *std::max_element(dims.begin(), dims.end());
}

namespace {

// Slices stacked vertically: row = s * Dl + alpha.
CMatrix stack_vertical(const SiteTensor& t) {
  const Index dl = t[0].rows(), dr = t[0].cols();
  CMatrix m(dl * t.size(), dr);
  for (std::size_t s = 0; s < t.size(); ++s) m.block(s * dl, 0, dl, dr) = t[s];
  return m;
}

// Slices side by side: col = s * Dr + beta.
CMatrix stack_horizontal(const SiteTensor& t) {
  const Index dl = t[0].rows(), dr = t[0].cols();
  CMatrix m(dl, dr * t.size());
  for (std::size_t s = 0; s < t.size(); ++s) m.block(0, s * dr, dl, dr) = t[s];
  return m;
}

SiteTensor unstack_vertical(const CMatrix& m, int d) {
  const Index dl = m.rows() / d;
  SiteTensor t(d);
  for (int s = 0; s < d; ++s) t[s] = m.block(s * dl, 0, dl, m.cols());
  return t;
}

SiteTensor unstack_horizontal(const CMatrix& m, int d) {
  const Index dr = m.cols() / d;
  SiteTensor t(d);
  for (int s = 0; s < d; ++s) t[s] = m.block(0, s * dr, m.rows(), dr);
  return t;
}

void left_orthonormalize(MpsState& mps, int site) {
  const CMatrix m = stack_vertical(mps.tensors[site]);
  Eigen::HouseholderQR<CMatrix> qr(m);
  const Index k = std::min(m.rows(), m.cols());
  const CMatrix q = qr.householderQ() * CMatrix::Identity(m.rows(), k);
  const CMatrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  mps.tensors[site] = unstack_vertical(q, mps.local_dim);
  if (site + 1 < mps.n_sites) {
    for (auto& slice : mps.tensors[site + 1]) slice = r * slice;
  } else {
    for (auto& slice : mps.tensors[site]) slice *= r(0, 0);
  }
}

void right_orthonormalize(MpsState& mps, int site) {
  const CMatrix m = stack_horizontal(mps.tensors[site]);
  const CMatrix mt = m.adjoint();
  Eigen::HouseholderQR<CMatrix> qr(mt);
  const Index k = std::min(mt.rows(), mt.cols());
  const CMatrix q = qr.householderQ() * CMatrix::Identity(mt.rows(), k);
  const CMatrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  mps.tensors[site] = unstack_horizontal(q.adjoint(), mps.local_dim);
  const CMatrix l = r.adjoint();
  if (site > 0) {
    for (auto& slice : mps.tensors[site - 1]) slice = slice * l;
  } else {
    for (auto& slice : mps.tensors[site]) slice *= l(0, 0);
  }
}

}  // namespace

CMatrix transfer_left(const CMatrix& env, const SiteTensor& a) {
  CMatrix out = CMatrix::Zero(a[0].cols(), a[0].cols());
  for (const auto& s : a) out.noalias() += s.adjoint() * env * s;
  return out;
}

CMatrix transfer_left_op(const CMatrix& env, const SiteTensor& a, const CMatrix& op) {
  CMatrix out = CMatrix::Zero(a[0].cols(), a[0].cols());
  const int d = static_cast<int>(a.size());
  for (int t = 0; t < d; ++t) {
    const CMatrix et = env * a[t];
    for (int s = 0; s < d; ++s) {
      if (op(s, t) == cplx(0)) continue;
      out.noalias() += op(s, t) * (a[s].adjoint() * et);
    }
  }
  return out;
}

CMatrix transfer_right(const CMatrix& env, const SiteTensor& a) {
  CMatrix out = CMatrix::Zero(a[0].rows(), a[0].rows());
  for (const auto& s : a) out.noalias() += s.conjugate() * env * s.transpose();
  return out;
}

SiteTensor merge_sites(const SiteTensor& a, const SiteTensor& b) {
  SiteTensor out;
  out.reserve(a.size() * b.size());
  for (const auto& sa : a)
    for (const auto& sb : b) out.push_back(sa * sb);
  return out;
}

namespace {

std::vector<CMatrix> right_environments(const MpsState& mps) {
  // envs[b] is the environment of bond b (between sites b-1 and b).
  std::vector<CMatrix> envs(mps.n_sites + 1);
  envs[mps.n_sites] = CMatrix::Identity(1, 1);
  for (int i = mps.n_sites - 1; i >= 0; --i) envs[i] = transfer_right(envs[i + 1], mps.tensors[i]);
  return envs;
}

std::vector<CMatrix> left_environments(const MpsState& mps) {
  std::vector<CMatrix> envs(mps.n_sites + 1);
  envs[0] = CMatrix::Identity(1, 1);
  for (int i = 0; i < mps.n_sites; ++i) envs[i + 1] = transfer_left(envs[i], mps.tensors[i]);
  return envs;
}

}  // namespace

MpsState random_mps(int n_sites, int local_dim, int bond_dim, std::mt19937_64& rng) {
  if (n_sites < 1 || local_dim < 1 || bond_dim < 1)
    throw std::invalid_argument("random_mps: bad dimensions");
  MpsState mps;
  mps.n_sites = n_sites;
  mps.local_dim = local_dim;
  std::vector<int> dims(n_sites + 1);
  for (int b = 0; b <= n_sites; ++b) {
    const double cap = std::pow(static_cast<double>(local_dim), std::min(b, n_sites - b));
    dims[b] = static_cast<int>(std::min<double>(bond_dim, cap));
  }
  mps.tensors.resize(n_sites);
  for (int i = 0; i < n_sites; ++i) {
    mps.tensors[i].resize(local_dim);
    for (auto& slice : mps.tensors[i]) slice = random_complex_matrix(dims[i], dims[i + 1], rng);
  }
  canonicalize(mps, 0);
  normalize(mps);
  return mps;
}

void canonicalize(MpsState& mps, int center) {
  if (center < 0 || center >= mps.n_sites) throw std::invalid_argument("canonicalize: bad center");
  for (int i = 0; i < center; ++i) left_orthonormalize(mps, i);
  for (int i = mps.n_sites - 1; i > center; --i) right_orthonormalize(mps, i);
  mps.center = center;
}

double squared_norm(const MpsState& mps) {
  CMatrix env = CMatrix::Identity(1, 1);
  for (const auto& t : mps.tensors) env = transfer_left(env, t);
  return env(0, 0).real();
}

void normalize(MpsState& mps) {
  const double n = std::sqrt(squared_norm(mps));
  if (n == 0.0) throw std::runtime_error("normalize: zero state");
  const int site = mps.center >= 0 ? mps.center : 0;
  for (auto& slice : mps.tensors[site]) slice /= n;
}

double canonical_residual(const MpsState& mps) {
  double worst = 0.0;
  if (mps.center < 0) return worst;
  for (int i = 0; i < mps.center; ++i) {
    const CMatrix g = transfer_left(CMatrix::Identity(mps.left_dim(i), mps.left_dim(i)), mps.tensors[i]);
    worst = std::max(worst, (g - CMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
  }
  for (int i = mps.center + 1; i < mps.n_sites; ++i) {
    const CMatrix g = transfer_right(CMatrix::Identity(mps.right_dim(i), mps.right_dim(i)), mps.tensors[i]);
    worst = std::max(worst, (g - CMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
  }
  return worst;
}

CVector to_dense(const MpsState& mps) {
  const std::int64_t dim = ipow(mps.local_dim, mps.n_sites);
  if (dim > kDenseVectorLimit) throw std::length_error("to_dense: state exceeds 2^20 amplitudes");
  // rows: multi-index of the sites contracted so far; cols: open bond
  CMatrix acc = CMatrix::Identity(1, 1);
  for (const auto& t : mps.tensors) {
    const Index d = static_cast<Index>(t.size());
    CMatrix next(acc.rows() * d, t[0].cols());
    for (Index r = 0; r < acc.rows(); ++r)
      for (Index s = 0; s < d; ++s) next.row(r * d + s) = acc.row(r) * t[s];
    acc = std::move(next);
  }
  return acc.col(0);
}

MpsState mps_from_dense(const CVector& state, int n_sites, int local_dim, double rel_cutoff) {
  if (state.size() != ipow(local_dim, n_sites))
    throw std::invalid_argument("mps_from_dense: dimension mismatch");
  MpsState mps;
  mps.n_sites = n_sites;
  mps.local_dim = local_dim;
  mps.tensors.resize(n_sites);
  // remainder: (bond) x (remaining sites)
  CMatrix rest = state.transpose();
  rest /= state.norm();
  for (int i = 0; i < n_sites - 1; ++i) {
    const Index bond = rest.rows();
    const Index tail = rest.cols() / local_dim;
    // regroup to (bond * d) x tail with row = s * bond + alpha
    CMatrix m(bond * local_dim, tail);
    for (Index a = 0; a < bond; ++a)
      for (int s = 0; s < local_dim; ++s)
        m.row(s * bond + a) = rest.row(a).segment(s * tail, tail);
    const auto dec = svd(m);
    Index keep = 0;
    while (keep < dec.s.size() && dec.s(keep) > rel_cutoff * dec.s(0)) ++keep;
    keep = std::max<Index>(keep, 1);
    mps.tensors[i] = unstack_vertical(dec.u.leftCols(keep), local_dim);
    rest = dec.s.head(keep).asDiagonal() * dec.vh.topRows(keep);
  }
  SiteTensor last(local_dim);
  for (int s = 0; s < local_dim; ++s) last[s] = rest.col(s);
  mps.tensors[n_sites - 1] = last;
  mps.center = n_sites - 1;
  normalize(mps);
  return mps;
}

MpsState aklt_valence_bond_state(int n_sites, int left_edge, int right_edge) {
  if (n_sites < 2) throw std::invalid_argument("aklt_valence_bond_state: need >= 2 sites");
  if (left_edge < 0 || left_edge > 1 || right_edge < 0 || right_edge > 1)
    throw std::invalid_argument("aklt_valence_bond_state: edge index must be 0 or 1");
  const double a = std::sqrt(2.0 / 3.0), b = std::sqrt(1.0 / 3.0);
  SiteTensor bulk(3, CMatrix::Zero(2, 2));
  bulk[0](0, 1) = a;
  bulk[1](0, 0) = -b;
  bulk[1](1, 1) = b;
  bulk[2](1, 0) = -a;
  MpsState mps;
  mps.n_sites = n_sites;
  mps.local_dim = 3;
  for (int i = 0; i < n_sites; ++i) {
    SiteTensor t = bulk;
    if (i == 0)
      for (auto& s : t) s = CMatrix(s.row(left_edge));
    if (i == n_sites - 1)
      for (auto& s : t) s = CMatrix(s.col(right_edge));
    mps.tensors.push_back(std::move(t));
  }
  canonicalize(mps, 0);
  normalize(mps);
  return mps;
}

// ---------------------------------------------------------------------------

Mpo build_mpo(const SpinChainModel& model) {
  const int n = model.n_sites;
  const int d = model.local_dim;
  // operator-Schmidt factors of each bond term: h = sum_k L_k (x) R_k
  std::vector<std::vector<CMatrix>> lefts(n - 1), rights(n - 1);
  for (const auto& term : model.terms) {
    CMatrix reshaped(d * d, d * d);  // rows (s1 t1), cols (s2 t2)
    for (int s1 = 0; s1 < d; ++s1)
      for (int s2 = 0; s2 < d; ++s2)
        for (int t1 = 0; t1 < d; ++t1)
          for (int t2 = 0; t2 < d; ++t2)
            reshaped(s1 * d + t1, s2 * d + t2) = term.matrix(s1 * d + s2, t1 * d + t2);
    const auto dec = svd(reshaped);
    for (Index k = 0; k < dec.s.size(); ++k) {
      if (dec.s(k) <= 1e-14 * dec.s(0)) break;
      const double w = std::sqrt(dec.s(k));
      CMatrix l(d, d), r(d, d);
      for (int s = 0; s < d; ++s)
        for (int t = 0; t < d; ++t) {
          l(s, t) = w * dec.u(s * d + t, k);
          r(s, t) = w * dec.vh(k, s * d + t);
        }
      lefts[term.site].push_back(l);
      rights[term.site].push_back(r);
    }
  }
  // bond b: 0 = start, 1..r = waiting, r+1 = done (bond 0 start only, bond N done only)
  auto bond_dim = [&](int b) {
    if (b == 0 || b == n) return 1;
    return 2 + static_cast<int>(lefts[b - 1].size());
  };
  auto done_index = [&](int b) { return b == n ? 0 : bond_dim(b) - 1; };

  const CMatrix id = CMatrix::Identity(d, d);
  Mpo mpo(n);
  for (int j = 0; j < n; ++j) {
    MpoSite& site = mpo[j];
    site.left_dim = bond_dim(j);
    site.right_dim = bond_dim(j + 1);
    if (j + 1 < n) {
      site.entries.push_back({0, 0, id});
      for (std::size_t k = 0; k < lefts[j].size(); ++k)
        site.entries.push_back({0, static_cast<int>(k) + 1, lefts[j][k]});
    }
    if (j > 0) {
      for (std::size_t k = 0; k < rights[j - 1].size(); ++k)
        site.entries.push_back({static_cast<int>(k) + 1, done_index(j + 1), rights[j - 1][k]});
      site.entries.push_back({done_index(j), done_index(j + 1), id});
    }
  }
  return mpo;
}

namespace {

using Env = std::vector<CMatrix>;  // one (bra x ket) matrix per MPO bond index

Env mpo_transfer_left(const Env& env, const SiteTensor& a, const MpoSite& w) {
  const Index dr = a[0].cols();
  Env out(w.right_dim, CMatrix::Zero(dr, dr));
  const int d = static_cast<int>(a.size());
  std::vector<std::vector<CMatrix>> cache(w.left_dim);
  for (const auto& e : w.entries) {
    auto& ya = cache[e.in];
    if (ya.empty()) {
      ya.resize(d);
      for (int t = 0; t < d; ++t) ya[t] = env[e.in] * a[t];
    }
    for (int s = 0; s < d; ++s) {
      CMatrix acc = CMatrix::Zero(ya[0].rows(), dr);
      bool any = false;
      for (int t = 0; t < d; ++t) {
        if (e.op(s, t) == cplx(0)) continue;
        acc.noalias() += e.op(s, t) * ya[t];
        any = true;
      }
      if (any) out[e.out].noalias() += a[s].adjoint() * acc;
    }
  }
  return out;
}

Env mpo_transfer_right(const Env& env, const SiteTensor& a, const MpoSite& w) {
  const Index dl = a[0].rows();
  Env out(w.left_dim, CMatrix::Zero(dl, dl));
  const int d = static_cast<int>(a.size());
  std::vector<std::vector<CMatrix>> cache(w.right_dim);
  for (const auto& e : w.entries) {
    auto& yc = cache[e.out];
    if (yc.empty()) {
      yc.resize(d);
      for (int t = 0; t < d; ++t) yc[t] = env[e.out] * a[t].transpose();
    }
    for (int s = 0; s < d; ++s) {
      CMatrix acc = CMatrix::Zero(yc[0].rows(), dl);
      bool any = false;
      for (int t = 0; t < d; ++t) {
        if (e.op(s, t) == cplx(0)) continue;
        acc.noalias() += e.op(s, t) * yc[t];
        any = true;
      }
      if (any) out[e.in].noalias() += a[s].conjugate() * acc;
    }
  }
  return out;
}

struct TwoSiteBlock {
  int a = 0;
  int c = 0;
  CMatrix op;  // d^2 x d^2
};

std::vector<TwoSiteBlock> two_site_blocks(const MpoSite& w1, const MpoSite& w2) {
  std::vector<TwoSiteBlock> blocks;
  for (const auto& e1 : w1.entries)
    for (const auto& e2 : w2.entries) {
      if (e1.out != e2.in) continue;
      const CMatrix k = kron(e1.op, e2.op);
      auto it = std::find_if(blocks.begin(), blocks.end(), [&](const TwoSiteBlock& b) {
        return b.a == e1.in && b.c == e2.out;
      });
      if (it == blocks.end())
        blocks.push_back({e1.in, e2.out, k});
      else
        it->op += k;
    }
  return blocks;
}

}  // namespace

double mpo_expectation(const MpsState& mps, const Mpo& mpo) {
  Env env{CMatrix::Identity(1, 1)};
  for (int i = 0; i < mps.n_sites; ++i) env = mpo_transfer_left(env, mps.tensors[i], mpo[i]);
  return env[0](0, 0).real() / squared_norm(mps);
}

DmrgResult dmrg_ground_state(const SpinChainModel& model, const SweepConfig& config) {
  if (config.bond_dim < 1) throw std::invalid_argument("dmrg: bond dimension must be >= 1");
  const int n = model.n_sites;
  const int d = model.local_dim;
  const Mpo mpo = build_mpo(model);
  std::mt19937_64 rng(config.seed);
  MpsState mps = random_mps(n, d, config.bond_dim, rng);

  std::vector<Env> left(n + 1), right(n + 1);
  left[0] = Env{CMatrix::Identity(1, 1)};
  right[n] = Env{CMatrix::Identity(1, 1)};
  for (int i = n - 1; i >= 1; --i) right[i] = mpo_transfer_right(right[i + 1], mps.tensors[i], mpo[i]);

  std::vector<std::vector<TwoSiteBlock>> blocks(n - 1);
  for (int j = 0; j + 1 < n; ++j) blocks[j] = two_site_blocks(mpo[j], mpo[j + 1]);

  DmrgResult result;
  double energy = 0.0;

  auto optimize = [&](int j, bool moving_right) {
    const Index dl = mps.left_dim(j);
    const Index dr = mps.right_dim(j + 1);
    const Index dd = static_cast<Index>(d) * d;
    const Index block = dl * dr;
    const Env& lenv = left[j];
    const Env& renv = right[j + 2];
    std::vector<CMatrix> rt(renv.size());
    for (std::size_t c = 0; c < renv.size(); ++c) rt[c] = renv[c].transpose();
    const auto& blk = blocks[j];

    auto unpack = [&](const CVector& v, Index s) {
      return Eigen::Map<const CMatrix>(v.data() + s * block, dl, dr);
    };
    LinearOperator heff = [&](const CVector& in, CVector& out) {
      out = CVector::Zero(in.size());
      std::vector<std::vector<CMatrix>> ya(lenv.size());
      for (const auto& b : blk) {
        auto& y = ya[b.a];
        if (y.empty()) {
          y.resize(dd);
          for (Index s = 0; s < dd; ++s) y[s] = lenv[b.a] * unpack(in, s);
        }
        std::vector<CMatrix> z(dd);
        for (Index s = 0; s < dd; ++s) z[s] = y[s] * rt[b.c];
        for (Index sp = 0; sp < dd; ++sp) {
          Eigen::Map<CMatrix> dst(out.data() + sp * block, dl, dr);
          for (Index s = 0; s < dd; ++s) {
            const cplx coef = b.op(sp, s);
            if (coef != cplx(0)) dst.noalias() += coef * z[s];
          }
        }
      }
    };

    CVector theta(dd * block);
    for (int s1 = 0; s1 < d; ++s1)
      for (int s2 = 0; s2 < d; ++s2) {
        const CMatrix t = mps.tensors[j][s1] * mps.tensors[j + 1][s2];
        Eigen::Map<CMatrix>(theta.data() + (s1 * d + s2) * block, dl, dr) = t;
      }
    if (theta.norm() < 1e-300) theta.setOnes();
    LanczosOptions opts;
    opts.krylov_dim = config.lanczos_krylov;
    opts.max_restarts = 6;
    opts.tol = 1e-11;
    const auto pair = lanczos_lowest(heff, theta, {}, opts);
    energy = pair.value;

    CMatrix m(d * dl, d * dr);
    for (int s1 = 0; s1 < d; ++s1)
      for (int s2 = 0; s2 < d; ++s2)
        m.block(s1 * dl, s2 * dr, dl, dr) = unpack(pair.vector, s1 * d + s2);
    const auto dec = svd(m);
    Index keep = 0;
    while (keep < dec.s.size() && keep < config.bond_dim &&
           dec.s(keep) > config.svd_cutoff * dec.s(0))
      ++keep;
    keep = std::max<Index>(keep, 1);
    const double total = dec.s.squaredNorm();
    const double kept = dec.s.head(keep).squaredNorm();
    result.max_discarded_weight = std::max(result.max_discarded_weight, (total - kept) / total);
    const RVector s = dec.s.head(keep) / std::sqrt(kept);
    if (moving_right) {
      mps.tensors[j] = unstack_vertical(dec.u.leftCols(keep), d);
      mps.tensors[j + 1] = unstack_horizontal(s.asDiagonal() * dec.vh.topRows(keep), d);
      left[j + 1] = mpo_transfer_left(left[j], mps.tensors[j], mpo[j]);
    } else {
      mps.tensors[j] = unstack_vertical(dec.u.leftCols(keep) * s.asDiagonal(), d);
      mps.tensors[j + 1] = unstack_horizontal(dec.vh.topRows(keep), d);
      right[j + 1] = mpo_transfer_right(right[j + 2], mps.tensors[j + 1], mpo[j + 1]);
    }
  };

  double previous = std::numeric_limits<double>::infinity();
  for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    for (int j = 0; j + 1 < n; ++j) optimize(j, true);
    for (int j = n - 2; j >= 0; --j) optimize(j, false);
    result.sweep_energies.push_back(energy);
    result.sweeps = sweep;
    if (sweep >= config.min_sweeps && std::abs(previous - energy) < config.energy_tol) {
      result.converged = true;
      break;
    }
    previous = energy;
  }
  mps.center = 0;
  normalize(mps);
  result.state = std::move(mps);
  result.energy = energy;
  return result;
}

// ---------------------------------------------------------------------------

cplx expectation_local(const MpsState& mps, const CMatrix& op, int first_site, int span) {
  if (first_site < 0 || span < 1 || first_site + span > mps.n_sites)
    throw std::invalid_argument("expectation_local: support outside the chain");
  const int d = mps.local_dim;
  const Index dim = ipow(d, span);
  if (op.rows() != dim || op.cols() != dim)
    throw std::invalid_argument("expectation_local: operator dimension mismatch");

  CMatrix lenv = CMatrix::Identity(1, 1);
  for (int i = 0; i < first_site; ++i) lenv = transfer_left(lenv, mps.tensors[i]);
  CMatrix renv = CMatrix::Identity(1, 1);
  for (int i = mps.n_sites - 1; i >= first_site + span; --i) renv = transfer_right(renv, mps.tensors[i]);

  // products over the support, indexed by the multi-index s_1..s_span
  std::vector<CMatrix> prods{CMatrix::Identity(mps.left_dim(first_site), mps.left_dim(first_site))};
  for (int k = 0; k < span; ++k) {
    std::vector<CMatrix> next;
    next.reserve(prods.size() * d);
    for (const auto& p : prods)
      for (int s = 0; s < d; ++s) next.push_back(p * mps.tensors[first_site + k][s]);
    prods = std::move(next);
  }
  const CMatrix rt = renv.transpose();
  std::vector<CMatrix> ket(dim);
  for (Index s = 0; s < dim; ++s) ket[s] = lenv * prods[s] * rt;
  cplx value = 0;
  for (Index sp = 0; sp < dim; ++sp) {
    CMatrix acc = CMatrix::Zero(ket[0].rows(), ket[0].cols());
    bool any = false;
    for (Index s = 0; s < dim; ++s) {
      if (op(sp, s) == cplx(0)) continue;
      acc += op(sp, s) * ket[s];
      any = true;
    }
    if (any) value += (prods[sp].conjugate().cwiseProduct(acc)).sum();
  }
  return value / squared_norm(mps);
}

double expectation(const MpsState& mps, const ObservableSpec& observable) {
  if (observable.local_dim != mps.local_dim)
    throw std::invalid_argument("expectation: local dimension mismatch");
  if (observable.first_site < 0 || observable.first_site + 1 >= mps.n_sites)
    throw std::invalid_argument("expectation: observable sites outside the chain");
  return expectation_local(mps, observable.matrix, observable.first_site, 2).real();
}

SchmidtSpectrum schmidt_spectrum(const MpsState& mps, int bond) {
  if (bond < 1 || bond >= mps.n_sites) throw std::invalid_argument("schmidt_spectrum: bad bond");
  MpsState copy = mps;
  canonicalize(copy, bond);
  const CMatrix m = stack_horizontal(copy.tensors[bond]);
  const auto dec = svd(m);
  SchmidtSpectrum spec;
  spec.bond = bond;
  Index keep = 0;
  while (keep < dec.s.size() && dec.s(keep) > 1e-15 * dec.s(0)) ++keep;
  spec.weights = dec.s.head(keep) / dec.s.head(keep).norm();
  return spec;
}

CorrelationFit correlation_length(const MpsState& mps, const CMatrix& probe, double floor,
                                  double ceiling) {
  const int n = mps.n_sites;
  const int d = mps.local_dim;
  if (probe.rows() != d || probe.cols() != d)
    throw std::invalid_argument("correlation_length: probe must be a single-site operator");
  const auto lenvs = left_environments(mps);
  const auto renvs = right_environments(mps);
  const double nrm = lenvs[n](0, 0).real();

  auto one_point = [&](int site) {
    const CMatrix e = transfer_left_op(lenvs[site], mps.tensors[site], probe);
    return (e.cwiseProduct(renvs[site + 1])).sum().real() / nrm;
  };

  CorrelationFit fit;
  fit.reference_site = n / 4;
  const int i = fit.reference_site;
  const double oi = one_point(i);
  CMatrix carry = transfer_left_op(lenvs[i], mps.tensors[i], probe);
  for (int j = i + 1; j < n && j - i <= n / 2; ++j) {
    const CMatrix closed = transfer_left_op(carry, mps.tensors[j], probe);
    const double two = (closed.cwiseProduct(renvs[j + 1])).sum().real() / nrm;
    fit.distances.push_back(j - i);
    fit.correlator.push_back(std::abs(two - oi * one_point(j)));
    carry = transfer_left(carry, mps.tensors[j]);
  }

  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < fit.distances.size(); ++k) {
    const double c = fit.correlator[k];
    if (c >= floor && c <= ceiling) {
      xs.push_back(fit.distances[k]);
      ys.push_back(std::log(c));
    }
  }
  fit.points_used = static_cast<int>(xs.size());
  if (xs.size() < 3) return fit;
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  const double slope = sxy / sxx;
  if (slope < 0) {
    fit.xi = -1.0 / slope;
    fit.reliable = true;
  }
  return fit;
}

CMatrix random_antihermitian_operator(int n_sites, int local_dim, const RandomMpoConfig& config,
                                      std::mt19937_64& rng) {
  if (n_sites < 1) throw std::invalid_argument("random_antihermitian_operator: need >= 1 site");
  const std::int64_t dim = ipow(local_dim, n_sites);
  if (dim > kDenseMatrixLimit)
    throw std::length_error("random_antihermitian_operator: operator too large for dense form");
  const int dd = local_dim * local_dim;
  std::vector<int> bonds(n_sites + 1);
  for (int b = 0; b <= n_sites; ++b) {
    const double cap = std::pow(static_cast<double>(dd), std::min(b, n_sites - b));
    bonds[b] = static_cast<int>(std::min<double>(config.bond_dim, cap));
  }

  // partial[beta]: dense operator on the sites contracted so far
  std::vector<CMatrix> partial{CMatrix::Identity(1, 1)};
  for (int k = 0; k < n_sites; ++k) {
    const int bl = bonds[k], br = bonds[k + 1];
    // core entries W[beta][gamma](s, t), drawn in (beta, s, t, gamma) order
    std::vector<std::vector<CMatrix>> core(bl, std::vector<CMatrix>(br, CMatrix(local_dim, local_dim)));
    for (int beta = 0; beta < bl; ++beta)
      for (int s = 0; s < local_dim; ++s)
        for (int t = 0; t < local_dim; ++t)
          for (int gamma = 0; gamma < br; ++gamma) core[beta][gamma](s, t) = complex_normal(rng);

    const Index sub = partial[0].rows();
    std::vector<CMatrix> next(br, CMatrix::Zero(sub * local_dim, sub * local_dim));
    for (int gamma = 0; gamma < br; ++gamma) {
      for (int s = 0; s < local_dim; ++s)
        for (int t = 0; t < local_dim; ++t) {
          CMatrix acc = CMatrix::Zero(sub, sub);
          for (int beta = 0; beta < bl; ++beta) acc += core[beta][gamma](s, t) * partial[beta];
          for (Index r = 0; r < sub; ++r)
            for (Index c = 0; c < sub; ++c) next[gamma](r * local_dim + s, c * local_dim + t) = acc(r, c);
        }
    }
    partial = std::move(next);
  }
  CMatrix a = 0.5 * (partial[0] - partial[0].adjoint());
  const double norm = a.norm();
  if (norm == 0.0) throw std::runtime_error("random_antihermitian_operator: degenerate sample");
  return a / norm;
}

}  // namespace patchbound
