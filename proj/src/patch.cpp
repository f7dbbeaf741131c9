#include "patchbound/patch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace patchbound {

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_window(const Window& w, int n_sites) {
  if (w.size() < 2 || w.first < 1 || w.last > n_sites - 2) {
    std::ostringstream os;
    os << "patch window [" << w.first << ", " << w.last << "] must hold >= 2 sites and stay off the chain ends (N = "
       << n_sites << ")";
    throw std::invalid_argument(os.str());
  }
}

// Rows: k * d^L + s (open left index k), cols: right bond.
CMatrix contract_open(const std::vector<SiteTensor>& tensors) {
  CMatrix acc = CMatrix::Identity(tensors.front()[0].rows(), tensors.front()[0].rows());
  for (const auto& t : tensors) {
    const Index d = static_cast<Index>(t.size());
    CMatrix next(acc.rows() * d, t[0].cols());
    for (Index r = 0; r < acc.rows(); ++r)
      for (Index s = 0; s < d; ++s) next.row(r * d + s) = acc.row(r) * t[s];
    acc = std::move(next);
  }
  return acc;
}

// Psi(s, k * dr + l) from the open contraction.
CMatrix open_to_columns(const CMatrix& acc, Index dl, Index dim) {
  const Index dr = acc.cols();
  CMatrix psi(dim, dl * dr);
  for (Index k = 0; k < dl; ++k) psi.middleCols(k * dr, dr) = acc.middleRows(k * dim, dim);
  return psi;
}

SiteTensor slice_row(const SiteTensor& t, Index k) {
  SiteTensor out;
  for (const auto& s : t) out.push_back(s.row(k));
  return out;
}

// <I_a| O |I_b> over the network, O on [op_first, op_first + span) relative
// to the window (span 0 means no operator).
CMatrix gram_with_operator(const std::vector<SiteTensor>& net, const CMatrix* op, int op_first, int span) {
  const Index kl = net.front()[0].rows();
  const Index kr = net.back()[0].cols();
  const int len = static_cast<int>(net.size());

  // Merged chain: each element is one tensor, with the operator (if any)
  // acting on exactly one merged element.
  std::vector<SiteTensor> chain;
  int op_slot = -1;
  for (int i = 0; i < len;) {
    if (op && i == op_first) {
      SiteTensor merged = net[i];
      for (int j = 1; j < span; ++j) merged = merge_sites(merged, net[i + j]);
      op_slot = static_cast<int>(chain.size());
      chain.push_back(std::move(merged));
      i += span;
    } else {
      chain.push_back(net[i]);
      ++i;
    }
  }

  std::vector<SiteTensor> firsts;
  for (Index k = 0; k < kl; ++k) firsts.push_back(slice_row(chain.front(), k));

  CMatrix g(kl * kr, kl * kr);
  for (Index kb = 0; kb < kl; ++kb)
    for (Index kk = 0; kk < kl; ++kk) {
      // first element with distinct bra/ket rows
      CMatrix env = CMatrix::Zero(chain.front()[0].cols(), chain.front()[0].cols());
      const auto& bra = firsts[kb];
      const auto& ket = firsts[kk];
      const int d0 = static_cast<int>(bra.size());
      for (int s = 0; s < d0; ++s)
        for (int t = 0; t < d0; ++t) {
          const cplx c = op_slot == 0 ? (*op)(s, t) : (s == t ? cplx(1) : cplx(0));
          if (c == cplx(0)) continue;
          env.noalias() += c * (bra[s].adjoint() * ket[t]);
        }
      for (std::size_t e = 1; e < chain.size(); ++e)
        env = static_cast<int>(e) == op_slot ? transfer_left_op(env, chain[e], *op)
                                             : transfer_left(env, chain[e]);
      g.block(kb * kr, kk * kr, kr, kr) = env;
    }
  return g;
}

}  // namespace

Window ball_window(int first_site, int radius) {
  if (radius < 0) throw std::invalid_argument("ball_window: radius must be >= 0");
  return Window{first_site - radius, first_site + 1 + radius};
}

PatchSubspace extract_patch_basis(const MpsState& mps, const Window& window, const PatchOptions& options) {
  check_window(window, mps.n_sites);
  const int d = mps.local_dim;
  PatchSubspace sub;
  sub.window = window;
  sub.interior = Window{window.first + 1, window.last - 1};
  sub.local_dim = d;

  MpsState g = mps;
  canonicalize(g, window.first);
  normalize(g);

  // Left cut: Schmidt basis from the SVD of the center tensor.
  SiteTensor& head = g.tensors[window.first];
  const Index dl = head[0].rows(), dr_head = head[0].cols();
  CMatrix wide(dl, dr_head * d);
  for (int s = 0; s < d; ++s) wide.middleCols(s * dr_head, dr_head) = head[s];
  // full U: a center tensor taller than wide leaves zero-weight rows
  Eigen::BDCSVD<CMatrix> left_svd(wide, Eigen::ComputeFullU);
  const CMatrix u_left = left_svd.matrixU();
  RVector s_left = RVector::Zero(dl);
  s_left.head(left_svd.singularValues().size()) = left_svd.singularValues();
  for (auto& s : head) s = u_left.adjoint() * s;

  // Right cut: eigenbasis of the left environment at the cut.
  CMatrix env = CMatrix::Identity(dl, dl);
  for (int i = window.first; i <= window.last; ++i) env = transfer_left(env, g.tensors[i]);
  const auto right_eig = hermitian_eigen(hermitian_part(env), 1e-10);
  const Index dr = env.rows();
  CMatrix v_right(dr, dr);
  RVector w_right(dr);
  for (Index j = 0; j < dr; ++j) {
    v_right.col(j) = right_eig.vectors.col(dr - 1 - j);
    w_right(j) = std::sqrt(std::max(0.0, right_eig.values(dr - 1 - j)));
  }
  for (auto& s : g.tensors[window.last]) s = s * v_right;

  const int full_left = static_cast<int>(dl), full_right = static_cast<int>(dr);
  sub.keep_left = options.keep > 0 ? options.keep : full_left;
  sub.keep_right = options.keep > 0 ? options.keep : full_right;
  if (sub.keep_left > full_left || sub.keep_right > full_right) {
    std::ostringstream os;
    os << "extract_patch_basis: keep " << options.keep << " exceeds the cut bond dimensions (" << full_left
       << ", " << full_right << ")";
    throw std::invalid_argument(os.str());
  }
  sub.left_weights = s_left.head(sub.keep_left);
  sub.right_weights = w_right.head(sub.keep_right);

  for (int i = window.first; i <= window.last; ++i) sub.network.push_back(g.tensors[i]);
  for (auto& s : sub.network.front()) s = CMatrix(s.topRows(sub.keep_left));
  for (auto& s : sub.network.back()) s = CMatrix(s.leftCols(sub.keep_right));

  const Index cols = static_cast<Index>(sub.keep_left) * sub.keep_right;
  sub.gram_route = options.force_gram || sub.window_dim() > kDenseBasisLimit;
  CMatrix psi;
  if (sub.gram_route) {
    sub.gram = gram_with_operator(sub.network, nullptr, 0, 0);
  } else {
    psi = inner_vectors(sub);
    sub.gram = psi.adjoint() * psi;
  }
  sub.gram = hermitian_part(sub.gram);

  RVector inv_norm(cols);
  for (Index a = 0; a < cols; ++a) {
    const double n = std::sqrt(std::max(0.0, sub.gram(a, a).real()));
    inv_norm(a) = n > 1e-150 ? 1.0 / n : 0.0;
  }

  if (!sub.gram_route) {
    const CMatrix scaled = psi * inv_norm.cast<cplx>().asDiagonal();
    const auto dec = svd(scaled);
    Index rank = 0;
    while (rank < dec.s.size() && dec.s(rank) > options.rank_cutoff * dec.s(0)) ++rank;
    sub.q = static_cast<int>(rank);
    sub.basis = dec.u.leftCols(rank);
    const CMatrix v = dec.vh.topRows(rank).adjoint();
    sub.transform = inv_norm.cast<cplx>().asDiagonal() * v *
                    dec.s.head(rank).cwiseInverse().cast<cplx>().asDiagonal();
  } else {
    const CMatrix scaled = inv_norm.cast<cplx>().asDiagonal() * sub.gram * inv_norm.cast<cplx>().asDiagonal();
    const auto eig = hermitian_eigen(hermitian_part(scaled), 1e-10);
    const double top = eig.values.maxCoeff();
    std::vector<Index> kept;
    for (Index j = eig.values.size() - 1; j >= 0; --j)
      if (eig.values(j) > options.gram_cutoff * top) kept.push_back(j);
    sub.q = static_cast<int>(kept.size());
    sub.transform = CMatrix(cols, sub.q);
    for (int j = 0; j < sub.q; ++j)
      sub.transform.col(j) = inv_norm.cast<cplx>().cwiseProduct(eig.vectors.col(kept[j])) /
                             std::sqrt(eig.values(kept[j]));
  }
  if (sub.q == 0) throw std::runtime_error("extract_patch_basis: the patch spans no vectors");
  return sub;
}

CMatrix inner_vectors(const PatchSubspace& sub) {
  if (sub.window_dim() > kDenseVectorLimit) throw std::length_error("inner_vectors: window exceeds 2^20 amplitudes");
  const CMatrix acc = contract_open(sub.network);
  return open_to_columns(acc, sub.keep_left, sub.window_dim());
}

CMatrix project_operator(const PatchSubspace& sub, const CMatrix& op) {
  if (!sub.basis) throw std::length_error("project_operator: window too large for a dense basis");
  if (op.rows() != sub.window_dim() || op.cols() != sub.window_dim())
    throw std::invalid_argument("project_operator: operator does not act on the window");
  const CMatrix& w = *sub.basis;
  const CMatrix p = w.adjoint() * op * w;
  return is_hermitian(op) ? hermitian_part(p) : p;
}

CMatrix project_local(const PatchSubspace& sub, const CMatrix& op, int first_site, int span) {
  const int rel = first_site - sub.window.first;
  if (rel < 0 || first_site + span - 1 > sub.window.last)
    throw std::invalid_argument("project_local: operator support leaves the window");
  if (op.rows() != ipow(sub.local_dim, span) || op.cols() != op.rows())
    throw std::invalid_argument("project_local: operator dimension mismatch");
  CMatrix p;
  if (sub.basis) {
    const CMatrix& w = *sub.basis;
    p = w.adjoint() * apply_local(w, op, rel, span, sub.local_dim, sub.window.size());
  } else {
    const CMatrix g = gram_with_operator(sub.network, &op, rel, span);
    p = sub.transform.adjoint() * g * sub.transform;
  }
  return is_hermitian(op) ? hermitian_part(p) : p;
}

CMatrix projected_density(const PatchSubspace& sub) {
  const CMatrix gt = sub.gram * sub.transform;
  return hermitian_part(gt.adjoint() * gt);
}

CMatrix reduced_density(const MpsState& mps, const Window& window) {
  if (window.first < 0 || window.last >= mps.n_sites || window.size() < 1)
    throw std::invalid_argument("reduced_density: window outside the chain");
  if (ipow(mps.local_dim, window.size()) > kDenseMatrixLimit)
    throw std::length_error("reduced_density: window too large for a dense matrix");
  MpsState g = mps;
  canonicalize(g, window.first);
  normalize(g);
  std::vector<SiteTensor> net(g.tensors.begin() + window.first, g.tensors.begin() + window.last + 1);
  const CMatrix psi = open_to_columns(contract_open(net), net.front()[0].rows(),
                                      ipow(mps.local_dim, window.size()));
  return hermitian_part(psi * psi.adjoint());
}

CMatrix reduced_density(const CVector& state, int n_sites, int local_dim, const Window& window) {
  if (window.first < 0 || window.last >= n_sites || window.size() < 1)
    throw std::invalid_argument("reduced_density: window outside the chain");
  if (state.size() != ipow(local_dim, n_sites)) throw std::invalid_argument("reduced_density: dimension mismatch");
  const Index mid = ipow(local_dim, window.size());
  if (mid > kDenseMatrixLimit) throw std::length_error("reduced_density: window too large for a dense matrix");
  const Index left = ipow(local_dim, window.first);
  const Index right = ipow(local_dim, n_sites - 1 - window.last);
  CMatrix rho = CMatrix::Zero(mid, mid);
  for (Index a = 0; a < left; ++a) {
    Eigen::Map<const RowMat> m(state.data() + a * mid * right, mid, right);
    rho.noalias() += m * m.adjoint();
  }
  return hermitian_part(rho / state.squaredNorm());
}

double support_leakage(const PatchSubspace& sub, const CMatrix& rho) {
  if (!sub.basis) throw std::length_error("support_leakage: window too large for a dense basis");
  const CMatrix& w = *sub.basis;
  return 1.0 - (w.adjoint() * rho * w).trace().real() / rho.trace().real();
}

CVector apply_subspace_operator(const PatchSubspace& sub, const CMatrix& k, const CVector& state, int n_sites) {
  if (!sub.basis) throw std::length_error("apply_subspace_operator: window too large for a dense basis");
  const Index mid = sub.window_dim();
  const Index left = ipow(sub.local_dim, sub.window.first);
  const Index right = ipow(sub.local_dim, n_sites - 1 - sub.window.last);
  if (state.size() != left * mid * right) throw std::invalid_argument("apply_subspace_operator: dimension mismatch");
  const CMatrix& w = *sub.basis;
  CVector out(state.size());
  for (Index a = 0; a < left; ++a) {
    Eigen::Map<const RowMat> m(state.data() + a * mid * right, mid, right);
    Eigen::Map<RowMat> dst(out.data() + a * mid * right, mid, right);
    dst = w * (k * (w.adjoint() * m));
  }
  return out;
}

}  // namespace patchbound
