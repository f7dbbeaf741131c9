#pragma once

#include "patchbound/linalg.hpp"
#include "patchbound/models.hpp"
#include "patchbound/mps.hpp"

#include <optional>
#include <vector>

namespace patchbound {

/// Local subspace V_L spanned by the inner vectors |I_(k,l)> of a patch.
///
/// The patch network holds the window's site tensors after both cut bonds
/// were rotated into their Schmidt bases and truncated, so the first tensor
/// carries the open left index k and the last tensor the open right index l.
/// Column alpha = k * keep_right + l of Psi is |I_(k,l)>; the orthonormal
/// basis is W = Psi * transform.
struct PatchSubspace {
  Window window;
  Window interior;  // L_0: window minus one boundary site at each end
  int local_dim = 2;
  int keep_left = 0;
  int keep_right = 0;
  int q = 0;
  RVector left_weights;   // kept Schmidt values at the left cut, descending
  RVector right_weights;  // kept Schmidt values at the right cut
  std::vector<SiteTensor> network;
  CMatrix gram;       // Psi^dag Psi
  CMatrix transform;  // (keep_left * keep_right) x q
  std::optional<CMatrix> basis;  // W, materialized when the window is small enough
  bool gram_route = false;

  std::int64_t window_dim() const { return ipow(local_dim, window.size()); }
};

struct PatchOptions {
  int keep = 0;                 // per cut; 0 keeps the full bond dimension
  double rank_cutoff = 1e-10;   // singular values of the stacked |I_alpha>
  double gram_cutoff = 1e-12;   // eigenvalues of the normalized Gram matrix
  bool force_gram = false;
};

/// Window d^|L| up to which W is stored densely.
inline constexpr std::int64_t kDenseBasisLimit = std::int64_t{1} << 16;

/// Window [first_site - l, first_site + 1 + l] around a two-site observable.
Window ball_window(int first_site, int radius);

PatchSubspace extract_patch_basis(const MpsState& mps, const Window& window,
                                  const PatchOptions& options = {});

/// Psi (d^|L| x keep_left*keep_right), unnormalized inner vectors.
CMatrix inner_vectors(const PatchSubspace& sub);

/// W^dag O W for a dense operator on the whole window.
CMatrix project_operator(const PatchSubspace& sub, const CMatrix& op);

/// W^dag O W for O acting on `span` consecutive sites starting at the
/// absolute chain site `first_site` (identity elsewhere in the window).
CMatrix project_local(const PatchSubspace& sub, const CMatrix& op, int first_site, int span);

/// W^dag rho W where rho = Psi Psi^dag is the part of the reduced density
/// matrix carried by the kept Schmidt indices. Equals W^dag rho_L W when the
/// cuts are kept at full rank.
CMatrix projected_density(const PatchSubspace& sub);

/// Reduced density matrix on `window`.
CMatrix reduced_density(const MpsState& mps, const Window& window);
CMatrix reduced_density(const CVector& state, int n_sites, int local_dim, const Window& window);

/// 1 - Tr(W^dag rho W): weight of rho outside V_L.
double support_leakage(const PatchSubspace& sub, const CMatrix& rho);

/// Applies W K W^dag on the window sites of a full-chain vector.
CVector apply_subspace_operator(const PatchSubspace& sub, const CMatrix& k, const CVector& state,
                                int n_sites);

}  // namespace patchbound
