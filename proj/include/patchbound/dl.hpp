#pragma once

#include "patchbound/bounds.hpp"

#include <vector>

namespace patchbound {

/// Projector onto the ground space of one bond term h_i on (site, site + 1).
struct BondProjector {
  int site = 0;
  CMatrix matrix;  // d^2 x d^2
};

/// Layer g holds the projectors of bonds with site % 2 == g; projectors in a
/// layer have disjoint supports and commute. DL = Pi_0 Pi_1 ... Pi_{g-1}.
struct LayeredProjectors {
  int n_sites = 0;
  int local_dim = 2;
  std::vector<std::vector<BondProjector>> layers;
};

/// Kernel projectors of every (shifted) bond term, split into even and odd
/// layers. Throws std::invalid_argument for a model that is not
/// frustration-free.
LayeredProjectors build_layers(const SpinChainModel& model, double cutoff = 1e-10);

CVector apply_layer(const LayeredProjectors& layers, int layer, const CVector& state);

/// DL^power |state>, applying the last layer first.
CVector apply_dl(const LayeredProjectors& layers, const CVector& state, int power = 1);
CVector apply_dl_adjoint(const LayeredProjectors& layers, const CVector& state, int power = 1);

/// Orthonormal basis of the zero-energy space. For the open AKLT chain this
/// is spanned by the four valence-bond states with free edge spins.
std::vector<CVector> frustration_free_ground_space(const SpinChainModel& model);

struct DlDecay {
  std::vector<double> norms;  // ||DL^l Q|| for l = 0..l_max, Q = 1 - P_ground
  double c = 0.0;             // ||DL Q||^2
  ExponentialFit fit;         // norms against l, l >= 1
  bool degenerate = false;    // ground space of dimension > 1
};

DlDecay dl_contraction_rate(const LayeredProjectors& layers, const std::vector<CVector>& ground, int l_max);

/// Largest l' for which P_V DL^l' B|Omega> = P_V B|Omega> is guaranteed for B
/// on `span` sites from `first_site`: each layer widens the causal cone of B
/// by at most one site per side, and 2 l' layers must stay inside the window.
int lightcone_depth(const Window& window, int first_site, int span = 2);

struct LightconeCheck {
  double residual = 0.0;  // ||P_V B|Omega> - P_V DL^l' B|Omega>||
  int l_prime = 0;
  int depth_limit = 0;
  bool inside_cone = true;
};

/// `omega` is the full-chain state, `op` acts on (first_site, first_site + 1).
LightconeCheck lightcone_identity_check(const LayeredProjectors& layers, const PatchSubspace& sub,
                                        const CVector& omega, const CMatrix& op, int first_site,
                                        int l_prime);

struct AgspDlComparison {
  int l = 0;
  int l_prime = 0;
  double residual = 0.0;         // ||B_L|Omega> - <B>|Omega>||
  double complement_norm = 0.0;  // ||DL^l' Q||
  double leaked = 0.0;           // ||Q B|Omega>||
  double degeneracy = 0.0;       // ||(P_ground - |Omega><Omega|) B|Omega>||
  bool holds = false;            // residual <= complement_norm * leaked + degeneracy + 1e-9
};

/// The residual bound obtained by pulling DL^l' through P_V at the cone depth.
AgspDlComparison agsp_dl_comparison(const LayeredProjectors& layers, const std::vector<CVector>& ground,
                                    const MpsState& mps, const PatchSubspace& sub,
                                    const ObservableSpec& observable);

}  // namespace patchbound
