#pragma once

#include "patchbound/linalg.hpp"
#include "patchbound/models.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace patchbound {

/// One MPS site: `d` slices, each (left bond) x (right bond).
using SiteTensor = std::vector<CMatrix>;

struct MpsState {
  int n_sites = 0;
  int local_dim = 2;
  std::vector<SiteTensor> tensors;
  int center = -1;  // -1 when no canonical form is asserted
  std::uint64_t model_hash = 0;

  int left_dim(int site) const { return static_cast<int>(tensors[site][0].rows()); }
  int right_dim(int site) const { return static_cast<int>(tensors[site][0].cols()); }
  /// N + 1 bond dimensions, including the trivial boundary bonds.
  std::vector<int> bond_dims() const;
  int max_bond_dim() const;
};

/// Random normalized MPS with bond dims min(D, d^b, d^(N-b)), right-canonical
/// with center 0.
MpsState random_mps(int n_sites, int local_dim, int bond_dim, std::mt19937_64& rng);

/// Mixed canonical form: sites < center left-isometric, sites > center
/// right-isometric. The norm is left on the center tensor.
void canonicalize(MpsState& mps, int center);
void normalize(MpsState& mps);

/// <psi|psi> by full contraction (no gauge assumed).
double squared_norm(const MpsState& mps);

/// Left/right isometry residuals: max over sites of ||sum A^dag A - 1|| or
/// ||sum A A^dag - 1||, according to the stated center.
double canonical_residual(const MpsState& mps);

/// Environment transfers; environments are (bra bond) x (ket bond) matrices.
/// Left: E' = sum_s A_s^dag E A_s.  With an operator: sum_st op(s,t) A_s^dag E A_t.
/// Right: F = sum_s conj(A_s) F' A_s^T.
CMatrix transfer_left(const CMatrix& env, const SiteTensor& a);
CMatrix transfer_left_op(const CMatrix& env, const SiteTensor& a, const CMatrix& op);
CMatrix transfer_right(const CMatrix& env, const SiteTensor& a);

/// Merges two neighbouring site tensors into one with local index s1 * d + s2.
SiteTensor merge_sites(const SiteTensor& a, const SiteTensor& b);

CVector to_dense(const MpsState& mps);
/// Successive SVDs; singular values below rel_cutoff * s_max are dropped.
MpsState mps_from_dense(const CVector& state, int n_sites, int local_dim,
                        double rel_cutoff = 1e-12);

/// Exact AKLT valence-bond state (bond dimension 2). The edge indices in
/// {0, 1} pick one of the four open-chain ground states.
MpsState aklt_valence_bond_state(int n_sites, int left_edge = 0, int right_edge = 0);

// ---------------------------------------------------------------------------
// Matrix product operators

struct MpoEntry {
  int in = 0;
  int out = 0;
  CMatrix op;  // d x d, rows = bra index
};

struct MpoSite {
  int left_dim = 1;
  int right_dim = 1;
  std::vector<MpoEntry> entries;
};

using Mpo = std::vector<MpoSite>;

/// Exact MPO of sum_i h_i, built from the operator-Schmidt decomposition of
/// every bond term.
Mpo build_mpo(const SpinChainModel& model);
double mpo_expectation(const MpsState& mps, const Mpo& mpo);

// ---------------------------------------------------------------------------
// DMRG

struct SweepConfig {
  int bond_dim = 20;
  int min_sweeps = 2;
  int max_sweeps = 50;
  double energy_tol = 1e-10;
  double svd_cutoff = 1e-12;  // relative to the largest singular value
  int lanczos_krylov = 30;
  std::uint64_t seed = 1;
};

struct DmrgResult {
  MpsState state;
  double energy = 0.0;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> sweep_energies;
  double max_discarded_weight = 0.0;
};

/// Two-site DMRG. The returned state is normalized with canonical center 0.
DmrgResult dmrg_ground_state(const SpinChainModel& model, const SweepConfig& config);

// ---------------------------------------------------------------------------
// Observables

/// <psi|O|psi>/<psi|psi> for an operator on `span` consecutive sites.
cplx expectation_local(const MpsState& mps, const CMatrix& op, int first_site, int span);
double expectation(const MpsState& mps, const ObservableSpec& observable);

struct SchmidtSpectrum {
  int bond = 0;  // bond b sits between sites b-1 and b
  RVector weights;  // descending, sum of squares = 1
};

SchmidtSpectrum schmidt_spectrum(const MpsState& mps, int bond);

struct CorrelationFit {
  double xi = 0.0;
  bool reliable = false;
  int reference_site = 0;
  std::vector<double> distances;
  std::vector<double> correlator;  // |<O_i O_{i+r}> - <O_i><O_{i+r}>|
  int points_used = 0;
};

/// Fits |C(r)| ~ exp(-r/xi) over the r where |C(r)| lies in [floor, ceiling].
CorrelationFit correlation_length(const MpsState& mps, const CMatrix& probe,
                                  double floor = 1e-10, double ceiling = 1e-2);

// ---------------------------------------------------------------------------
// Random generators

struct RandomMpoConfig {
  int bond_dim = 20;
  std::string distribution = "complex-standard-normal";
};

/// Dense anti-Hermitian A = (M - M^dag)/2 on `n_sites` sites where M is a
/// random MPO with Gaussian cores. Interior bonds are capped at the largest
/// rank a cut can carry, min(D, d^(2k), d^(2(n-k))). Scaled to unit
/// Frobenius norm.
CMatrix random_antihermitian_operator(int n_sites, int local_dim, const RandomMpoConfig& config,
                                      std::mt19937_64& rng);

}  // namespace patchbound
