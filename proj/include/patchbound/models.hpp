#pragma once

#include "patchbound/linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace patchbound {

enum class ModelKind { AKLT, TransverseIsing, TransverseXY, RandomFieldXY };

std::string to_string(ModelKind kind);
/// Accepts "aklt", "ising", "xy", "rfxy" (and the enum spellings).
ModelKind parse_model_kind(const std::string& name);

struct ModelParams {
  double h = 1.1;
  double alpha = 0.5;
  std::uint64_t field_seed = 0;
  double field_min = 1.05;
  double field_max = 1.15;
};

/// Inclusive site interval [first, last], 0-based.
struct Window {
  int first = 0;
  int last = -1;
  int size() const { return last - first + 1; }
  bool contains(int site) const { return site >= first && site <= last; }
  bool operator==(const Window&) const = default;
};

/// Nearest-neighbour term acting on sites (site, site + 1).
struct BondTerm {
  int site = 0;
  CMatrix matrix;  // d^2 x d^2
};

struct SpinChainModel {
  ModelKind kind = ModelKind::TransverseIsing;
  int n_sites = 0;
  int local_dim = 2;
  ModelParams params;
  std::vector<double> fields;  // per-site transverse field, empty for AKLT
  std::vector<BondTerm> terms;

  std::string name() const { return to_string(kind); }
  bool frustration_free() const { return kind == ModelKind::AKLT; }
  /// Total Hilbert-space dimension d^N.
  std::int64_t dimension() const { return ipow(local_dim, n_sites); }
};

namespace ops {
CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();
CMatrix spin1_x();
CMatrix spin1_y();
CMatrix spin1_z();
}  // namespace ops

/// Builds H = sum_i h_i with single-site fields split half-and-half onto the
/// adjacent bonds (full weight at the chain ends). `field_seed` in params
/// drives the random transverse fields of RandomFieldXY.
SpinChainModel build_model(ModelKind kind, int n_sites, const ModelParams& params = {});

enum class ObservableKind { PxPx, PzPz, RandomProjector };

std::string to_string(ObservableKind kind);
ObservableKind parse_observable_kind(const std::string& name);

struct ObservableSpec {
  ObservableKind kind = ObservableKind::PzPz;
  int first_site = 0;  // acts on (first_site, first_site + 1)
  int local_dim = 2;
  int rank = 1;
  std::uint64_t seed = 0;
  CMatrix matrix;  // d^2 x d^2 projector
};

/// Two-site projector observable. RandomProjector draws `rank` complex
/// Gaussian vectors in C^(d^2) and orthonormalizes them.
ObservableSpec build_observable(ObservableKind kind, int first_site, int n_sites,
                                int local_dim, int rank = 1, std::uint64_t seed = 0);

/// Largest window Hilbert-space dimension we are willing to represent as a
/// dense vector, and as a dense square matrix.
inline constexpr std::int64_t kDenseVectorLimit = std::int64_t{1} << 20;
inline constexpr std::int64_t kDenseMatrixLimit = std::int64_t{1} << 12;

/// Dense H_L: the sum of the bond terms with both sites inside `window`.
CMatrix patch_hamiltonian(const SpinChainModel& model, const Window& window);

/// Applies H_L (terms inside `window`) to the columns of `states`, which live
/// on the window's Hilbert space.
CMatrix apply_patch_hamiltonian(const SpinChainModel& model, const Window& window,
                                const CMatrix& states);

/// Full-chain H applied to a vector of dimension d^N.
CVector apply_hamiltonian(const SpinChainModel& model, const CVector& state);

struct ExactState {
  double energy = 0.0;
  CVector state;
  double residual = 0.0;
};

/// Ground state by exact diagonalization (d^N <= 2^20).
ExactState exact_ground(const SpinChainModel& model, std::uint64_t seed = 1);

/// The k lowest eigenpairs, ascending.
std::vector<ExactState> exact_low_spectrum(const SpinChainModel& model, int k,
                                           std::uint64_t seed = 1);

/// Dense <psi|O|psi> for a two-site operator on (first_site, first_site+1).
double dense_expectation(const CVector& state, const CMatrix& op, int first_site,
                         int local_dim, int n_sites);

}  // namespace patchbound
