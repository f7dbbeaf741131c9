#pragma once

#include "patchbound/bounds.hpp"
#include "patchbound/sdp.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace patchbound {

/// Projected commutators G_i = W^dag [H_L, A_i] W with A_i anti-Hermitian on
/// the window interior, each scaled to unit Frobenius norm.
struct GeneratorSet {
  std::vector<CMatrix> g;
  std::vector<double> raw_norms;  // ||G_i||_F before scaling, kept generators only
  std::vector<double> error;      // bound on |Tr(rho G_i)| for a consistent rho: roundoff plus consistency_tol
  int requested = 0;
  int discarded = 0;              // below the zero-norm threshold
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(g.size()); }
  GeneratorSet prefix(int m) const;
};

struct GeneratorConfig {
  RandomMpoConfig mpo;
  double zero_norm = 1e-10;
  double max_zero_fraction = 0.5;
  // Bound on |Tr(rho_L [H_L, A])| over unit-Frobenius A for the target state;
  // an approximate eigenvector with residual ||(H - E) psi|| = r has 2 r.
  double consistency_tol = 0.0;
  // Roundoff in G_i: worst case grows like n u, the default probabilistic
  // model like sqrt(n) u (n = window dimension of the inner products).
  bool worst_case_roundoff = false;
};

/// Thrown when too many generators vanish, as for frustration-free input.
struct DegenerateGenerators : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Seeded stream of generators over a fixed subspace and H_L.
class GeneratorSampler {
 public:
  GeneratorSampler(const PatchSubspace& sub, const SpinChainModel& model, std::uint64_t seed,
                   GeneratorConfig config = {});

  /// Appends `count` draws to `set` (zero-norm ones counted as discarded).
  /// Throws DegenerateGenerators when the discarded share exceeds the limit.
  void draw(int count, GeneratorSet& set);

  /// ||H_L W||_F; zero when V_L lies in the kernel of H_L.
  double hw_norm() const { return hw_norm_; }

 private:
  const PatchSubspace& sub_;
  CMatrix hw_;  // H_L W
  double hw_norm_ = 0.0;
  std::mt19937_64 rng_;
  std::uint64_t seed_;
  GeneratorConfig config_;
};

GeneratorSet build_generators(const PatchSubspace& sub, const SpinChainModel& model, int count,
                              std::uint64_t seed, const GeneratorConfig& config = {});

/// G for a single anti-Hermitian A on the interior, unnormalized.
CMatrix projected_commutator(const PatchSubspace& sub, const CMatrix& hw, const CMatrix& a);

enum class BoundDirection { Upper, Lower };

struct CgoSolution {
  BoundDirection direction = BoundDirection::Upper;
  double bound = 0.0;       // certified: lambda(B_L + t sum c_i G_i) widened by margin
  double margin = 0.0;      // t sum |c_i| error_i plus eigenvalue roundoff
  double scale = 1.0;       // t in [0, 1] applied to the solver coefficients
  double sdp_value = 0.0;   // solver optimum
  RVector coefficients;
  CMatrix rho;              // dual matrix, unit trace
  SdpStatus status = SdpStatus::Optimal;
  int generators = 0;
  int iterations = 0;
  std::string message;
};

/// Upper: min_c lambda_max(B_L + sum c_i G_i); Lower: max_c lambda_min(...).
/// The reported bound adds sum |c_i| error_i and the eigenvalue roundoff, then
/// shrinks c by the scale t in [0, 1] that minimizes this convex total.
/// An empty `error` means exact generators.
CgoSolution cgo_bound(const CMatrix& b_projected, const std::vector<CMatrix>& generators,
                      BoundDirection direction, const SdpOptions& options = {},
                      const std::vector<double>& error = {});
CgoSolution cgo_bound(const CMatrix& b_projected, const GeneratorSet& set, BoundDirection direction,
                      const SdpOptions& options = {});

struct CgoConfig {
  int batch = 20;
  int max_generators = 1000;
  double wiggle_fraction = 0.01;
  std::uint64_t seed_upper = 1;
  std::uint64_t seed_lower = 2;
  GeneratorConfig generators;
  SdpOptions sdp;
};

struct TraceStep {
  int step = 0;
  int m_upper = 0;
  int m_lower = 0;
  double upper = 0.0;
  double lower = 0.0;
  double gap = 0.0;  // upper - lower
  std::string stop_reason;  // empty while running
};

struct CgoRun {
  BoundResult result;
  std::vector<TraceStep> trace;
  std::string stop_reason;
  CgoSolution upper;  // solutions at the accepted step
  CgoSolution lower;
  int accepted_step = 0;
};

/// Grows independent upper/lower generator streams by `batch` per step and
/// stops on: crossing bounds, a bound worsening by more than
/// wiggle_fraction of the current width, a solver failure (all three keep
/// the previous step), or the generator limit. Frustration-free input falls
/// back to the basic interval with a note.
CgoRun cgo_incremental(const PatchSubspace& sub, const ObservableSpec& observable,
                       const SpinChainModel& model, const CgoConfig& config = {});

std::string trace_csv(const std::vector<TraceStep>& trace);

struct DualReport {
  double psd_violation = 0.0;       // max(0, -lambda_min(rho))
  double trace_deviation = 0.0;     // |Tr rho - 1|
  double max_constraint = 0.0;      // max_i |Tr(rho G_i)|
  double objective = 0.0;           // Tr(rho B_L)
  std::optional<double> oracle_distance;  // trace distance to W^dag rho_L W
};

DualReport dual_feasibility_report(const CMatrix& rho, const std::vector<CMatrix>& generators,
                                   const CMatrix& b_projected, const CMatrix* oracle_rho = nullptr);

}  // namespace patchbound
