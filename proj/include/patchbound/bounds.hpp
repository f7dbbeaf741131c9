#pragma once

#include "patchbound/models.hpp"
#include "patchbound/mps.hpp"
#include "patchbound/patch.hpp"

#include <optional>
#include <string>
#include <vector>

namespace patchbound {

enum class BoundMethod { Basic, CGO };
std::string to_string(BoundMethod method);

struct BoundResult {
  BoundMethod method = BoundMethod::Basic;
  int l = 0;
  int q = 0;
  double k_min = 0.0;
  double k_max = 0.0;
  int generator_count = 0;        // CGO: max of the upper/lower counts
  int generators_upper = 0;
  int generators_lower = 0;
  std::optional<double> oracle;
  std::uint64_t seed_upper = 0;
  std::uint64_t seed_lower = 0;
  std::vector<std::string> notes;

  double half_width() const { return 0.5 * (k_max - k_min); }
  bool contains(double value, double slack = 0.0) const {
    return value >= k_min - slack && value <= k_max + slack;
  }
};

/// [lambda_min, lambda_max] of the projected observable B_L = W^dag B W.
BoundResult basic_bounds(const CMatrix& b_projected);
BoundResult basic_bounds(const PatchSubspace& sub, const ObservableSpec& observable);

// ---------------------------------------------------------------------------
// Decay studies

struct ExponentialFit {
  double rate = 0.0;    // fitted decay rate (positive when decaying)
  double length = 0.0;  // 1 / rate
  int points_used = 0;
  bool ok = false;
};

/// Least squares of log(y) against x over points with y >= floor.
ExponentialFit fit_exponential_decay(const std::vector<double>& x, const std::vector<double>& y,
                                     double floor = 1e-12);

struct DecayPoint {
  int l = 0;
  int q = 0;
  double deviation = 0.0;   // max_alpha |b_alpha - <B>|
  double lambda2_min = 0.0; // smallest eigenvalue of rho_L on V_L
};

struct DecayProfile {
  double oracle = 0.0;
  std::vector<DecayPoint> points;
  ExponentialFit fit;
};

/// Worst eigenvalue deviation of W^dag B W from <B> for each radius.
DecayProfile eigen_decay_profile(const MpsState& mps, const ObservableSpec& observable,
                                 const std::vector<int>& radii, int keep = 0);

struct AgspResult {
  double residual = 0.0;     // || W B_L W^dag |Omega> - <B> |Omega> ||
  double expectation = 0.0;  // <B>
  double markov_sum = 0.0;   // sum_beta <b_beta|rho_L|b_beta> (b_beta - <B>)^2
  double leakage = 0.0;      // 1 - Tr(W^dag rho_L W)
};

/// Dense residual of B_L acting on a full-chain state.
AgspResult agsp_residual(const CVector& state, int n_sites, const PatchSubspace& sub,
                         const ObservableSpec& observable);

/// || Tr_dL [rho_L, H_L] ||_F with the boundary dL = first and last site of
/// the window (`window_sites` sites of dimension d).
double commutator_residual(const CMatrix& rho, const CMatrix& h_l, int window_sites, int local_dim);

/// Tr over the first and last site of a window operator.
CMatrix trace_boundary(const CMatrix& op, int window_sites, int local_dim);

}  // namespace patchbound
