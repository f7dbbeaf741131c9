#pragma once

#include "patchbound/cgo.hpp"
#include "patchbound/io.hpp"

#include <string>
#include <vector>

namespace patchbound {

struct SystemConfig {
  ModelKind kind = ModelKind::TransverseIsing;
  int n_sites = 100;
  ModelParams params;
  SweepConfig sweep;
  int keep = 6;  // kept Schmidt vectors per cut when building V_L (0 = all)
};

/// Systems A-D at N sites: AKLT, transverse Ising, transverse XY and XY with
/// random fields (field seed 1). AKLT keeps its exact bond dimension 2.
SystemConfig reference_system(char name, int n_sites = 100);

struct PreparedSystem {
  SystemConfig config;
  SpinChainModel model;
  MpsState state;
  double energy = 0.0;
  int sweeps = 0;
  bool converged = true;
  double seconds = 0.0;
  std::string method;  // "dmrg" or "valence_bond"
};

/// DMRG ground state; AKLT uses the analytic valence-bond state with both
/// edge indices 0, one of its four zero-energy states.
PreparedSystem prepare_system(const SystemConfig& config);

struct CellResult {
  BoundResult result;
  std::vector<TraceStep> trace;  // CGO only
  std::string stop_reason;
  int accepted_step = 0;         // CGO only
  double seconds = 0.0;
};

/// Basic or CGO bound for `observable` on the ball of radius l, with the
/// MPS expectation value recorded as oracle.
CellResult run_cell(const PreparedSystem& system, const ObservableSpec& observable, int l, BoundMethod method,
                    const CgoConfig& cgo = {});

nlohmann::json system_to_json(const PreparedSystem& system);

// ---------------------------------------------------------------------------
// Verification suites

struct Check {
  std::string suite;
  std::string name;
  bool passed = false;
  nlohmann::json measured;
};

struct VerifyOptions {
  bool quick = false;
  int sdp_instances = 200;
  int rigor_cases = 50;
  std::uint64_t seed = 1;
};

/// decay, agsp, commutator, dl, sdp, rigor
std::vector<std::string> suite_names();
std::vector<Check> run_suite(const std::string& suite, const VerifyOptions& options = {});

/// Generator count at the accepted step, and whether every accepted step
/// tightens both bounds up to the wiggle tolerance.
struct TraceShape {
  int generators_at_stop = 0;  // max(m_upper, m_lower) at the accepted step
  bool monotone_within_wiggle = true;
  double worst_relative_worsening = 0.0;  // max worsening / current width over accepted steps
};
TraceShape trace_shape(const std::vector<TraceStep>& trace, int accepted_step, double wiggle_fraction);

}  // namespace patchbound
