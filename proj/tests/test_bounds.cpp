#include "patchbound/bounds.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace patchbound;

namespace {

ObservableSpec identity_observable(int first_site, int d) {
  ObservableSpec o;
  o.first_site = first_site;
  o.local_dim = d;
  o.matrix = CMatrix::Identity(d * d, d * d);
  return o;
}

}  // namespace

TEST(Basic, IdentityGivesUnitInterval) {
  const MpsState mps = aklt_valence_bond_state(20);
  PatchOptions opts;
  opts.keep = 2;
  const auto sub = extract_patch_basis(mps, ball_window(9, 3), opts);
  const auto r = basic_bounds(sub, identity_observable(9, 3));
  EXPECT_NEAR(r.k_min, 1.0, 1e-12);
  EXPECT_NEAR(r.k_max, 1.0, 1e-12);
  EXPECT_EQ(r.l, 3);
}

TEST(Basic, BracketsExactIsingValue) {
  const auto m = build_model(ModelKind::TransverseIsing, 10);
  const auto gs = exact_ground(m);
  const MpsState mps = mps_from_dense(gs.state, 10, 2);
  for (auto kind : {ObservableKind::PzPz, ObservableKind::PxPx}) {
    const auto obs = build_observable(kind, 4, 10, 2);
    const double exact = dense_expectation(gs.state, obs.matrix, 4, 2, 10);
    for (int l : {1, 2, 3}) {
      const auto r = basic_bounds(extract_patch_basis(mps, ball_window(4, l)), obs);
      EXPECT_LE(r.k_min, exact + 1e-12);
      EXPECT_GE(r.k_max, exact - 1e-12);
      EXPECT_LE(r.k_min, r.k_max);
    }
  }
}

TEST(Basic, AkltRandomProjectorMagnitudes) {
  const MpsState mps = aklt_valence_bond_state(60);
  PatchOptions opts;
  opts.keep = 2;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto obs = build_observable(ObservableKind::RandomProjector, 29, 60, 3, 2, seed);
    const double oracle = expectation(mps, obs);
    const auto r3 = basic_bounds(extract_patch_basis(mps, ball_window(29, 3), opts), obs);
    const auto r4 = basic_bounds(extract_patch_basis(mps, ball_window(29, 4), opts), obs);
    EXPECT_TRUE(r3.contains(oracle));
    EXPECT_TRUE(r4.contains(oracle));
    EXPECT_LT(r4.half_width(), r3.half_width());
    EXPECT_GE(r4.half_width(), 5e-4);
    EXPECT_LE(r4.half_width(), 8e-3);
  }
}

TEST(DecayProfile, AkltRateMatchesCorrelationLength) {
  const MpsState mps = aklt_valence_bond_state(40);
  const auto obs = build_observable(ObservableKind::RandomProjector, 19, 40, 3, 2, 3);
  const auto prof = eigen_decay_profile(mps, obs, {2, 3, 4, 5, 6, 7, 8}, 2);
  ASSERT_TRUE(prof.fit.ok);
  const double target = std::log(3.0);
  EXPECT_GT(prof.fit.rate, target / 2);
  EXPECT_LT(prof.fit.rate, target * 2);
  for (std::size_t i = 1; i < prof.points.size(); ++i)
    EXPECT_LE(prof.points[i].deviation, prof.points[i - 1].deviation + 1e-12);
  for (const auto& p : prof.points) EXPECT_GT(p.lambda2_min, 0.2);
}

TEST(DecayProfile, IdentityHasNoDeviation) {
  const MpsState mps = aklt_valence_bond_state(30);
  const auto prof = eigen_decay_profile(mps, identity_observable(14, 3), {2, 3, 4}, 2);
  for (const auto& p : prof.points) EXPECT_LE(p.deviation, 1e-12);
  EXPECT_FALSE(prof.fit.ok);
  EXPECT_THROW(eigen_decay_profile(mps, identity_observable(14, 3), {2, 3}, 2), std::invalid_argument);
}

TEST(Agsp, AkltResidualDecaysAndMatchesMarkovSum) {
  const int n = 12;
  const CVector state = to_dense(aklt_valence_bond_state(n));
  const MpsState mps = mps_from_dense(state, n, 3);
  const auto obs = build_observable(ObservableKind::RandomProjector, 5, n, 3, 2, 4);
  std::vector<double> ls, res;
  for (int l = 1; l <= 4; ++l) {
    const auto sub = extract_patch_basis(mps, ball_window(5, l));
    const auto r = agsp_residual(state, n, sub, obs);
    EXPECT_LE(r.residual, 2.0);
    EXPECT_NEAR(r.residual * r.residual, r.markov_sum, 1e-10);
    EXPECT_LE(std::abs(r.leakage), 1e-10);
    ls.push_back(l);
    res.push_back(r.residual);
  }
  EXPECT_TRUE(fit_exponential_decay(ls, res).ok);
  for (std::size_t i = 1; i < res.size(); ++i) EXPECT_LT(res[i], res[i - 1]);

  const auto sub = extract_patch_basis(mps, ball_window(5, 2));
  EXPECT_LE(agsp_residual(state, n, sub, identity_observable(5, 3)).residual, 1e-12);
}

TEST(CommutatorResidual, ExactEigenstatesVanish) {
  const int n = 10;
  const Window w{2, 7};
  for (auto kind : {ModelKind::TransverseIsing, ModelKind::TransverseXY}) {
    const auto m = build_model(kind, n);
    const CMatrix hl = patch_hamiltonian(m, w);
    for (const auto& st : exact_low_spectrum(m, 2)) {
      const CMatrix rho = reduced_density(st.state, n, 2, w);
      EXPECT_LE(commutator_residual(rho, hl, w.size(), 2), 1e-9) << m.name();
    }
  }
}

TEST(CommutatorResidual, AkltCommutesOnWindow) {
  const auto m = build_model(ModelKind::AKLT, 12);
  const MpsState mps = aklt_valence_bond_state(12);
  const Window w{3, 8};
  const CMatrix rho = reduced_density(mps, w);
  const CMatrix hl = patch_hamiltonian(m, w);
  EXPECT_LE((rho * hl - hl * rho).norm(), 1e-12);
  EXPECT_LE(commutator_residual(rho, hl, w.size(), 3), 1e-12);
}

TEST(CommutatorResidual, RandomDensityMatricesDoNot) {
  const auto m = build_model(ModelKind::TransverseIsing, 10);
  const Window w{2, 7};
  const CMatrix hl = patch_hamiltonian(m, w);
  std::mt19937_64 rng(123);
  std::vector<double> vals;
  for (int i = 0; i < 40; ++i) {
    const CMatrix g = random_complex_matrix(64, 64, rng);
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace();
    vals.push_back(commutator_residual(rho, hl, w.size(), 2));
  }
  std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
  EXPECT_GE(vals[vals.size() / 2], 1e-2);
}

TEST(CommutatorResidual, RejectsInconsistentPartition) {
  EXPECT_THROW(commutator_residual(CMatrix::Identity(8, 8), CMatrix::Identity(8, 8), 4, 2), std::invalid_argument);
  EXPECT_THROW(trace_boundary(CMatrix::Identity(4, 4), 2, 2), std::invalid_argument);
}

TEST(TraceBoundary, MatchesKronStructure) {
  std::mt19937_64 rng(2);
  const CMatrix a = random_complex_matrix(2, 2, rng);
  const CMatrix b = random_complex_matrix(8, 8, rng);
  const CMatrix c = random_complex_matrix(2, 2, rng);
  const CMatrix full = kron(kron(a, b), c);
  EXPECT_LE((trace_boundary(full, 5, 2) - a.trace() * c.trace() * b).norm(), 1e-12);
}
