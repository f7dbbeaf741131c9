#include "patchbound/mps.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace patchbound;

namespace {

double dense_energy(const SpinChainModel& m, const CVector& v) {
  return v.dot(apply_hamiltonian(m, v)).real() / v.squaredNorm();
}

}  // namespace

TEST(Canonical, RandomMpsIsometries) {
  std::mt19937_64 rng(4);
  MpsState mps = random_mps(9, 2, 7, rng);
  EXPECT_EQ(mps.bond_dims().front(), 1);
  EXPECT_EQ(mps.bond_dims().back(), 1);
  EXPECT_LE(canonical_residual(mps), 1e-10);
  EXPECT_NEAR(squared_norm(mps), 1.0, 1e-10);
  const CVector before = to_dense(mps);
  for (int c : {4, 8, 0, 3}) {
    canonicalize(mps, c);
    EXPECT_LE(canonical_residual(mps), 1e-10);
    EXPECT_LE((to_dense(mps) - before).norm(), 1e-10);
  }
}

TEST(Canonical, DenseRoundTrip) {
  std::mt19937_64 rng(8);
  CVector v(ipow(3, 6));
  for (Index i = 0; i < v.size(); ++i) v(i) = complex_normal(rng);
  v.normalize();
  const MpsState mps = mps_from_dense(v, 6, 3);
  EXPECT_LE(canonical_residual(mps), 1e-10);
  EXPECT_LE((to_dense(mps) - v).norm(), 1e-10);
}

TEST(Mpo, ExpectationMatchesDense) {
  std::mt19937_64 rng(12);
  ModelParams p;
  p.field_seed = 3;
  for (auto kind : {ModelKind::AKLT, ModelKind::TransverseIsing, ModelKind::TransverseXY,
                    ModelKind::RandomFieldXY}) {
    const auto m = build_model(kind, 6, p);
    const MpsState mps = random_mps(6, m.local_dim, 5, rng);
    const CVector v = to_dense(mps);
    EXPECT_NEAR(mpo_expectation(mps, build_mpo(m)), dense_energy(m, v), 1e-11) << m.name();
  }
}

TEST(Dmrg, IsingMatchesExact) {
  const auto m = build_model(ModelKind::TransverseIsing, 10);
  SweepConfig cfg;
  cfg.bond_dim = 20;
  const auto res = dmrg_ground_state(m, cfg);
  const auto exact = exact_ground(m);
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.energy, exact.energy, 1e-8);
  EXPECT_GE(res.energy, exact.energy - 1e-10);
  EXPECT_LE(canonical_residual(res.state), 1e-10);
  EXPECT_NEAR(squared_norm(res.state), 1.0, 1e-10);
  EXPECT_EQ(res.state.center, 0);
  for (std::size_t i = 1; i < res.sweep_energies.size(); ++i)
    EXPECT_LE(res.sweep_energies[i], res.sweep_energies[i - 1] + 1e-12);
}

TEST(Dmrg, FrustratedModelsMatchExactAtTwelve) {
  ModelParams p;
  p.field_seed = 5;
  for (auto kind : {ModelKind::TransverseXY, ModelKind::RandomFieldXY}) {
    const auto m = build_model(kind, 12, p);
    SweepConfig cfg;
    const auto res = dmrg_ground_state(m, cfg);
    EXPECT_NEAR(res.energy, exact_ground(m).energy, 1e-8) << m.name();
  }
}

TEST(Dmrg, AkltReachesZero) {
  const auto m = build_model(ModelKind::AKLT, 20);
  SweepConfig cfg;
  cfg.bond_dim = 4;
  const auto res = dmrg_ground_state(m, cfg);
  EXPECT_LE(res.energy, 1e-9);
  EXPECT_LE(mpo_expectation(res.state, build_mpo(m)), 1e-9);
}

TEST(Observables, MatchDenseContraction) {
  std::mt19937_64 rng(21);
  for (int n : {6, 9, 12}) {
    const MpsState mps = random_mps(n, 2, 6, rng);
    const CVector v = to_dense(mps);
    for (int site : {0, n / 2, n - 2}) {
      const auto obs = build_observable(ObservableKind::RandomProjector, site, n, 2, 1, 100 + site);
      EXPECT_NEAR(expectation(mps, obs), dense_expectation(v, obs.matrix, site, 2, n), 1e-10);
    }
    EXPECT_NEAR(expectation_local(mps, CMatrix::Identity(4, 4), 1, 2).real(), 1.0, 1e-12);
  }
}

TEST(Observables, HermitianExpectationIsReal) {
  std::mt19937_64 rng(22);
  const MpsState mps = random_mps(8, 3, 6, rng);
  const auto obs = build_observable(ObservableKind::RandomProjector, 3, 8, 3, 2, 9);
  EXPECT_LE(std::abs(expectation_local(mps, obs.matrix, 3, 2).imag()), 1e-10);
  EXPECT_THROW(expectation_local(mps, obs.matrix, 7, 2), std::invalid_argument);
}

TEST(Schmidt, ProductStateAndAklt) {
  MpsState prod;
  prod.n_sites = 6;
  prod.local_dim = 2;
  SiteTensor up{CMatrix::Constant(1, 1, 0.6), CMatrix::Constant(1, 1, cplx(0, 0.8))};
  prod.tensors.assign(6, up);
  prod.center = -1;
  const auto sp = schmidt_spectrum(prod, 3);
  ASSERT_EQ(sp.weights.size(), 1);
  EXPECT_NEAR(sp.weights(0), 1.0, 1e-12);

  const MpsState aklt = aklt_valence_bond_state(30);
  EXPECT_LE(std::abs(mpo_expectation(aklt, build_mpo(build_model(ModelKind::AKLT, 30)))), 1e-12);
  const auto mid = schmidt_spectrum(aklt, 15);
  ASSERT_EQ(mid.weights.size(), 2);
  EXPECT_NEAR(mid.weights(0), 1.0 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(mid.weights(1), 1.0 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(mid.weights.squaredNorm(), 1.0, 1e-10);
}

TEST(AkltState, AllEdgeChoicesAreGroundStates) {
  const auto mpo = build_mpo(build_model(ModelKind::AKLT, 9));
  for (int l = 0; l < 2; ++l)
    for (int r = 0; r < 2; ++r) {
      const MpsState s = aklt_valence_bond_state(9, l, r);
      EXPECT_LE(std::abs(mpo_expectation(s, mpo)), 1e-12);
      EXPECT_LE(canonical_residual(s), 1e-10);
    }
}

TEST(Correlation, AkltLength) {
  const auto fit = correlation_length(aklt_valence_bond_state(60), ops::spin1_z());
  ASSERT_TRUE(fit.reliable);
  EXPECT_GE(fit.points_used, 3);
  EXPECT_NEAR(fit.xi, 1.0 / std::log(3.0), 0.01);
}

TEST(Correlation, ProductStateUnreliable) {
  MpsState prod;
  prod.n_sites = 20;
  prod.local_dim = 2;
  prod.tensors.assign(20, SiteTensor{CMatrix::Constant(1, 1, 1.0), CMatrix::Zero(1, 1)});
  EXPECT_FALSE(correlation_length(prod, ops::pauli_x()).reliable);
}

TEST(RandomGenerator, AntiHermitianAndNormalized) {
  std::mt19937_64 rng(31);
  RandomMpoConfig cfg;
  for (int n : {1, 3, 6}) {
    const CMatrix a = random_antihermitian_operator(n, 2, cfg, rng);
    EXPECT_EQ(a.rows(), ipow(2, n));
    EXPECT_LE((a + a.adjoint()).cwiseAbs().maxCoeff(), 1e-12 * a.cwiseAbs().maxCoeff());
    EXPECT_NEAR(a.norm(), 1.0, 1e-12);
  }
  std::mt19937_64 r1(5), r2(5);
  EXPECT_EQ(random_antihermitian_operator(4, 3, cfg, r1), random_antihermitian_operator(4, 3, cfg, r2));
}

TEST(RandomGenerator, CommutatorVanishesOnEigenstates) {
  const auto m = build_model(ModelKind::TransverseXY, 10);
  const auto low = exact_low_spectrum(m, 2);
  std::mt19937_64 rng(77);
  const CMatrix a = random_antihermitian_operator(6, 2, RandomMpoConfig{}, rng);
  for (const auto& st : low) {
    const CVector av = apply_local(st.state, a, 2, 6, 2, 10);
    const CVector hv = apply_hamiltonian(m, st.state);
    const CVector ahv = apply_local(hv, a, 2, 6, 2, 10);
    const cplx comm = st.state.dot(apply_hamiltonian(m, av)) - st.state.dot(ahv);
    EXPECT_LE(std::abs(comm), 1e-9);
  }
}
