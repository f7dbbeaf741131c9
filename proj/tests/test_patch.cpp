#include "patchbound/patch.hpp"

#include <gtest/gtest.h>

using namespace patchbound;

namespace {

struct ExactFixture {
  SpinChainModel model;
  ExactState gs;
  MpsState mps;
};

ExactFixture exact_fixture(ModelKind kind, int n) {
  ExactFixture f;
  f.model = build_model(kind, n);
  f.gs = exact_ground(f.model);
  f.mps = mps_from_dense(f.gs.state, n, f.model.local_dim);
  return f;
}

RVector eigenvalues(const CMatrix& m) { return hermitian_eigen(m, 1e-10).values; }

}  // namespace

TEST(PatchBasis, WindowSizesAndDimension) {
  const auto m = build_model(ModelKind::TransverseIsing, 30);
  SweepConfig cfg;
  const auto gs = dmrg_ground_state(m, cfg);
  PatchOptions opts;
  opts.keep = 6;
  const auto s3 = extract_patch_basis(gs.state, ball_window(14, 3), opts);
  EXPECT_EQ(s3.window.size(), 8);
  EXPECT_EQ(s3.interior.size(), 6);
  EXPECT_EQ(s3.q, 36);
  const auto s4 = extract_patch_basis(gs.state, ball_window(14, 4), opts);
  EXPECT_EQ(s4.window.size(), 10);
  EXPECT_EQ(s4.interior.size(), 8);
  EXPECT_EQ(s4.q, 36);
  const CMatrix& w = *s4.basis;
  EXPECT_LE((w.adjoint() * w - CMatrix::Identity(36, 36)).cwiseAbs().maxCoeff(), 1e-10);
  for (Index i = 1; i < s4.left_weights.size(); ++i) EXPECT_LE(s4.left_weights(i), s4.left_weights(i - 1));
  EXPECT_LE(s4.left_weights.squaredNorm(), 1.0 + 1e-12);
}

TEST(PatchBasis, RejectsBadWindows) {
  const auto f = exact_fixture(ModelKind::TransverseIsing, 8);
  EXPECT_THROW(extract_patch_basis(f.mps, Window{0, 3}), std::invalid_argument);
  EXPECT_THROW(extract_patch_basis(f.mps, Window{2, 7}), std::invalid_argument);
  PatchOptions opts;
  opts.keep = 64;
  EXPECT_THROW(extract_patch_basis(f.mps, Window{2, 5}, opts), std::invalid_argument);
}

TEST(PatchBasis, FullRankReproducesReducedDensity) {
  for (auto kind : {ModelKind::TransverseIsing, ModelKind::TransverseXY}) {
    const auto f = exact_fixture(kind, 12);
    const Window w{3, 8};
    const auto sub = extract_patch_basis(f.mps, w);
    const CMatrix rho = reduced_density(f.gs.state, 12, 2, w);
    const CMatrix p = *sub.basis * sub.basis->adjoint();
    EXPECT_LE((p * rho * p - rho).norm(), 1e-9);
    EXPECT_LE(std::abs(support_leakage(sub, rho)), 1e-10);
    EXPECT_LE((p * p - p).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ProjectOperator, IdentityAndProjectorRange) {
  const auto f = exact_fixture(ModelKind::TransverseXY, 10);
  const auto sub = extract_patch_basis(f.mps, Window{2, 7});
  const CMatrix id = project_operator(sub, CMatrix::Identity(64, 64));
  EXPECT_LE((id - CMatrix::Identity(sub.q, sub.q)).cwiseAbs().maxCoeff(), 1e-12);
  const auto obs = build_observable(ObservableKind::RandomProjector, 4, 10, 2, 1, 5);
  const CMatrix b = project_local(sub, obs.matrix, 4, 2);
  EXPECT_TRUE(is_hermitian(b, 1e-12));
  const RVector ev = eigenvalues(b);
  EXPECT_GE(ev.minCoeff(), -1e-12);
  EXPECT_LE(ev.maxCoeff(), 1.0 + 1e-12);
  EXPECT_THROW(project_local(sub, obs.matrix, 7, 2), std::invalid_argument);
}

TEST(ProjectOperator, CyclicityAtFullRank) {
  const auto f = exact_fixture(ModelKind::TransverseIsing, 10);
  const Window w{2, 7};
  const auto sub = extract_patch_basis(f.mps, w);
  const auto obs = build_observable(ObservableKind::PzPz, 4, 10, 2);
  const double exact = dense_expectation(f.gs.state, obs.matrix, 4, 2, 10);
  const CMatrix rho = reduced_density(f.gs.state, 10, 2, w);
  const CMatrix& wb = *sub.basis;
  const CMatrix bl = project_local(sub, obs.matrix, 4, 2);
  EXPECT_NEAR((rho * wb * bl * wb.adjoint()).trace().real(), exact, 1e-9);
  EXPECT_NEAR((projected_density(sub) * bl).trace().real(), exact, 1e-9);
}

TEST(ReducedDensity, ProductStateAndTrace) {
  MpsState prod;
  prod.n_sites = 8;
  prod.local_dim = 2;
  prod.tensors.assign(8, SiteTensor{CMatrix::Constant(1, 1, 0.6), CMatrix::Constant(1, 1, 0.8)});
  const CMatrix rho = reduced_density(prod, Window{2, 5});
  const RVector ev = eigenvalues(rho);
  EXPECT_NEAR(ev(ev.size() - 1), 1.0, 1e-12);
  EXPECT_LE(std::abs(ev(ev.size() - 2)), 1e-12);

  std::mt19937_64 rng(3);
  const MpsState mps = random_mps(10, 2, 8, rng);
  const Window w{3, 7};
  const CMatrix r1 = reduced_density(mps, w);
  const CMatrix r2 = reduced_density(to_dense(mps), 10, 2, w);
  EXPECT_NEAR(r1.trace().real(), 1.0, 1e-10);
  EXPECT_LE((r1 - r2).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GE(eigenvalues(r1).minCoeff(), -1e-12);
  const auto obs = build_observable(ObservableKind::RandomProjector, 4, 10, 2, 2, 8);
  const CMatrix bw = kron(kron(CMatrix::Identity(2, 2), obs.matrix), CMatrix::Identity(4, 4));
  EXPECT_NEAR((r1 * bw).trace().real(), expectation(mps, obs), 1e-9);
}

TEST(PatchBasis, GramRouteMatchesDense) {
  const MpsState mps = aklt_valence_bond_state(14, 1, 0);
  const Window w = ball_window(6, 2);
  const auto dense = extract_patch_basis(mps, w);
  PatchOptions opts;
  opts.force_gram = true;
  const auto gram = extract_patch_basis(mps, w, opts);
  EXPECT_FALSE(dense.gram_route);
  EXPECT_TRUE(gram.gram_route);
  ASSERT_EQ(dense.q, gram.q);
  const auto obs = build_observable(ObservableKind::RandomProjector, 6, 14, 3, 2, 11);
  const RVector a = eigenvalues(project_local(dense, obs.matrix, 6, 2));
  const RVector b = eigenvalues(project_local(gram, obs.matrix, 6, 2));
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-9);
  const RVector ra = eigenvalues(projected_density(dense));
  const RVector rb = eigenvalues(projected_density(gram));
  EXPECT_LE((ra - rb).cwiseAbs().maxCoeff(), 1e-12);
  const CMatrix id = project_local(gram, CMatrix::Identity(3, 3), 7, 1);
  EXPECT_LE((id - CMatrix::Identity(gram.q, gram.q)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(PatchBasis, AkltWindowsAreFourDimensional) {
  const MpsState mps = aklt_valence_bond_state(40);
  for (int l = 2; l <= 8; ++l) {
    PatchOptions opts;
    opts.keep = 2;
    const auto sub = extract_patch_basis(mps, ball_window(19, l), opts);
    EXPECT_EQ(sub.q, 4) << l;
    EXPECT_EQ(sub.gram_route, ipow(3, 2 * l + 2) > kDenseBasisLimit);
  }
}
