#include "patchbound/experiments.hpp"

#include "patchbound/dl.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace patchbound {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

Check make_check(const std::string& suite, const std::string& name, bool passed, json measured) {
  return Check{suite, name, passed, std::move(measured)};
}

// AKLT correlation length 1 / ln 3
constexpr double kAkltXi = 0.9102392266268373;

}  // namespace

SystemConfig reference_system(char name, int n_sites) {
  SystemConfig c;
  c.n_sites = n_sites;
  switch (name) {
    case 'A':
      c.kind = ModelKind::AKLT;
      c.keep = 2;
      break;
    case 'B': c.kind = ModelKind::TransverseIsing; break;
    case 'C': c.kind = ModelKind::TransverseXY; break;
    case 'D':
      c.kind = ModelKind::RandomFieldXY;
      c.params.field_seed = 1;
      break;
    default: throw std::invalid_argument(std::string("unknown system '") + name + "'");
  }
  return c;
}

PreparedSystem prepare_system(const SystemConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  PreparedSystem s;
  s.config = config;
  s.model = build_model(config.kind, config.n_sites, config.params);
  if (config.kind == ModelKind::AKLT) {
    s.state = aklt_valence_bond_state(config.n_sites);
    s.energy = mpo_expectation(s.state, build_mpo(s.model));
    s.method = "valence_bond";
  } else {
    const DmrgResult r = dmrg_ground_state(s.model, config.sweep);
    s.state = r.state;
    s.energy = r.energy;
    s.sweeps = r.sweeps;
    s.converged = r.converged;
    s.method = "dmrg";
  }
  s.state.model_hash = model_hash(s.model);
  s.seconds = seconds_since(start);
  return s;
}

CellResult run_cell(const PreparedSystem& system, const ObservableSpec& observable, int l, BoundMethod method,
                    const CgoConfig& cgo) {
  const auto start = std::chrono::steady_clock::now();
  PatchOptions opts;
  opts.keep = system.config.keep;
  const PatchSubspace sub = extract_patch_basis(system.state, ball_window(observable.first_site, l), opts);
  CellResult out;
  if (method == BoundMethod::Basic) {
    out.result = basic_bounds(sub, observable);
  } else {
    CgoRun run = cgo_incremental(sub, observable, system.model, cgo);
    out.result = std::move(run.result);
    out.trace = std::move(run.trace);
    out.stop_reason = run.stop_reason;
    out.accepted_step = run.accepted_step;
  }
  out.result.l = l;
  out.result.q = sub.q;
  out.result.oracle = expectation(system.state, observable);
  out.seconds = seconds_since(start);
  return out;
}

json system_to_json(const PreparedSystem& s) {
  return json{{"model", model_to_json(s.model)},
              {"ground_method", s.method},
              {"energy", s.energy},
              {"bond_dim", s.config.sweep.bond_dim},
              {"dmrg_seed", s.config.sweep.seed},
              {"sweeps", s.sweeps},
              {"converged", s.converged},
              {"keep", s.config.keep}};
}

TraceShape trace_shape(const std::vector<TraceStep>& trace, int accepted_step, double wiggle_fraction) {
  TraceShape shape;
  if (trace.empty()) return shape;
  const TraceStep& acc = trace.at(accepted_step);
  shape.generators_at_stop = std::max(acc.m_upper, acc.m_lower);
  for (int k = 1; k <= accepted_step; ++k) {
    const double width = trace[k].gap;
    const double worse = std::max(trace[k].upper - trace[k - 1].upper, trace[k - 1].lower - trace[k].lower);
    if (width > 0 && worse > 0) shape.worst_relative_worsening = std::max(shape.worst_relative_worsening, worse / width);
    if (width < 0 || worse > wiggle_fraction * width) shape.monotone_within_wiggle = false;
  }
  return shape;
}

// ---------------------------------------------------------------------------
// Suites

namespace {

std::vector<Check> suite_decay(const VerifyOptions&) {
  const int n = 40;
  const MpsState mps = aklt_valence_bond_state(n);
  const auto obs = build_observable(ObservableKind::RandomProjector, 19, n, 3, 2, 3);
  const auto prof = eigen_decay_profile(mps, obs, {2, 3, 4, 5, 6, 7, 8}, 2);
  json pts = json::array();
  for (const auto& p : prof.points) pts.push_back({{"l", p.l}, {"deviation", p.deviation}, {"lambda2_min", p.lambda2_min}});
  const double target = 1.0 / kAkltXi;
  const bool ok = prof.fit.ok && prof.fit.rate > 0 && prof.fit.rate >= target / 2 && prof.fit.rate <= target * 2;
  return {make_check("decay", "aklt_eigen_deviation_rate", ok,
                     {{"rate", prof.fit.rate}, {"xi_fit", prof.fit.length}, {"target_rate", target}, {"points", pts}})};
}

std::vector<Check> suite_agsp(const VerifyOptions& o) {
  const int n = o.quick ? 10 : 12;
  const int l_max = o.quick ? 3 : 4;
  const int site = n / 2 - 1;
  const CVector state = to_dense(aklt_valence_bond_state(n));
  const MpsState mps = mps_from_dense(state, n, 3);
  const auto obs = build_observable(ObservableKind::RandomProjector, site, n, 3, 2, 4);
  std::vector<double> ls, res;
  for (int l = 1; l <= l_max; ++l) {
    const auto sub = extract_patch_basis(mps, ball_window(site, l));
    ls.push_back(l);
    res.push_back(agsp_residual(state, n, sub, obs).residual);
  }
  const auto fit = fit_exponential_decay(ls, res);
  const bool bounded = std::all_of(res.begin(), res.end(), [](double r) { return r <= 2.0; });
  return {make_check("agsp", "aklt_residual_decay", fit.ok && fit.rate > 0 && bounded,
                     {{"n_sites", n}, {"l", ls}, {"residual", res}, {"rate", fit.rate}})};
}

std::vector<Check> suite_commutator(const VerifyOptions& o) {
  std::vector<Check> out;
  const int n = 10;
  const Window w{2, 7};
  for (auto kind : {ModelKind::TransverseIsing, ModelKind::TransverseXY}) {
    const auto m = build_model(kind, n);
    const CMatrix hl = patch_hamiltonian(m, w);
    std::vector<double> vals;
    for (const auto& st : exact_low_spectrum(m, 2))
      vals.push_back(commutator_residual(reduced_density(st.state, n, 2, w), hl, w.size(), 2));
    const bool ok = std::all_of(vals.begin(), vals.end(), [](double v) { return v <= 1e-9; });
    out.push_back(make_check("commutator", "eigenstates_" + m.name(), ok, {{"ground", vals[0]}, {"first_excited", vals[1]}}));
  }
  const auto m = build_model(ModelKind::TransverseIsing, n);
  const CMatrix hl = patch_hamiltonian(m, w);
  std::mt19937_64 rng(o.seed);
  std::vector<double> vals;
  const int samples = o.quick ? 40 : 100;
  for (int i = 0; i < samples; ++i) {
    const CMatrix g = random_complex_matrix(64, 64, rng);
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace();
    vals.push_back(commutator_residual(rho, hl, w.size(), 2));
  }
  const double med = median(vals);
  out.push_back(make_check("commutator", "random_density_matrices", med >= 1e-2,
                           {{"samples", samples}, {"median", med}, {"min", *std::min_element(vals.begin(), vals.end())}}));
  return out;
}

std::vector<Check> suite_dl(const VerifyOptions&) {
  std::vector<Check> out;
  {
    const auto model = build_model(ModelKind::AKLT, 8);
    const auto layers = build_layers(model);
    const auto ground = frustration_free_ground_space(model);
    double fixed = 0.0;
    for (const auto& g : ground) fixed = std::max(fixed, (apply_dl(layers, g) - g).norm());
    out.push_back(make_check("dl", "fixes_ground_space", fixed <= 1e-10, {{"max_deviation", fixed}, {"ground_dim", ground.size()}}));
    const auto decay = dl_contraction_rate(layers, ground, 6);
    bool monotone = true;
    for (std::size_t l = 1; l < decay.norms.size(); ++l) monotone = monotone && decay.norms[l] <= decay.norms[l - 1] + 1e-10;
    const bool ok = monotone && decay.c < 1.0 && decay.fit.ok && decay.fit.rate > 0;
    out.push_back(make_check("dl", "complement_norm_decay", ok,
                             {{"norms", decay.norms}, {"c", decay.c}, {"rate", decay.fit.rate},
                              {"per_step_factor", std::exp(-decay.fit.rate)}, {"degenerate_ground_space", decay.degenerate}}));
  }
  {
    const int n = 10;
    const auto model = build_model(ModelKind::AKLT, n);
    const auto layers = build_layers(model);
    const MpsState mps = aklt_valence_bond_state(n);
    const CVector omega = to_dense(mps);
    const auto obs = build_observable(ObservableKind::RandomProjector, 4, n, 3, 2, 7);
    const auto sub = extract_patch_basis(mps, ball_window(4, 3));
    json rows = json::array();
    bool ok = true;
    for (int lp = 0; lp <= lightcone_depth(sub.window, 4) + 1; ++lp) {
      const auto chk = lightcone_identity_check(layers, sub, omega, obs.matrix, 4, lp);
      if (chk.inside_cone) ok = ok && chk.residual <= 1e-10;
      rows.push_back({{"l_prime", lp}, {"residual", chk.residual}, {"inside_cone", chk.inside_cone}});
    }
    out.push_back(make_check("dl", "lightcone_identity", ok,
                             {{"l", 3}, {"depth_limit", lightcone_depth(sub.window, 4)}, {"checks", rows}}));
    const auto ground = frustration_free_ground_space(model);
    json cmp_rows = json::array();
    bool holds = true;
    for (int l = 1; l <= 3; ++l) {
      const auto cmp = agsp_dl_comparison(layers, ground, mps, extract_patch_basis(mps, ball_window(4, l)), obs);
      holds = holds && cmp.holds && cmp.residual <= cmp.complement_norm + 1e-9;
      cmp_rows.push_back({{"l", l}, {"l_prime", cmp.l_prime}, {"residual", cmp.residual},
                          {"complement_norm", cmp.complement_norm}, {"degeneracy", cmp.degeneracy}});
    }
    out.push_back(make_check("dl", "agsp_below_complement_norm", holds, {{"rows", cmp_rows}}));
  }
  return out;
}

std::vector<Check> suite_sdp(const VerifyOptions& o) {
  std::vector<Check> out;
  std::mt19937_64 rng(o.seed);
  const int count = o.quick ? std::min(o.sdp_instances, 20) : o.sdp_instances;
  int solved = 0;
  double worst_gap = 0.0, worst_slack = 0.0, worst_dual = 0.0;
  int max_n = 0, max_m = 0;
  json failures = json::array();
  for (int k = 0; k < count; ++k) {
    const int n = 2 + static_cast<int>(rng() % 39);
    const int m = 1 + static_cast<int>(rng() % std::min(800, n * n - 1));
    const SdpProblem p = random_feasible_sdp(n, m, rng);
    const SdpSolution s = solve_sdp(p);
    const double slack = s.slack_min_eigenvalue();
    const bool ok = s.status == SdpStatus::Optimal && std::abs(s.gap) <= 1e-8 && slack >= -1e-9;
    solved += ok;
    worst_gap = std::max(worst_gap, std::abs(s.gap));
    worst_slack = std::min(worst_slack, slack);
    worst_dual = std::min(worst_dual, s.dual_min_eigenvalue());
    max_n = std::max(max_n, n);
    max_m = std::max(max_m, m);
    if (!ok) failures.push_back({{"instance", k}, {"n", n}, {"m", m}, {"status", to_string(s.status)}, {"gap", s.gap}});
  }
  out.push_back(make_check("sdp", "random_instances", solved == count,
                           {{"instances", count}, {"solved", solved}, {"max_abs_gap", worst_gap},
                            {"min_slack_eigenvalue", worst_slack}, {"min_dual_eigenvalue", worst_dual},
                            {"max_n", max_n}, {"max_m", max_m}, {"failures", failures}}));
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const CMatrix mtx = hermitian_part(random_complex_matrix(36, 36, rng));
    SdpProblem p;
    p.c = RVector::Ones(1);
    p.f0 = -mtx;
    p.f.push_back(CMatrix::Identity(36, 36));
    const SdpSolution s = solve_sdp(p);
    worst = std::max(worst, std::abs(s.x(0) - hermitian_eigen(mtx).values(35)));
  }
  out.push_back(make_check("sdp", "lambda_max_matches_eigensolver", worst <= 1e-8, {{"max_deviation", worst}}));
  return out;
}

std::vector<Check> suite_rigor(const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed);
  const int cases = o.quick ? std::min(o.rigor_cases, 12) : o.rigor_cases;
  const double tol = 1e-10;
  int passed = 0;
  double worst_violation = 0.0;
  json failures = json::array();
  json cases_json = json::array();
  for (int k = 0; k < cases; ++k) {
    const ModelKind kind = std::array{ModelKind::TransverseIsing, ModelKind::TransverseXY, ModelKind::RandomFieldXY,
                                      ModelKind::AKLT}[rng() % 4];
    const bool aklt = kind == ModelKind::AKLT;
    const int n = aklt ? 8 : std::array{8, 10, 12}[rng() % 3];
    ModelParams params;
    params.h = 0.5 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    params.alpha = std::uniform_real_distribution<double>(-0.8, 0.8)(rng);
    params.field_seed = rng();
    const auto model = build_model(kind, n, params);
    const int level = aklt ? 0 : static_cast<int>(rng() % 2);
    const auto spectrum = exact_low_spectrum(model, level + 1, 1 + k);
    const CVector& state = spectrum[level].state;
    const int d = model.local_dim;
    // the window [site - r, site + 1 + r] must stay off both chain ends
    const int max_radius = std::min(aklt ? 2 : 3, (n - 4) / 2);
    const int radius = 1 + static_cast<int>(rng() % max_radius);
    const int lo = 1 + radius, hi = n - 3 - radius;
    const int site = lo + static_cast<int>(rng() % (hi - lo + 1));
    const auto obs_kind = std::array{ObservableKind::PxPx, ObservableKind::PzPz, ObservableKind::RandomProjector}[rng() % 3];
    const auto kind_used = aklt ? ObservableKind::RandomProjector : obs_kind;
    const int rank = 1 + static_cast<int>(rng() % 2);
    const auto obs = build_observable(kind_used, site, n, d, rank, 100 + k);
    // full-rank regime: no truncation in the state or the patch basis
    const MpsState mps = mps_from_dense(state, n, d, 0.0);
    PatchOptions popts;
    popts.rank_cutoff = 1e-14;
    const auto sub = extract_patch_basis(mps, ball_window(site, radius), popts);
    GeneratorConfig gconf;
    gconf.worst_case_roundoff = true;
    gconf.consistency_tol = 2.0 * (apply_hamiltonian(model, state) - spectrum[level].energy * state).norm();
    const double exact = dense_expectation(state, obs.matrix, site, d, n);
    const CMatrix b = project_local(sub, obs.matrix, site, 2);
    const auto basic = basic_bounds(b);
    double up = basic.k_max, low = basic.k_min;
    int m = 0;
    try {
      const auto gens = build_generators(sub, model, std::min(40, sub.q * sub.q - 1), 1000 + k, gconf);
      m = gens.size();
      up = cgo_bound(b, gens, BoundDirection::Upper).bound;
      low = cgo_bound(b, gens, BoundDirection::Lower).bound;
    } catch (const DegenerateGenerators&) {
    }
    const double violation = std::max({basic.k_min - exact, exact - basic.k_max, low - exact, exact - up,
                                       up - basic.k_max, basic.k_min - low, 0.0});
    worst_violation = std::max(worst_violation, violation);
    const bool ok = violation <= tol;
    passed += ok;
    json c{{"model", model.name()}, {"n", n}, {"level", level}, {"l", radius}, {"site", site},
           {"observable", to_string(kind_used)}, {"q", sub.q}, {"m", m}, {"exact", exact},
           {"consistency_tol", gconf.consistency_tol},
           {"basic", {basic.k_min, basic.k_max}}, {"cgo", {low, up}}};
    if (!ok) failures.push_back(c);
    cases_json.push_back(std::move(c));
  }
  return {make_check("rigor", "exact_eigenstate_brackets", passed == cases,
                     {{"cases", cases}, {"passed", passed}, {"max_violation", worst_violation}, {"tolerance", tol},
                      {"failures", failures}, {"detail", cases_json}})};
}

}  // namespace

std::vector<std::string> suite_names() { return {"decay", "agsp", "commutator", "dl", "sdp", "rigor"}; }

std::vector<Check> run_suite(const std::string& suite, const VerifyOptions& options) {
  if (suite == "decay") return suite_decay(options);
  if (suite == "agsp") return suite_agsp(options);
  if (suite == "commutator") return suite_commutator(options);
  if (suite == "dl") return suite_dl(options);
  if (suite == "sdp") return suite_sdp(options);
  if (suite == "rigor") return suite_rigor(options);
  throw std::invalid_argument("unknown suite '" + suite + "'");
}

}  // namespace patchbound
