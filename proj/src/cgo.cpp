#include "patchbound/cgo.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace patchbound {

namespace {

constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

}  // namespace

CMatrix projected_commutator(const PatchSubspace& sub, const CMatrix& hw, const CMatrix& a) {
  if (!sub.basis) throw std::length_error("projected_commutator: subspace basis not materialized");
  const int len = sub.window.size();
  const int inner = sub.interior.size();
  if (a.rows() != ipow(sub.local_dim, inner))
    throw std::invalid_argument("projected_commutator: generator does not match the interior");
  // W^dag [H, A] W = (HW)^dag (AW) + (AW)^dag (HW) for anti-Hermitian A
  const CMatrix aw = apply_local(*sub.basis, a, sub.interior.first - sub.window.first, inner, sub.local_dim, len);
  const CMatrix cross = hw.adjoint() * aw;
  return cross + cross.adjoint();
}

GeneratorSet GeneratorSet::prefix(int m) const {
  if (m < 0 || m > size()) throw std::out_of_range("GeneratorSet::prefix: size out of range");
  GeneratorSet out;
  out.g.assign(g.begin(), g.begin() + m);
  out.raw_norms.assign(raw_norms.begin(), raw_norms.begin() + m);
  out.error.assign(error.begin(), error.begin() + m);
  out.requested = requested;
  out.discarded = discarded;
  out.seed = seed;
  return out;
}

GeneratorSampler::GeneratorSampler(const PatchSubspace& sub, const SpinChainModel& model,
                                   std::uint64_t seed, GeneratorConfig config)
    : sub_(sub), rng_(seed), seed_(seed), config_(std::move(config)) {
  if (!sub.basis) throw std::length_error("GeneratorSampler: subspace basis not materialized");
  if (sub.interior.size() < 1) throw std::invalid_argument("GeneratorSampler: window has no interior");
  hw_ = apply_patch_hamiltonian(model, sub.window, *sub.basis);
  hw_norm_ = hw_.norm();
}

void GeneratorSampler::draw(int count, GeneratorSet& set) {
  set.seed = seed_;
  // ||G||_F <= 2 ||HW||_F ||A|| with ||A||_F = 1, so nothing survives the threshold
  if (2.0 * hw_norm_ < config_.zero_norm) {
    set.requested += count;
    set.discarded += count;
    throw DegenerateGenerators("all projected commutators vanish: H_L annihilates the subspace");
  }
  for (int k = 0; k < count; ++k) {
    const CMatrix a = random_antihermitian_operator(sub_.interior.size(), sub_.local_dim, config_.mpo, rng_);
    const CMatrix aw = apply_local(*sub_.basis, a, sub_.interior.first - sub_.window.first,
                                   sub_.interior.size(), sub_.local_dim, sub_.window.size());
    const CMatrix cross = hw_.adjoint() * aw;
    const CMatrix g = cross + cross.adjoint();
    const double norm = g.norm();
    ++set.requested;
    if (norm < config_.zero_norm) {
      ++set.discarded;
      continue;
    }
    set.g.push_back(g / norm);
    set.raw_norms.push_back(norm);
    // forward error of the two products and the sum, relative to the scaled G
    const double n = static_cast<double>(sub_.window_dim()) + 16.0;
    const double growth = config_.worst_case_roundoff ? n : std::sqrt(n);
    const double roundoff = 8.0 * growth * kUnitRoundoff * hw_norm_ * aw.norm() / norm;
    set.error.push_back(roundoff + config_.consistency_tol / norm);
  }
  if (set.discarded > config_.max_zero_fraction * set.requested) {
    std::ostringstream os;
    os << set.discarded << " of " << set.requested << " projected commutators below " << config_.zero_norm
       << ": degenerate subspace";
    throw DegenerateGenerators(os.str());
  }
}

GeneratorSet build_generators(const PatchSubspace& sub, const SpinChainModel& model, int count,
                              std::uint64_t seed, const GeneratorConfig& config) {
  GeneratorSampler sampler(sub, model, seed, config);
  GeneratorSet set;
  sampler.draw(count, set);
  return set;
}

CgoSolution cgo_bound(const CMatrix& b_projected, const std::vector<CMatrix>& generators,
                      BoundDirection direction, const SdpOptions& options, const std::vector<double>& error) {
  if (!error.empty() && error.size() != generators.size())
    throw std::invalid_argument("cgo_bound: one error bound per generator required");
  const Index q = b_projected.rows();
  const bool upper = direction == BoundDirection::Upper;
  CgoSolution out;
  out.direction = direction;
  out.generators = static_cast<int>(generators.size());
  if (generators.empty()) {
    const auto eig = hermitian_eigen(b_projected, 1e-10);
    out.bound = upper ? eig.values(q - 1) : eig.values(0);
    out.sdp_value = out.bound;
    out.coefficients = RVector();
    out.rho = eig.vectors.col(upper ? q - 1 : 0) * eig.vectors.col(upper ? q - 1 : 0).adjoint();
    return out;
  }

  // Upper: min t  s.t.  t I - B - sum c_i G_i >= 0.
  // Lower: min -s s.t. B + sum c_i G_i - s I >= 0.
  const double sign = upper ? -1.0 : 1.0;
  SdpProblem p;
  p.c = RVector::Zero(static_cast<Index>(generators.size()) + 1);
  p.c(0) = upper ? 1.0 : -1.0;
  p.f0 = sign * b_projected;
  p.f.reserve(generators.size() + 1);
  p.f.push_back(-sign * CMatrix::Identity(q, q));
  for (const auto& g : generators) p.f.push_back(sign * g);
  const SdpSolution sol = solve_sdp(p, options);

  out.status = sol.status;
  out.iterations = sol.iterations;
  out.message = sol.message;
  out.sdp_value = sol.x(0);
  out.coefficients = sol.x.tail(sol.x.size() - 1);
  out.rho = sol.z;
  // For any t, lambda(B + t K) +/- t sum |c_i| error_i is a bound, and it is
  // convex (concave) in t, so the best scale is found by a 1-d search.
  CMatrix kc = CMatrix::Zero(q, q);
  double weight = 0.0;
  double coef_sum = 0.0;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    const double ci = out.coefficients(static_cast<Index>(i));
    kc += ci * generators[i];
    coef_sum += std::abs(ci);
    if (!error.empty()) weight += std::abs(ci) * error[i];
  }
  kc = hermitian_part(kc);
  const double eval_roundoff = 8.0 * static_cast<double>(q) * kUnitRoundoff;
  const double b_norm = b_projected.norm();
  const double dir = upper ? 1.0 : -1.0;
  auto margin_at = [&](double t) { return t * weight + eval_roundoff * (b_norm + t * coef_sum); };
  auto total = [&](double t) {
    const RVector values = hermitian_eigen(hermitian_part(b_projected) + t * kc, 1e-8).values;
    return dir * (upper ? values(q - 1) : values(0)) + margin_at(t);
  };
  double best_t = 1.0;
  double best = total(1.0);
  constexpr double kProbe = 1e-3;
  if (total(1.0 - kProbe) < best) {
    // golden section on [0, 1 - probe]
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0, hi = 1.0 - kProbe;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = total(x1), f2 = total(x2);
    while (hi - lo > 1e-4) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = total(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = total(x2);
      }
    }
    for (const auto& [t, f] : {std::pair{x1, f1}, std::pair{x2, f2}, std::pair{0.0, total(0.0)}})
      if (f < best) {
        best = f;
        best_t = t;
      }
  }
  out.scale = best_t;
  out.margin = margin_at(best_t);
  out.bound = dir * best;
  out.coefficients *= best_t;
  if (best_t < 1.0) {
    std::ostringstream os;
    os << (out.message.empty() ? "" : "; ") << "coefficients scaled by " << best_t << " to limit the error margin";
    out.message += os.str();
  }
  return out;
}

CgoSolution cgo_bound(const CMatrix& b_projected, const GeneratorSet& set, BoundDirection direction,
                      const SdpOptions& options) {
  return cgo_bound(b_projected, set.g, direction, options, set.error);
}

namespace {

// The bound is evaluated directly from c, so an inexact solve still yields a
// valid bound; only certified infeasibility ends the run.
bool failed(const CgoSolution& s) {
  return s.status == SdpStatus::Infeasible || s.status == SdpStatus::Unbounded;
}

}  // namespace

CgoRun cgo_incremental(const PatchSubspace& sub, const ObservableSpec& observable,
                       const SpinChainModel& model, const CgoConfig& config) {
  if (config.batch < 1) throw std::invalid_argument("cgo_incremental: batch must be >= 1");
  const CMatrix b = project_local(sub, observable.matrix, observable.first_site, 2);
  CgoRun run;
  run.result = basic_bounds(b);
  run.result.method = BoundMethod::CGO;
  run.result.l = observable.first_site - sub.window.first;
  run.result.seed_upper = config.seed_upper;
  run.result.seed_lower = config.seed_lower;
  run.upper = cgo_bound(b, GeneratorSet{}, BoundDirection::Upper, config.sdp);
  run.lower = cgo_bound(b, GeneratorSet{}, BoundDirection::Lower, config.sdp);

  TraceStep first;
  first.upper = run.result.k_max;
  first.lower = run.result.k_min;
  first.gap = first.upper - first.lower;
  run.trace.push_back(first);

  GeneratorSampler up_stream(sub, model, config.seed_upper, config.generators);
  GeneratorSampler low_stream(sub, model, config.seed_lower, config.generators);
  GeneratorSet up_set, low_set;

  auto stop = [&](const std::string& reason) {
    run.stop_reason = reason;
    run.trace.back().stop_reason = reason;
  };

  for (int step = 1;; ++step) {
    try {
      up_stream.draw(config.batch, up_set);
      low_stream.draw(config.batch, low_set);
    } catch (const DegenerateGenerators& e) {
      run.result.notes.push_back(std::string("CGO reduces to the basic interval: ") + e.what());
      stop("degenerate_generators");
      break;
    }
    const CgoSolution up = cgo_bound(b, up_set, BoundDirection::Upper, config.sdp);
    const CgoSolution low = cgo_bound(b, low_set, BoundDirection::Lower, config.sdp);
    TraceStep rec;
    rec.step = step;
    rec.m_upper = up_set.size();
    rec.m_lower = low_set.size();
    rec.upper = up.bound;
    rec.lower = low.bound;
    rec.gap = up.bound - low.bound;
    run.trace.push_back(rec);

    const TraceStep& prev = run.trace[run.trace.size() - 2];
    if (failed(up) || failed(low)) {
      stop("solver_" + to_string(failed(up) ? up.status : low.status));
      break;
    }
    if (rec.gap < 0) {
      stop("crossed");
      break;
    }
    const double allowed = config.wiggle_fraction * rec.gap;
    if (rec.upper - prev.upper > allowed || prev.lower - rec.lower > allowed) {
      stop("wiggle");
      break;
    }
    run.upper = up;
    run.lower = low;
    run.accepted_step = step;
    if (std::max(up_set.requested, low_set.requested) >= config.max_generators) {
      stop("max_generators");
      break;
    }
  }

  const TraceStep& accepted = run.trace[run.accepted_step];
  run.result.k_max = accepted.upper;
  run.result.k_min = accepted.lower;
  run.result.generators_upper = accepted.m_upper;
  run.result.generators_lower = accepted.m_lower;
  run.result.generator_count = std::max(accepted.m_upper, accepted.m_lower);
  return run;
}

std::string trace_csv(const std::vector<TraceStep>& trace) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "step,m_upper,m_lower,upper,lower,gap,stop_reason\n";
  for (const auto& t : trace)
    os << t.step << ',' << t.m_upper << ',' << t.m_lower << ',' << t.upper << ',' << t.lower << ',' << t.gap
       << ',' << t.stop_reason << '\n';
  return os.str();
}

DualReport dual_feasibility_report(const CMatrix& rho, const std::vector<CMatrix>& generators,
                                   const CMatrix& b_projected, const CMatrix* oracle_rho) {
  DualReport r;
  const CMatrix h = hermitian_part(rho);
  r.psd_violation = std::max(0.0, -hermitian_eigen(h, 1e-8).values(0));
  r.trace_deviation = std::abs(h.trace().real() - 1.0);
  for (const auto& g : generators) r.max_constraint = std::max(r.max_constraint, std::abs((h * g).trace().real()));
  r.objective = (h * b_projected).trace().real();
  if (oracle_rho) {
    const RVector diff = hermitian_eigen(hermitian_part(h - *oracle_rho), 1e-8).values;
    r.oracle_distance = 0.5 * diff.cwiseAbs().sum();
  }
  return r;
}

}  // namespace patchbound
