// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [details.json]

#include "patchbound/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#ifndef PATCHBOUND_DATA_DIR
#define PATCHBOUND_DATA_DIR "data"
#endif

using namespace patchbound;
using nlohmann::json;

namespace {

struct Outcome {
  bool passed = false;
  std::string summary;
  json detail;
};

json load_reference() {
  std::ifstream in(std::string(PATCHBOUND_DATA_DIR) + "/reference_tables.json");
  if (!in) throw std::runtime_error("cannot open reference_tables.json");
  return json::parse(in);
}

std::string fmt(double v, int precision = 5) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

const json& reference_row(const json& ref, const std::string& system, const std::string& observable) {
  for (const json& row : ref.at("systems").at(system).at("rows"))
    if (row.at("observable") == observable) return row;
  throw std::runtime_error("no reference row " + system + "/" + observable);
}

class Context {
 public:
  explicit Context(json ref) : ref_(std::move(ref)), site_(ref_.at("site_one_based").at(0).get<int>() - 1) {}

  const json& ref() const { return ref_; }
  int site() const { return site_; }

  const PreparedSystem& system(char name) {
    auto it = systems_.find(name);
    if (it == systems_.end()) it = systems_.emplace(name, prepare_system(reference_system(name))).first;
    return it->second;
  }

  ObservableSpec observable(char name, ObservableKind kind, std::uint64_t seed = 1) {
    const auto& s = system(name);
    const int rank = ref_.at("systems").at(std::string(1, name)).at("observable_rank").get<int>();
    return build_observable(kind, site_, s.model.n_sites, s.model.local_dim, rank, seed);
  }

  const CellResult& cell(char name, ObservableKind kind, int l, BoundMethod method, std::uint64_t seed = 1) {
    const std::string key = std::string(1, name) + to_string(kind) + std::to_string(l) + to_string(method) +
                            std::to_string(seed);
    auto it = cells_.find(key);
    if (it == cells_.end()) it = cells_.emplace(key, run_cell(system(name), observable(name, kind, seed), l, method)).first;
    return it->second;
  }

 private:
  json ref_;
  int site_;
  std::map<char, PreparedSystem> systems_;
  std::map<std::string, CellResult> cells_;
};

json interval_json(const BoundResult& r) {
  return json{{"k_min", r.k_min}, {"k_max", r.k_max}, {"half_width", r.half_width()}, {"oracle", *r.oracle},
              {"q", r.q}, {"generators", r.generator_count}};
}

Outcome oracle_reproduction(Context& ctx) {
  Outcome out;
  out.passed = true;
  const double tol = ctx.ref().at("tolerances").at("exact").get<double>();
  std::ostringstream summary;
  for (char name : {'B', 'C'}) {
    const auto& sys = ctx.system(name);
    const bool fast = sys.seconds <= 300.0;
    out.passed = out.passed && fast && sys.converged;
    json sj{{"seconds", sys.seconds}, {"converged", sys.converged}, {"energy", sys.energy}};
    summary << name << " " << fmt(sys.seconds, 3) << "s";
    for (auto kind : {ObservableKind::PxPx, ObservableKind::PzPz}) {
      const double value = expectation(sys.state, ctx.observable(name, kind));
      const double expected = reference_row(ctx.ref(), std::string(1, name), to_string(kind)).at("exact").get<double>();
      const bool ok = std::abs(value - expected) <= tol;
      out.passed = out.passed && ok;
      sj[to_string(kind)] = {{"value", value}, {"reference", expected}, {"deviation", value - expected}};
      summary << " " << to_string(kind) << "=" << fmt(value) << (ok ? "" : "(off)");
    }
    summary << "; ";
    out.detail[std::string(1, name)] = sj;
  }
  out.summary = summary.str();
  return out;
}

Outcome basic_frustrated(Context& ctx) {
  Outcome out;
  out.passed = true;
  double lo = 1e300, hi = 0.0;
  for (char name : {'B', 'C'})
    for (auto kind : {ObservableKind::PxPx, ObservableKind::PzPz})
      for (int l : {3, 4}) {
        const auto& r = ctx.cell(name, kind, l, BoundMethod::Basic).result;
        const bool ok = r.half_width() >= 0.2 && r.half_width() <= 0.5 && r.contains(*r.oracle, 0.0);
        out.passed = out.passed && ok;
        lo = std::min(lo, r.half_width());
        hi = std::max(hi, r.half_width());
        out.detail[std::string(1, name) + "_" + to_string(kind) + "_l" + std::to_string(l)] = interval_json(r);
      }
  out.summary = "half-widths in [" + fmt(lo, 3) + ", " + fmt(hi, 3) + "], target [0.2, 0.5], oracle bracketed";
  return out;
}

Outcome cgo_tightening(Context& ctx) {
  Outcome out;
  out.passed = true;
  const auto& tol = ctx.ref().at("tolerances");
  const double hw_max = tol.at("cgo_half_width").get<double>();
  const double endpoint = tol.at("cgo_endpoint").get<double>();
  const double slack = tol.at("oracle_slack").get<double>();
  std::ostringstream summary;
  for (char name : {'B', 'C'})
    for (auto kind : {ObservableKind::PxPx, ObservableKind::PzPz}) {
      const auto& cell = ctx.cell(name, kind, 4, BoundMethod::CGO);
      const auto& r = cell.result;
      const json& ref = reference_row(ctx.ref(), std::string(1, name), to_string(kind)).at("cgo_l4");
      const double rlo = ref.at(0).get<double>(), rhi = ref.at(1).get<double>();
      const bool width_ok = r.half_width() <= hw_max;
      const bool ends_ok = std::abs(r.k_min - rlo) <= endpoint && std::abs(r.k_max - rhi) <= endpoint;
      const bool oracle_ok = r.contains(*r.oracle, slack);
      out.passed = out.passed && width_ok && ends_ok && oracle_ok;
      json j = interval_json(r);
      j["reference"] = {rlo, rhi};
      j["stop_reason"] = cell.stop_reason;
      j["width_ok"] = width_ok;
      j["endpoints_ok"] = ends_ok;
      j["oracle_ok"] = oracle_ok;
      out.detail[std::string(1, name) + "_" + to_string(kind)] = j;
      summary << name << " " << to_string(kind) << " hw=" << fmt(r.half_width(), 3)
              << (width_ok && ends_ok && oracle_ok ? "" : "(fail)") << "; ";
    }
  out.summary = summary.str();
  return out;
}

Outcome basic_aklt(Context& ctx) {
  Outcome out;
  out.passed = true;
  double lo = 1e300, hi = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto& r3 = ctx.cell('A', ObservableKind::RandomProjector, 3, BoundMethod::Basic, seed).result;
    const auto& r4 = ctx.cell('A', ObservableKind::RandomProjector, 4, BoundMethod::Basic, seed).result;
    const bool ok = r3.half_width() >= 2e-3 && r3.half_width() <= 2e-2 && r4.half_width() < r3.half_width() &&
                    r3.contains(*r3.oracle, 0.0) && r4.contains(*r4.oracle, 0.0);
    out.passed = out.passed && ok;
    lo = std::min(lo, r3.half_width());
    hi = std::max(hi, r3.half_width());
    out.detail["seed_" + std::to_string(seed)] = {{"l3", interval_json(r3)}, {"l4", interval_json(r4)}};
  }
  out.summary = "5 projectors, l=3 half-widths in [" + fmt(lo, 3) + ", " + fmt(hi, 3) +
                "], l=4 narrower, oracle bracketed";
  return out;
}

Outcome suites(const std::vector<std::string>& names) {
  Outcome out;
  out.passed = true;
  std::ostringstream summary;
  for (const auto& name : names)
    for (const Check& c : run_suite(name)) {
      out.passed = out.passed && c.passed;
      out.detail[c.suite + "/" + c.name] = {{"passed", c.passed}, {"measured", c.measured}};
      summary << c.suite << "/" << c.name << (c.passed ? " ok" : " FAILED") << "; ";
    }
  out.summary = summary.str();
  return out;
}

Outcome trace_shape_d(Context& ctx) {
  Outcome out;
  out.passed = true;
  std::ostringstream summary;
  for (int l : {3, 4}) {
    const auto& cell = ctx.cell('D', ObservableKind::PxPx, l, BoundMethod::CGO);
    const TraceShape shape = trace_shape(cell.trace, cell.accepted_step, CgoConfig{}.wiggle_fraction);
    const bool ok = shape.generators_at_stop >= 300 && shape.generators_at_stop <= 900 && shape.monotone_within_wiggle;
    out.passed = out.passed && ok;
    json j = interval_json(cell.result);
    j["stop_reason"] = cell.stop_reason;
    j["generators_at_stop"] = shape.generators_at_stop;
    j["monotone_within_wiggle"] = shape.monotone_within_wiggle;
    j["worst_relative_worsening"] = shape.worst_relative_worsening;
    j["trace_csv"] = trace_csv(cell.trace);
    out.detail["l" + std::to_string(l)] = j;
    summary << "l=" << l << " stop at m=" << shape.generators_at_stop << " (" << cell.stop_reason << ")"
            << (shape.monotone_within_wiggle ? " monotone" : " non-monotone") << "; ";
  }
  out.summary = summary.str();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx(load_reference());
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle reproduction B/C", [&] { return oracle_reproduction(ctx); }},
      {"basic intervals B/C", [&] { return basic_frustrated(ctx); }},
      {"CGO tightening B/C l=4", [&] { return cgo_tightening(ctx); }},
      {"basic intervals AKLT", [&] { return basic_aklt(ctx); }},
      {"strict-rigor regime", [] { return suites({"rigor"}); }},
      {"SDP solver", [] { return suites({"sdp"}); }},
      {"eigen-deviation and AGSP decay", [] { return suites({"decay", "agsp"}); }},
      {"commutator residual discrimination", [] { return suites({"commutator"}); }},
      {"detectability lemma", [] { return suites({"dl"}); }},
      {"convergence trace shape D", [&] { return trace_shape_d(ctx); }},
  };
  json report = json::array();
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.passed = false;
      o.summary = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.passed;
    std::cout << "criterion " << i + 1 << " [" << criteria[i].first << "]: " << (o.passed ? "PASS" : "FAIL") << " ("
              << fmt(secs, 3) << " s) " << o.summary << std::endl;
    report.push_back({{"criterion", i + 1}, {"name", criteria[i].first}, {"passed", o.passed}, {"seconds", secs},
                      {"summary", o.summary}, {"detail", o.detail}});
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  if (argc > 1) std::ofstream(argv[1]) << report.dump(2) << '\n';
  return failures ? 1 : 0;
}
