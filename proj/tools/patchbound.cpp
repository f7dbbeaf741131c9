#include "patchbound/experiments.hpp"
#include "patchbound/parallel.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

using namespace patchbound;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelOptions {
  std::string model = "ising";
  int n = 100;
  double h = 1.1;
  double alpha = 0.5;
  std::uint64_t field_seed = 1;
  double field_min = 1.05;
  double field_max = 1.15;

  void add(CLI::App& app) {
    app.add_option("--model", model, "aklt | ising | xy | rfxy (or system letter A-D)")->capture_default_str();
    app.add_option("--n", n, "number of sites")->capture_default_str()->check(CLI::Range(4, 100000));
    app.add_option("--h", h, "transverse field")->capture_default_str();
    app.add_option("--alpha", alpha, "XY anisotropy")->capture_default_str();
    app.add_option("--field-seed", field_seed, "seed of the random fields (rfxy)")->capture_default_str();
    app.add_option("--field-min", field_min, "lower end of the random field range")->capture_default_str();
    app.add_option("--field-max", field_max, "upper end of the random field range")->capture_default_str();
  }

  SpinChainModel build() const {
    ModelParams p;
    p.h = h;
    p.alpha = alpha;
    p.field_seed = field_seed;
    p.field_min = field_min;
    p.field_max = field_max;
    return build_model(parse_model_kind(model), n, p);
  }
};

struct DmrgOptions {
  SweepConfig sweep;

  void add(CLI::App& app) {
    app.add_option("--bond", sweep.bond_dim, "DMRG bond dimension D")->capture_default_str();
    app.add_option("--max-sweeps", sweep.max_sweeps, "DMRG sweep limit")->capture_default_str();
    app.add_option("--min-sweeps", sweep.min_sweeps, "DMRG warm-up sweeps")->capture_default_str();
    app.add_option("--energy-tol", sweep.energy_tol, "DMRG energy convergence")->capture_default_str();
    app.add_option("--dmrg-seed", sweep.seed, "DMRG initial-state seed")->capture_default_str();
  }
};

struct ObservableOptions {
  std::string kind = "pxpx";
  int site = 50;  // 1-based first site of the pair
  int rank = 1;
  std::uint64_t seed = 1;

  void add(CLI::App& app) {
    app.add_option("--obs", kind, "pxpx | pzpz | random")->capture_default_str();
    app.add_option("--site", site, "first site of the observable pair, 1-based")->capture_default_str();
    app.add_option("--rank", rank, "rank of a random projector")->capture_default_str();
    app.add_option("--obs-seed", seed, "seed of a random projector")->capture_default_str();
  }

  ObservableSpec build(const SpinChainModel& model) const {
    return build_observable(parse_observable_kind(kind), site - 1, model.n_sites, model.local_dim, rank, seed);
  }
};

// Every option of a subcommand with its effective value, so that outputs
// carry their full configuration.
json echo_config(const CLI::App& app) {
  json j = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty() || opt->get_name() == "--help") continue;
    const std::string key = opt->get_lnames().front();
    if (opt->count() > 0) {
      const auto& r = opt->results();
      j[key] = r.size() == 1 ? json(r.front()) : json(r);
    } else {
      j[key] = opt->get_default_str();
    }
  }
  return j;
}

json provenance(const CLI::App& sub) {
  return json{{"command", sub.get_name()}, {"config", echo_config(sub)}, {"version", PATCHBOUND_VERSION}};
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void emit(const json& j, const std::string& path) {
  std::cout << dump(j);
  write_text(path, dump(j));
}

MpsState load_mps_for(const std::string& path, const SpinChainModel& model) {
  if (!std::filesystem::exists(path)) throw UsageError("MPS file not found: " + path);
  MpsState mps = read_mps(path);
  if (mps.n_sites != model.n_sites || mps.local_dim != model.local_dim)
    throw UsageError("MPS in " + path + " does not match the model size");
  if (mps.model_hash != 0 && mps.model_hash != model_hash(model))
    throw UsageError("MPS in " + path + " was computed for a different model (hash mismatch)");
  return mps;
}

std::string reference_path_default() { return std::string(PATCHBOUND_DATA_DIR) + "/reference_tables.json"; }

// ---------------------------------------------------------------------------

int cmd_ground(const CLI::App& sub, const ModelOptions& mo, const DmrgOptions& dm, const std::string& out,
               double exact_limit) {
  SystemConfig cfg;
  const auto model = mo.build();
  cfg.kind = model.kind;
  cfg.n_sites = model.n_sites;
  cfg.params = model.params;
  cfg.sweep = dm.sweep;
  const PreparedSystem sys = prepare_system(cfg);
  json report = provenance(sub);
  report["system"] = system_to_json(sys);
  report["seconds"] = sys.seconds;
  report["max_bond_dim"] = sys.state.max_bond_dim();
  bool ok = sys.converged;
  if (static_cast<double>(model.dimension()) <= exact_limit) {
    const double exact = exact_ground(model).energy;
    const double delta = std::abs(sys.energy - exact);
    report["exact_energy"] = exact;
    report["exact_delta"] = delta;
    report["exact_check_passed"] = delta <= 1e-8;
    ok = ok && delta <= 1e-8;
  }
  if (!out.empty()) {
    write_mps(out, sys.state);
    report["mps_file"] = out;
    write_text(out + ".json", dump(report));
  }
  std::cout << dump(report);
  return ok ? kOk : kVerifyFailed;
}

int cmd_exact(const CLI::App& sub, const ModelOptions& mo, const ObservableOptions& oo, const std::string& mps_path,
              const std::string& out) {
  const auto model = mo.build();
  const auto obs = oo.build(model);
  json report = provenance(sub);
  report["model"] = model_to_json(model);
  report["observable"] = observable_to_json(obs);
  if (!mps_path.empty()) {
    const MpsState mps = load_mps_for(mps_path, model);
    report["source"] = "mps_contraction";
    report["expectation"] = expectation(mps, obs);
  } else {
    if (model.dimension() > kDenseVectorLimit)
      throw UsageError("exact diagonalization needs d^N <= 2^20; pass --mps for larger chains");
    const auto gs = exact_ground(model);
    report["source"] = "exact_diagonalization";
    report["energy"] = gs.energy;
    report["expectation"] = dense_expectation(gs.state, obs.matrix, obs.first_site, model.local_dim, model.n_sites);
  }
  emit(report, out);
  return kOk;
}

struct BoundOptions {
  std::string method = "cgo";
  int l = 4;
  int keep = 6;
  std::string mps;
  std::string out;
  std::string trace;
  CgoConfig cgo;
};

int cmd_bound(const CLI::App& sub, const ModelOptions& mo, const DmrgOptions& dm, const ObservableOptions& oo,
              const BoundOptions& bo) {
  const auto model = mo.build();
  SystemConfig cfg;
  cfg.kind = model.kind;
  cfg.n_sites = model.n_sites;
  cfg.params = model.params;
  cfg.sweep = dm.sweep;
  cfg.keep = bo.keep;
  PreparedSystem sys;
  if (!bo.mps.empty()) {
    sys.config = cfg;
    sys.model = model;
    sys.state = load_mps_for(bo.mps, model);
    sys.method = "file";
  } else {
    sys = prepare_system(cfg);
  }
  const auto obs = oo.build(model);
  const BoundMethod method = bo.method == "basic" ? BoundMethod::Basic : BoundMethod::CGO;
  if (bo.method != "basic" && bo.method != "cgo") throw UsageError("--method must be basic or cgo");
  const CellResult cell = run_cell(sys, obs, bo.l, method, bo.cgo);
  json report = bound_result_to_json(cell.result, model_to_json(model));
  report["observable"] = observable_to_json(obs);
  report["provenance"] = provenance(sub);
  report["seconds"] = cell.seconds;
  if (method == BoundMethod::CGO) {
    report["stop_reason"] = cell.stop_reason;
    report["steps"] = cell.trace.size();
    if (!bo.trace.empty()) {
      write_text(bo.trace, trace_csv(cell.trace));
      report["trace_file"] = bo.trace;
    }
  }
  emit(report, bo.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// table

struct TableOptions {
  std::string systems = "A,B,C,D";
  std::vector<int> radii{3, 4};
  std::string methods = "basic,cgo";
  std::string observables;  // empty: every reference row
  std::string reference = reference_path_default();
  std::string out_json;
  std::string out_csv;
  int n = 100;
  int jobs = 1;
  CgoConfig cgo;
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

struct TableCell {
  std::string system;
  int row_index = 0;
  const json* row = nullptr;
  ObservableSpec observable;
  int l = 0;
  std::string method;
};

std::string what(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

int cmd_table(const CLI::App& sub, const TableOptions& to) {
  std::ifstream ref_in(to.reference);
  if (!ref_in) throw UsageError("reference table not found: " + to.reference);
  const json ref = json::parse(ref_in);
  const auto& tol = ref.at("tolerances");
  const double tol_exact = tol.at("exact").get<double>();
  const double tol_endpoint = tol.at("cgo_endpoint").get<double>();
  const int first_site = ref.at("site_one_based").at(0).get<int>() - 1;
  const auto methods = split(to.methods);
  const auto wanted_obs = split(to.observables);
  const auto names = split(to.systems);
  for (const auto& name : names)
    if (name.size() != 1 || !ref.at("systems").contains(name)) throw UsageError("unknown system '" + name + "'");
  for (const auto& m : methods)
    if (m != "basic" && m != "cgo") throw UsageError("unknown method '" + m + "'");

  // ground states first, then every (row, l, method) cell as an independent job
  std::vector<std::exception_ptr> sys_errors;
  const auto systems = parallel_map<PreparedSystem>(
      static_cast<int>(names.size()), to.jobs,
      [&](int i) { return prepare_system(reference_system(names[i][0], to.n)); }, sys_errors);

  json cells = json::array();
  std::ostringstream csv;
  csv << "system,row,observable,seed,method,l,q,k_min,k_max,half_width,oracle,bracket,reference_exact,exact_ok,"
         "reference_k_min,reference_k_max,endpoints_ok,generators,stop_reason,seconds,error\n";
  bool all_ok = true;

  std::vector<TableCell> jobs;
  std::vector<int> job_system;
  for (std::size_t si = 0; si < names.size(); ++si) {
    const std::string& name = names[si];
    if (sys_errors[si]) {
      const std::string msg = what(sys_errors[si]);
      all_ok = false;
      cells.push_back({{"system", name}, {"error", msg}});
      csv << name << ",,,,,,,,,,,,,,,,,,,," << '"' << msg << "\"\n";
      continue;
    }
    const json& sref = ref.at("systems").at(name);
    const auto& model = systems[si].model;
    const int rank = sref.at("observable_rank").get<int>();
    int row_index = 0;
    for (const json& row : sref.at("rows")) {
      ++row_index;
      const std::string obs_name = row.at("observable").get<std::string>();
      if (!wanted_obs.empty() && std::find(wanted_obs.begin(), wanted_obs.end(), obs_name) == wanted_obs.end()) continue;
      const auto obs = build_observable(parse_observable_kind(obs_name), first_site, model.n_sites, model.local_dim,
                                        rank, static_cast<std::uint64_t>(row_index));
      for (int l : to.radii)
        for (const std::string& m : methods) {
          jobs.push_back({name, row_index, &row, obs, l, m});
          job_system.push_back(static_cast<int>(si));
        }
    }
  }

  std::vector<std::exception_ptr> cell_errors;
  const auto results = parallel_map<CellResult>(
      static_cast<int>(jobs.size()), to.jobs,
      [&](int i) {
        const TableCell& job = jobs[i];
        const BoundMethod method = job.method == "basic" ? BoundMethod::Basic : BoundMethod::CGO;
        CellResult r = run_cell(systems[job_system[i]], job.observable, job.l, method, to.cgo);
        std::cerr << job.system << ' ' << to_string(job.observable.kind) << ' ' << job.method << "_l" << job.l
                  << " done\n";
        return r;
      },
      cell_errors);

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const TableCell& job = jobs[i];
    const json& row = *job.row;
    const std::string obs_name = row.at("observable").get<std::string>();
    const std::uint64_t seed = static_cast<std::uint64_t>(job.row_index);
    const bool deterministic = row.at("deterministic").get<bool>();
    const double ref_exact = row.at("exact").get<double>();
    const std::string column = job.method + "_l" + std::to_string(job.l);
    json cell{{"system", job.system}, {"row", job.row_index}, {"observable", obs_name}, {"seed", seed},
              {"method", job.method}, {"l", job.l},           {"deterministic", deterministic}};
    if (cell_errors[i]) {
      const std::string error = what(cell_errors[i]);
      all_ok = false;
      cell["error"] = error;
      csv << job.system << ',' << job.row_index << ',' << obs_name << ',' << seed << ',' << job.method << ','
          << job.l << ",,,,,,,,,,,,,,," << '"' << error << "\"\n";
      std::cerr << job.system << ' ' << obs_name << ' ' << column << " failed: " << error << '\n';
      cells.push_back(std::move(cell));
      continue;
    }
    const CellResult& r = results[i];
    const double oracle = *r.result.oracle;
    cell["result"] = bound_result_to_json(r.result, json(nullptr));
    cell["bracket"] = r.result.contains(oracle, 0.0);
    cell["stop_reason"] = r.stop_reason;
    cell["seconds"] = r.seconds;
    cell["reference_exact"] = ref_exact;
    if (deterministic) {
      const bool exact_ok = std::abs(oracle - ref_exact) <= tol_exact;
      cell["exact_ok"] = exact_ok;
      all_ok = all_ok && exact_ok;
    }
    if (row.contains(column)) {
      const double rlo = row.at(column).at(0).get<double>();
      const double rhi = row.at(column).at(1).get<double>();
      cell["reference_interval"] = {rlo, rhi};
      if (deterministic && job.method == "cgo") {
        const bool ends_ok =
            std::abs(r.result.k_min - rlo) <= tol_endpoint && std::abs(r.result.k_max - rhi) <= tol_endpoint;
        cell["endpoints_ok"] = ends_ok;
        all_ok = all_ok && ends_ok;
      }
    }
    csv << job.system << ',' << job.row_index << ',' << obs_name << ',' << seed << ',' << job.method << ',' << job.l
        << ',' << r.result.q << ',' << fmt(r.result.k_min) << ',' << fmt(r.result.k_max) << ','
        << fmt(r.result.half_width()) << ',' << fmt(oracle) << ',' << (cell["bracket"].get<bool>() ? 1 : 0) << ','
        << ref_exact << ',' << (cell.contains("exact_ok") ? (cell["exact_ok"].get<bool>() ? "1" : "0") : "") << ','
        << (cell.contains("reference_interval") ? fmt(cell["reference_interval"][0].get<double>()) : "") << ','
        << (cell.contains("reference_interval") ? fmt(cell["reference_interval"][1].get<double>()) : "") << ','
        << (cell.contains("endpoints_ok") ? (cell["endpoints_ok"].get<bool>() ? "1" : "0") : "") << ','
        << r.result.generator_count << ',' << r.stop_reason << ',' << r.seconds << ",\n";
    cells.push_back(std::move(cell));
  }
  json report = provenance(sub);
  report["tolerances"] = tol;
  report["cells"] = cells;
  report["all_comparisons_passed"] = all_ok;
  emit(report, to.out_json);
  write_text(to.out_csv, csv.str());
  return all_ok ? kOk : kVerifyFailed;
}

// ---------------------------------------------------------------------------

int cmd_verify(const CLI::App& sub, std::vector<std::string> suites, const VerifyOptions& vo, int jobs,
               const std::string& out) {
  if (suites.empty()) suites = suite_names();
  std::vector<std::exception_ptr> errors;
  const auto results = parallel_map<std::pair<std::vector<Check>, double>>(
      static_cast<int>(suites.size()), jobs,
      [&](int i) {
        const auto start = std::chrono::steady_clock::now();
        auto checks = run_suite(suites[i], vo);
        return std::pair{std::move(checks),
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
      },
      errors);
  json checks = json::array();
  bool all = true;
  for (std::size_t i = 0; i < suites.size(); ++i) {
    // an unknown suite name is a usage error, anything else a failed check
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::invalid_argument&) {
        throw;
      } catch (const std::exception& e) {
        all = false;
        checks.push_back({{"suite", suites[i]}, {"name", "error"}, {"passed", false}, {"measured", e.what()}});
        std::cerr << "FAIL " << suites[i] << ": " << e.what() << '\n';
        continue;
      }
    }
    for (const Check& c : results[i].first) {
      all = all && c.passed;
      checks.push_back({{"suite", c.suite}, {"name", c.name}, {"passed", c.passed}, {"measured", c.measured}});
      std::cerr << (c.passed ? "PASS " : "FAIL ") << c.suite << '/' << c.name << '\n';
    }
    std::cerr << "  suite " << suites[i] << ": " << results[i].second << " s\n";
  }
  json report = provenance(sub);
  report["checks"] = checks;
  report["passed"] = all;
  emit(report, out);
  return all ? kOk : kVerifyFailed;
}

int cmd_residual(const CLI::App& sub, const ModelOptions& mo, const std::string& state_kind, std::vector<int> window,
                 int samples, std::uint64_t seed, const std::string& out) {
  const auto model = mo.build();
  if (model.dimension() > kDenseVectorLimit) throw UsageError("residual needs d^N <= 2^20");
  if (window.size() != 2 || window[0] < 1 || window[1] > model.n_sites || window[1] - window[0] < 2)
    throw UsageError("--window needs two 1-based sites a < b with at least one interior site");
  const Window w{window[0] - 1, window[1] - 1};
  if (ipow(model.local_dim, w.size()) > kDenseMatrixLimit) throw UsageError("window too large for a dense H_L");
  const CMatrix hl = patch_hamiltonian(model, w);
  json report = provenance(sub);
  report["model"] = model_to_json(model);
  report["window"] = {window[0], window[1]};
  if (state_kind == "random") {
    std::mt19937_64 rng(seed);
    const Index dim = ipow(model.local_dim, w.size());
    std::vector<double> vals;
    for (int i = 0; i < samples; ++i) {
      const CMatrix g = random_complex_matrix(dim, dim, rng);
      CMatrix rho = g * g.adjoint();
      rho /= rho.trace();
      vals.push_back(commutator_residual(rho, hl, w.size(), model.local_dim));
    }
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    report["state"] = "random";
    report["samples"] = samples;
    report["median"] = sorted[sorted.size() / 2];
    report["min"] = sorted.front();
    report["max"] = sorted.back();
  } else {
    int level = 0;
    if (state_kind == "excited") level = 1;
    else if (state_kind != "ground") throw UsageError("--state must be ground, excited or random");
    const auto spectrum = exact_low_spectrum(model, level + 1);
    const CMatrix rho = reduced_density(spectrum[level].state, model.n_sites, model.local_dim, w);
    report["state"] = state_kind;
    report["energy"] = spectrum[level].energy;
    report["residual"] = commutator_residual(rho, hl, w.size(), model.local_dim);
  }
  emit(report, out);
  return kOk;
}

// Unsectioned keys in a config file apply to the selected subcommand, so a
// file holds the same names as the flags; [section] keys still work.
class FlatConfig : public CLI::ConfigINI {
 public:
  explicit FlatConfig(const CLI::App& app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigINI::from_config(input);
    const auto subs = app_.get_subcommands();
    if (subs.empty()) return items;
    const CLI::App& sub = *subs.front();
    for (auto& item : items) {
      if (!item.parents.empty()) continue;
      if (sub.get_option_no_throw("--" + item.name) != nullptr) item.parents = {sub.get_name()};
    }
    return items;
  }

 private:
  const CLI::App& app_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigorous local-patch bounds on MPS expectation values"};
  // -h is not a help alias because --h is the transverse-field option
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_config("--config", "", "key = value configuration file; command-line flags take precedence");
  app.config_formatter(std::make_shared<FlatConfig>(app));
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(PATCHBOUND_VERSION));

  // ground
  auto* ground = app.add_subcommand("ground", "DMRG ground state, written as an MPS file with a JSON sidecar");
  ModelOptions g_model;
  DmrgOptions g_dmrg;
  std::string g_out;
  double g_exact_limit = 1 << 16;
  g_model.add(*ground);
  g_dmrg.add(*ground);
  ground->add_option("--out", g_out, "MPS output path (sidecar at <out>.json)");
  ground->add_option("--exact-limit", g_exact_limit, "cross-check against exact diagonalization when d^N is at most this")
      ->capture_default_str();

  // exact
  auto* exact = app.add_subcommand("exact", "oracle expectation value by exact diagonalization or MPS contraction");
  ModelOptions e_model;
  ObservableOptions e_obs;
  std::string e_mps, e_out;
  e_model.add(*exact);
  e_obs.add(*exact);
  exact->add_option("--mps", e_mps, "contract this MPS file instead of diagonalizing");
  exact->add_option("--out", e_out, "JSON output path");

  // bound
  auto* bound = app.add_subcommand("bound", "basic or CGO interval for a local observable");
  ModelOptions b_model;
  DmrgOptions b_dmrg;
  ObservableOptions b_obs;
  BoundOptions bo;
  b_model.add(*bound);
  b_dmrg.add(*bound);
  b_obs.add(*bound);
  bound->add_option("--method", bo.method, "basic | cgo")->capture_default_str();
  bound->add_option("--l", bo.l, "ball radius")->capture_default_str()->check(CLI::Range(1, 64));
  bound->add_option("--keep", bo.keep, "kept Schmidt vectors per cut (0 = all)")->capture_default_str();
  bound->add_option("--mps", bo.mps, "ground state MPS file (computed by DMRG when omitted)");
  bound->add_option("--out", bo.out, "BoundResult JSON path");
  bound->add_option("--trace", bo.trace, "CGO trace CSV path");
  bound->add_option("--batch", bo.cgo.batch, "generators added per step")->capture_default_str();
  bound->add_option("--max-generators", bo.cgo.max_generators, "generator limit per bound")->capture_default_str();
  bound->add_option("--wiggle", bo.cgo.wiggle_fraction, "allowed worsening as a fraction of the width")
      ->capture_default_str();
  bound->add_option("--seed-upper", bo.cgo.seed_upper, "upper-bound generator seed")->capture_default_str();
  bound->add_option("--seed-lower", bo.cgo.seed_lower, "lower-bound generator seed")->capture_default_str();
  bound->add_option("--sdp-tol", bo.cgo.sdp.tol, "SDP tolerance")->capture_default_str();

  // table
  auto* table = app.add_subcommand("table", "reference tables for systems A-D with comparison columns");
  TableOptions to;
  table->add_option("--systems", to.systems, "comma-separated system letters")->capture_default_str();
  table->add_option("--l", to.radii, "ball radii")->capture_default_str();
  table->add_option("--methods", to.methods, "comma-separated: basic,cgo")->capture_default_str();
  table->add_option("--observables", to.observables, "restrict rows, e.g. pxpx,pzpz");
  table->add_option("--n", to.n, "number of sites")->capture_default_str();
  table->add_option("--reference", to.reference, "reference table JSON")->capture_default_str();
  table->add_option("--out", to.out_json, "JSON output path");
  table->add_option("--csv", to.out_csv, "CSV output path");
  table->add_option("--batch", to.cgo.batch, "generators added per step")->capture_default_str();
  table->add_option("--max-generators", to.cgo.max_generators, "generator limit per bound")->capture_default_str();
  table->add_option("--jobs", to.jobs, "worker threads for independent cells (0 = all cores)")->capture_default_str();

  // verify
  auto* verify = app.add_subcommand("verify", "invariant suites: " + CLI::detail::join(suite_names(), ", "));
  std::vector<std::string> v_suites;
  VerifyOptions vo;
  std::string v_out;
  verify->add_option("--suite", v_suites, "suite to run (repeatable; default all)")
      ->check(CLI::IsMember(suite_names()));
  verify->add_flag("--quick", vo.quick, "reduced sizes");
  verify->add_option("--seed", vo.seed, "seed for randomized suites")->capture_default_str();
  verify->add_option("--sdp-instances", vo.sdp_instances, "random SDP instances")->capture_default_str();
  verify->add_option("--rigor-cases", vo.rigor_cases, "randomized exact-state cases")->capture_default_str();
  verify->add_option("--out", v_out, "JSON output path");
  int v_jobs = 1;
  verify->add_option("--jobs", v_jobs, "worker threads for independent suites (0 = all cores)")->capture_default_str();

  // residual
  auto* residual = app.add_subcommand("residual", "|| Tr_dL [rho_L, H_L] || for eigenstates or random density matrices");
  ModelOptions r_model;
  std::string r_state = "ground";
  std::vector<int> r_window{3, 8};
  int r_samples = 100;
  std::uint64_t r_seed = 1;
  std::string r_out;
  r_model.n = 10;
  r_model.add(*residual);
  residual->add_option("--state", r_state, "ground | excited | random")->capture_default_str();
  residual->add_option("--window", r_window, "first and last site, 1-based")->expected(2)->capture_default_str();
  residual->add_option("--samples", r_samples, "random density matrices")->capture_default_str();
  residual->add_option("--seed", r_seed, "seed for random density matrices")->capture_default_str();
  residual->add_option("--out", r_out, "JSON output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*ground) return cmd_ground(*ground, g_model, g_dmrg, g_out, g_exact_limit);
    if (*exact) return cmd_exact(*exact, e_model, e_obs, e_mps, e_out);
    if (*bound) return cmd_bound(*bound, b_model, b_dmrg, b_obs, bo);
    if (*table) return cmd_table(*table, to);
    if (*verify) return cmd_verify(*verify, v_suites, vo, v_jobs, v_out);
    if (*residual) return cmd_residual(*residual, r_model, r_state, r_window, r_samples, r_seed, r_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return kVerifyFailed;
  }
  return kUsage;
}
