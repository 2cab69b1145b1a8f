// topswap_lab: spectral gaps, scaling scans, simulations, verification suites
// and K spectra for the top-swap family of card-shuffling chains.
//
// Exit codes: 0 success, 1 usage, 2 numerical non-convergence, 3 resource cap.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "topswap/montecarlo.hpp"
#include "topswap/report_io.hpp"
#include "topswap/spectral.hpp"
#include "topswap/verify.hpp"

using namespace topswap;

namespace {

constexpr int kUsage = 1;
constexpr int kNonConvergence = 2;
constexpr int kCap = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string chain = "top-swap";
  int n = 4;
  int k = 2;
  double delta = 0.25;
  std::uint64_t seed = 1;
  std::int64_t steps = 1000000;
  std::int64_t stride = 1;
  StateIndex dense_cap = 2000;
  StateIndex sparse_cap = 2000000;
  double tolerance = 1e-10;
  std::int64_t max_matvecs = 1000000;
  std::string out;
  std::string format = "csv";
  int workers = 0;
  std::string export_matrix;
  // scan
  std::string n_range = "2..6";
  std::string k_range = "2..4";
  std::string mode = "exact";
  // simulate
  std::string observable = "deck1_size";
  std::string trajectory_out;
  // verify
  std::string suite = "all";
  int n_max = 6;
  // spectrum
  std::string op = "K";
  int cards = 4;
  int decks = 3;
};

Kernel parse_chain(const RunConfig& cfg) {
  static const std::map<std::string, KernelId> aliases = {
      {"top-swap", KernelId::TopSwapK},
      {"inversion", KernelId::TopSwapInversion},
      {"deck-avg", KernelId::DeckAvgUnweighted},
      {"deck-avg-weighted", KernelId::DeckAvgWeighted},
  };
  if (auto it = aliases.find(cfg.chain); it != aliases.end()) return {it->second, cfg.delta};
  if (auto id = parse_kernel_name(cfg.chain)) return {*id, cfg.delta};
  std::string valid = "top-swap, inversion, deck-avg, deck-avg-weighted";
  for (KernelId id : kAllKernels) valid += ", " + std::string(kernel_name(id));
  throw UsageError("unknown chain '" + cfg.chain + "'; valid: " + valid);
}

OutputFormat parse_format(const std::string& f) {
  if (f == "csv") return OutputFormat::Csv;
  if (f == "json") return OutputFormat::Json;
  throw UsageError("unknown format '" + f + "' (csv or json)");
}

std::pair<int, int> parse_range(const std::string& text, const char* flag) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw UsageError(std::string("bad range for ") + flag + ": '" + text + "' (use a..b)");
  }
}

MatrixCaps caps_of(const RunConfig& cfg) { return {cfg.dense_cap, cfg.sparse_cap}; }

EigenOptions eigen_of(const RunConfig& cfg) {
  EigenOptions e;
  e.tolerance = cfg.tolerance;
  e.max_matvecs = cfg.max_matvecs;
  return e;
}

Parallelism workers_of(const RunConfig& cfg) {
  if (cfg.workers > 0) return {cfg.workers};
  if (const char* env = std::getenv("TOPSWAP_WORKERS")) {
    try {
      return {std::max(0, std::stoi(env))};
    } catch (const std::exception&) {
      throw UsageError("TOPSWAP_WORKERS must be an integer");
    }
  }
  return {0};
}

void emit(const Table& table, const RunConfig& cfg) {
  const OutputFormat fmt = parse_format(cfg.format);
  if (cfg.out.empty() || cfg.out == "-") {
    write_table(table, fmt, std::cout);
    return;
  }
  std::ofstream os(cfg.out);
  if (!os) throw std::runtime_error("cannot open " + cfg.out);
  write_table(table, fmt, os);
}

void require_multi_state(int n, int k) {
  if (k < 1 || n < 0) throw UsageError("need n >= 0 and k >= 1");
  if (state_count(n, k) < 2)
    throw CapExceeded("the state space of (n=" + std::to_string(n) + ", k=" + std::to_string(k) +
                          ") has a single state; no spectral gap",
                      "--n/--k");
}

// ---- subcommands -----------------------------------------------------------

int cmd_gap(const RunConfig& cfg) {
  const Kernel kernel = parse_chain(cfg);
  require_multi_state(cfg.n, cfg.k);
  try {
    require_compatible(kernel, cfg.n, cfg.k);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const OperatorMatrix m = build_matrix(kernel, cfg.n, cfg.k, caps_of(cfg), workers_of(cfg));
  if (!cfg.export_matrix.empty()) {
    std::ofstream os(cfg.export_matrix);
    if (!os) throw std::runtime_error("cannot open " + cfg.export_matrix);
    m.write_triplets(os);
  }
  GapReport g = spectral_gap(m, eigen_of(cfg));
  g.chain = std::string(kernel_name(kernel.id));
  g.n = cfg.n;
  g.k = cfg.k;
  g.gap_times_nk = (cfg.n + cfg.k) * g.gap;

  Table t{{"chain", "n", "k", "states", "gap", "relaxation_time", "gap_times_nk", "residual", "converged"}, {}};
  t.add({g.chain, std::int64_t{g.n}, std::int64_t{g.k}, static_cast<std::int64_t>(g.state_count), g.gap,
         g.relaxation_time, g.gap_times_nk, g.residual, g.converged});
  emit(t, cfg);
  return g.converged ? 0 : kNonConvergence;
}

int cmd_scan(const RunConfig& cfg) {
  const Kernel kernel = parse_chain(cfg);
  const auto [n_lo, n_hi] = parse_range(cfg.n_range, "--n-range");
  const auto [k_lo, k_hi] = parse_range(cfg.k_range, "--k-range");
  std::vector<std::pair<int, int>> grid;
  for (int n = n_lo; n <= n_hi; ++n)
    for (int k = k_lo; k <= k_hi; ++k) grid.emplace_back(n, k);
  if (grid.empty()) throw UsageError("empty scan grid");
  ScanMode mode;
  if (cfg.mode == "exact")
    mode = ScanMode::Exact;
  else if (cfg.mode == "mc")
    mode = ScanMode::MonteCarlo;
  else
    throw UsageError("unknown mode '" + cfg.mode + "' (exact or mc)");
  for (const auto& [n, k] : grid) {
    if (mode == ScanMode::Exact) require_multi_state(n, k);
    try {
      require_compatible(kernel, n, k);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  ScanParams p;
  p.caps = caps_of(cfg);
  p.eigen = eigen_of(cfg);
  p.par = workers_of(cfg);
  p.mc_steps = cfg.steps;
  p.seed = cfg.seed;
  if (auto obs = parse_observable_name(cfg.observable); obs && *obs != ObservableId::Custom)
    p.mc_observable = Observable{*obs, {}};
  const ScanResult res = scaling_scan(kernel, grid, mode, p);

  Table t{{"chain", "n", "k", "states", "gap", "relaxation_time", "gap_times_nk", "mode", "residual"}, {}};
  for (const auto& r : res.rows)
    t.add({r.chain, std::int64_t{r.n}, std::int64_t{r.k}, static_cast<std::int64_t>(r.states), r.gap,
           r.relaxation_time, r.gap_times_nk, std::string(r.mode == ScanMode::Exact ? "exact" : "mc"), r.residual});
  emit(t, cfg);
  std::cerr << "fit: relaxation_time = " << format_real(res.fit.intercept) << " + " << format_real(res.fit.slope)
            << " * (n+k); max/min tau/(n+k) = " << format_real(res.max_over_min_tau_over_nk) << '\n';
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  const Kernel kernel = parse_chain(cfg);
  if (cfg.steps < 1) throw UsageError("--steps must be at least 1");
  const auto obs_id = parse_observable_name(cfg.observable);
  if (!obs_id || *obs_id == ObservableId::Custom)
    throw UsageError("unknown observable '" + cfg.observable +
                     "' (deck1_size, star_position, is_deck1_empty, adjacency_count)");
  try {
    require_compatible(kernel, cfg.n, cfg.k);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  SimulationConfig sc;
  sc.kernel = kernel;
  sc.n = cfg.n;
  sc.k = cfg.k;
  sc.steps = cfg.steps;
  sc.seed = cfg.seed;
  sc.stride = cfg.stride;
  Trajectory traj;
  try {
    traj = simulate(sc, Observable{*obs_id, {}});
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  if (!cfg.trajectory_out.empty()) {
    Table tt{{"t", "value"}, {}};
    for (std::size_t i = 0; i < traj.samples.size(); ++i)
      tt.add({static_cast<double>(i) * traj.sample_spacing(), traj.samples[i]});
    std::ofstream os(cfg.trajectory_out);
    if (!os) throw std::runtime_error("cannot open " + cfg.trajectory_out);
    write_csv(tt, os);
  }

  const RelaxationEstimate e = estimate_relaxation(traj);
  Table t{{"chain", "n", "k", "seed", "steps", "stride", "uniformization_rate", "start_state", "observable", "tau",
           "stderr", "method", "window", "fit_lo", "fit_hi", "tau_int", "stderr_tau_int", "sokal_window",
           "short_run"},
          {}};
  t.add({traj.kernel, std::int64_t{traj.n}, std::int64_t{traj.k}, static_cast<std::int64_t>(traj.seed), traj.steps,
         traj.stride, traj.uniformization_rate, traj.start_state, e.observable, e.tau, e.stderr_tau, e.method,
         e.window, e.fit_lo, e.fit_hi, e.tau_int, e.stderr_tau_int, e.sokal_window, e.short_run});
  emit(t, cfg);
  if (e.short_run) std::cerr << "warning: trajectory shorter than 100 relaxation times\n";
  return 0;
}

void add_report(Table& t, const CheckReport& r) {
  t.add({r.id, r.range, r.cases, r.failure_count, r.max_violation, r.note});
}

int cmd_verify(const RunConfig& cfg) {
  static const std::vector<std::string> suites = {"identities", "inequalities", "lemma32", "remark31", "constants",
                                                  "all"};
  if (std::find(suites.begin(), suites.end(), cfg.suite) == suites.end()) {
    std::string valid;
    for (const auto& s : suites) valid += (valid.empty() ? "" : ", ") + s;
    throw UsageError("unknown suite '" + cfg.suite + "'; valid suites: " + valid);
  }
  if (cfg.n_max < 1 || cfg.n_max > 7) throw UsageError("--n-max must lie in 1..7");
  const bool all = cfg.suite == "all";
  std::vector<CheckReport> reports;

  if (all || cfg.suite == "identities") {
    reports.push_back(check_inverse_identity(cfg.n_max));
    reports.push_back(check_star_position_rule(cfg.n_max));
    reports.push_back(check_decomposition(cfg.n_max));
    reports.push_back(check_pushforward(std::min(cfg.n_max, 6), cfg.seed));
  }
  if (all || cfg.suite == "inequalities") {
    const MatrixCaps caps = caps_of(cfg);
    const EigenOptions eig = eigen_of(cfg);
    auto run = [&](Inequality w, const std::vector<std::pair<int, int>>& cases) {
      CheckReport agg = CheckReport::make(inequality_name(w), "");
      for (const auto& [n, k] : cases) {
        const InequalityResult r = check_form_inequality(w, n, k, cfg.delta, caps, eig);
        agg.absorb(r.report);
        agg.range += (agg.range.empty() ? "" : " ") + std::string("(") + std::to_string(n) + "," +
                     std::to_string(k) + ")";
        if (r.smallest_constant)
          agg.note += "(" + std::to_string(n) + "," + std::to_string(k) + "): smallest C=" +
                      format_real(*r.smallest_constant) + " chain C=" + format_real(*r.chain_constant) + "; ";
      }
      reports.push_back(agg);
    };
    std::vector<std::pair<int, int>> two;
    for (int n = 1; n <= cfg.n_max; ++n) two.emplace_back(n, 2);
    std::vector<std::pair<int, int>> multi;
    for (auto [n, k] : {std::pair{3, 3}, {4, 3}, {3, 4}})
      if (n <= cfg.n_max) multi.emplace_back(n, k);
    std::vector<std::pair<int, int>> small;
    for (int n = 1; n <= std::min(cfg.n_max, 4); ++n)
      for (int k = 2; k <= 3; ++k) small.emplace_back(n, k);
    std::vector<std::pair<int, int>> triple;
    for (int n = 1; n <= std::min(cfg.n_max, 4); ++n) triple.emplace_back(n, 3);
    run(Inequality::ModifiedVsTopSwap, two);
    run(Inequality::BalancedVsModified, two);
    run(Inequality::VarVsBalanced, two);
    run(Inequality::VarVsDeckAvg, multi);
    run(Inequality::VarVsWeighted, multi);
    run(Inequality::Triple, triple);
    run(Inequality::TopSwapK, small);
    run(Inequality::TranspositionK, small);
    run(Inequality::Inversion, small);
  }
  if (all || cfg.suite == "lemma32") {
    reports.push_back(check_lemma32(std::min(cfg.n_max, 6), cfg.delta));
    reports.push_back(check_lemma32(std::min(cfg.n_max, 6), 0.0));
  }
  if (all || cfg.suite == "remark31") reports.push_back(check_remark31(4, 9));
  if (all || cfg.suite == "constants") reports.push_back(check_constants(cfg.delta));

  Table t{{"id", "range", "cases", "failures", "max_violation", "note"}, {}};
  std::int64_t failures = 0;
  for (const auto& r : reports) {
    add_report(t, r);
    failures += r.failure_count;
  }
  emit(t, cfg);
  for (const auto& r : reports) {
    std::cerr << (r.passed() ? "ok   " : "FAIL ") << r.id << " [" << r.range << "] cases=" << r.cases
              << " failures=" << r.failure_count << '\n';
    for (const auto& w : r.witnesses) std::cerr << "       " << w << '\n';
  }
  return failures == 0 ? 0 : kUsage;
}

int cmd_spectrum(const RunConfig& cfg) {
  if (cfg.op != "K") throw UsageError("unknown operator '" + cfg.op + "' (K)");
  if (cfg.cards < 0 || cfg.decks < 2) throw UsageError("need --cards >= 0 and --decks >= 2");
  const auto spec = K_spectrum(cfg.cards, cfg.decks);
  Table t{{"value", "multiplicity"}, {}};
  for (const auto& e : spec) t.add({e.value, std::int64_t{e.multiplicity}});
  emit(t, cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral gaps, simulations and lemma checks for top-swap card shuffles"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--chain", cfg.chain, "chain id (top-swap, inversion, deck-avg, deck-avg-weighted, or a kernel name)");
    sub->add_option("--delta", cfg.delta, "balance threshold for balanced-swap chains")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    sub->add_option("--dense-cap", cfg.dense_cap, "state-count limit for dense work")->capture_default_str();
    sub->add_option("--sparse-cap", cfg.sparse_cap, "state-count limit for sparse assembly")->capture_default_str();
    sub->add_option("--tol", cfg.tolerance, "eigensolver residual tolerance")->capture_default_str();
    sub->add_option("--max-matvecs", cfg.max_matvecs, "eigensolver iteration cap")->capture_default_str();
    sub->add_option("--out", cfg.out, "output file (default stdout)");
    sub->add_option("--format", cfg.format, "csv or json")->capture_default_str();
    sub->add_option("--workers", cfg.workers, "worker threads (default: TOPSWAP_WORKERS or all cores)");
  };

  auto* gap = app.add_subcommand("gap", "spectral gap of one chain");
  common(gap);
  gap->add_option("--n", cfg.n, "cards")->capture_default_str();
  gap->add_option("--k", cfg.k, "decks")->capture_default_str();
  gap->add_option("--export-matrix", cfg.export_matrix, "write the operator as row,col,value triplets");

  auto* scan = app.add_subcommand("scan", "relaxation times over an (n, k) grid");
  common(scan);
  scan->add_option("--n-range", cfg.n_range, "cards, a..b")->capture_default_str();
  scan->add_option("--k-range", cfg.k_range, "decks, a..b")->capture_default_str();
  scan->add_option("--mode", cfg.mode, "exact or mc")->capture_default_str();
  scan->add_option("--steps", cfg.steps, "steps per MC point")->capture_default_str();
  scan->add_option("--observable", cfg.observable, "MC observable")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "simulate a chain and estimate its relaxation time");
  common(sim);
  sim->add_option("--n", cfg.n, "cards")->capture_default_str();
  sim->add_option("--k", cfg.k, "decks")->capture_default_str();
  sim->add_option("--steps", cfg.steps, "steps")->capture_default_str();
  sim->add_option("--stride", cfg.stride, "steps between samples")->capture_default_str();
  sim->add_option("--observable", cfg.observable,
                  "deck1_size, star_position, is_deck1_empty or adjacency_count")
      ->capture_default_str();
  sim->add_option("--trajectory-out", cfg.trajectory_out, "write the sampled series as CSV (t,value)");

  auto* ver = app.add_subcommand("verify", "run a verification suite");
  common(ver);
  ver->add_option("--suite", cfg.suite, "identities, inequalities, lemma32, remark31, constants or all")
      ->capture_default_str();
  ver->add_option("--n-max", cfg.n_max, "largest n for exhaustive checks")->capture_default_str();

  auto* spec = app.add_subcommand("spectrum", "eigenvalues of the deck-content operator K");
  common(spec);
  spec->add_option("--operator", cfg.op, "K")->capture_default_str();
  spec->add_option("--cards", cfg.cards, "cards in play")->capture_default_str();
  spec->add_option("--decks", cfg.decks, "decks")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*gap) return cmd_gap(cfg);
    if (*scan) return cmd_scan(cfg);
    if (*sim) return cmd_simulate(cfg);
    if (*ver) return cmd_verify(cfg);
    if (*spec) return cmd_spectrum(cfg);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const CapExceeded& e) {
    std::cerr << "resource cap: " << e.what() << '\n';
    return kCap;
  } catch (const NonConvergence& e) {
    std::cerr << "no convergence: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
