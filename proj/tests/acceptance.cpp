// One PASS/FAIL line per acceptance criterion, details indented below it.
// Usage: acceptance [criterion ...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "topswap/montecarlo.hpp"
#include "topswap/spectral.hpp"
#include "topswap/verify.hpp"

using namespace topswap;

namespace {

constexpr double kGapTol = 1e-9;        // criteria 2, 4, 5, 6, 7, 8, 11
constexpr double kSpreadRelTol = 1e-9;  // criterion 3, against the golden spread
constexpr double kMcFitTol = 0.25;      // criterion 3, MC point against the exact fit
constexpr double kMcGapTol = 0.20;      // criterion 12
constexpr double kChiSquareP = 1e-3;    // criterion 12
constexpr StateIndex kGapCap = 200000;  // criterion 2
constexpr StateIndex kInversionCap = 50000;  // criterion 11
constexpr int kMaxDecks = 10;           // criteria 2, 11

const std::string kGolden = TOPSWAP_GOLDEN_DIR;

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;
  void note(const std::string& s) { details.push_back(s); }
  void require(bool ok, const std::string& s) {
    if (!ok) pass = false;
    note((ok ? "ok   " : "FAIL ") + s);
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string str(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

std::vector<std::pair<int, int>> capped_grid(StateIndex cap) {
  std::vector<std::pair<int, int>> grid;
  for (int k = 2; k <= kMaxDecks; ++k)
    for (int n = 1; state_count(n, k) <= BigInt(cap); ++n) grid.emplace_back(n, k);
  return grid;
}

// Exact top-swap gaps, computed once and shared by criteria 2, 3 and 11.
std::map<std::pair<int, int>, GapReport>& top_swap_gaps() {
  static std::map<std::pair<int, int>, GapReport> cache;
  return cache;
}

const GapReport& top_swap_gap(int n, int k) {
  auto& cache = top_swap_gaps();
  auto it = cache.find({n, k});
  if (it == cache.end()) it = cache.emplace(std::make_pair(n, k), kernel_gap(Kernel{KernelId::TopSwapK}, n, k)).first;
  return it->second;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  auto f = [](const std::vector<int>& sizes) { return Rational(sizes[0] == 0 ? 1 : 0); };
  struct Exact {
    int n, k;
    Rational m, v, e;
  };
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Exact> rows;
  for (int n = 1; n <= 8; ++n)
    for (int k = 1; k <= 5; ++k)
      rows.push_back({n, k, lumped_size_mean(n, k, f), lumped_size_variance(n, k, f), lumped_size_form_ek(n, k, f)});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  int mean_bad = 0, var_bad = 0, form_bad = 0;
  std::string first_form;
  for (const auto& [n, k, m, v, e] : rows) {
    if (m != Rational(k - 1, n + k - 1)) ++mean_bad;
    if (v != Rational(n * (k - 1), (n + k - 1) * (n + k - 1))) ++var_bad;
    const Rational printed(n * (k - 1), (n + k - 1) * (n + k) * (n + k));
    if (e != printed && form_bad++ == 0)
      first_form = fmt("(n=%d,k=%d): E_k(f) = %s, expected %s", n, k, str(e).c_str(), str(printed).c_str());
  }
  const int cases = static_cast<int>(rows.size());
  o.require(mean_bad == 0, fmt("mean = (k-1)/(n+k-1): %d of %d cases differ", mean_bad, cases));
  o.require(var_bad == 0, fmt("variance = n(k-1)/(n+k-1)^2: %d of %d cases differ", var_bad, cases));
  o.require(form_bad == 0, fmt("E_k(f) = n(k-1)/((n+k-1)(n+k)^2): %d of %d cases differ", form_bad, cases));
  if (form_bad) o.note("     first: " + first_form + " (exactly twice the expected value for every k >= 2)");
  o.require(secs < 5.0, fmt("exact evaluation over n <= 8, k <= 5 took %.3f s < 5 s", secs));

  // the lumped sums against a full enumeration where it is cheap
  const auto t1 = std::chrono::steady_clock::now();
  int crosschecked = 0;
  for (const auto& [n, k, m, v, e] : rows) {
    if (state_count(n, k) > 5000) continue;
    const StateSpace space(n, k);
    std::vector<Rational> table(space.size());
    for (StateIndex x = 0; x < space.size(); ++x) table[x] = space.unrank(x).deck_size(0) == 0 ? 1 : 0;
    if (mean(table) != m || variance(table) != v || dirichlet_form(Form{FormId::EK}, space, table) != e)
      o.require(false, fmt("lumped and enumerated values differ at (n=%d,k=%d)", n, k));
    ++crosschecked;
  }
  o.note(fmt("     lumped sums match full enumeration on %d cases (%.2f s)", crosschecked,
             std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count()));
  return o;
}

Outcome criterion2() {
  Outcome o;
  int bad = 0, cases = 0, corrected_bad = 0;
  std::string worst;
  double worst_ratio = 0;
  for (auto [n, k] : capped_grid(kGapCap)) {
    const GapReport& g = top_swap_gap(n, k);
    ++cases;
    if (!g.converged) o.require(false, fmt("eigensolver did not converge at (n=%d,k=%d)", n, k));
    const double bound = double(n + k - 1) / ((n + k) * (n + k));
    if (g.gap > bound + kGapTol) {
      ++bad;
      if (g.gap / bound > worst_ratio) {
        worst_ratio = g.gap / bound;
        worst = fmt("(n=%d,k=%d): gap %.12g > bound %.12g", n, k, g.gap, bound);
      }
    }
    if (g.gap > 2 * bound + kGapTol) ++corrected_bad;
  }
  o.require(bad == 0, fmt("gap <= (n+k-1)/(n+k)^2 + 1e-9 over %d cases (k = 2..%d, states <= %llu): %d violations",
                          cases, kMaxDecks, static_cast<unsigned long long>(kGapCap), bad));
  if (bad) o.note(fmt("     largest gap/bound ratio %.6f at %s", worst_ratio, worst.c_str()));
  o.note(fmt("     info: gap <= 2(n+k-1)/(n+k)^2 holds in %d of %d cases", cases - corrected_bad, cases));
  return o;
}

Outcome criterion3() {
  Outcome o;
  std::vector<double> x, y;
  double lo = 1e300, hi = 0;
  int below = 0;
  std::string below_list;
  for (int n = 2; n <= 6; ++n)
    for (int k = 2; k <= 4; ++k) {
      const GapReport& g = top_swap_gap(n, k);
      const double r = g.relaxation_time / (n + k);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      if (r < 1.0) {
        ++below;
        below_list += fmt(" (n=%d,k=%d):%.6f", n, k, r);
      }
      x.push_back(n + k);
      y.push_back(g.relaxation_time);
    }
  o.require(below == 0, fmt("tau/(n+k) >= 1 on n = 2..6, k = 2..4: %d below 1%s", below, below_list.c_str()));

  std::ifstream in(kGolden + "/scaling_ratio.json");
  const double golden = nlohmann::json::parse(in).at("max_over_min_tau_over_nk").get<double>();
  const double spread = hi / lo;
  o.require(spread <= golden * (1 + kSpreadRelTol), fmt("max/min tau/(n+k) = %.15g <= golden %.15g", spread, golden));

  const LinearFit fit = least_squares(x, y);
  SimulationConfig c;
  c.kernel = Kernel{KernelId::TopSwapK};
  c.n = 40;
  c.k = 10;
  c.steps = 1000000;
  c.seed = 3;
  const RelaxationEstimate e = estimate_relaxation(simulate(c, Observable{ObservableId::AdjacencyCount, {}}));
  const double predicted = fit.predict(50);
  const double rel = std::abs(e.tau - predicted) / predicted;
  o.require(rel <= kMcFitTol, fmt("MC (n=40,k=10) tau = %.4f +- %.4f vs fit %.4f + %.4f(n+k) = %.4f: rel. error %.3f <= %.2f",
                                  e.tau, e.stderr_tau, fit.intercept, fit.slope, predicted, rel, kMcFitTol));
  return o;
}

Outcome criterion4() {
  Outcome o;
  for (auto [n, k] : {std::pair{3, 3}, {4, 3}, {3, 4}}) {
    const GapReport g = kernel_gap(Kernel{KernelId::DeckAvgUnweighted}, n, k);
    o.require(std::abs(g.gap - 1.0) <= kGapTol && g.converged,
              fmt("unweighted deck-average gap at (n=%d,k=%d) = %.15g, expected 1", n, k, g.gap));
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  for (auto [n, k] : {std::pair{3, 3}, {4, 3}, {3, 4}}) {
    const GapReport g = kernel_gap(Kernel{KernelId::DeckAvgWeighted}, n, k);
    const double bound = double(n) / (6.0 * k);
    o.require(g.gap >= bound - kGapTol && g.converged,
              fmt("weighted gap at (n=%d,k=%d) = %.12g >= n/(6k) = %.12g", n, k, g.gap, bound));
    const InequalityResult r = check_form_inequality(Inequality::VarVsWeighted, n, k);
    o.require(r.min_eigenvalue >= -kGapTol, fmt("  min eigenvalue of (6k/n)D - Var = %.6g", r.min_eigenvalue));
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  std::vector<Lemma32Row> rows;
  const CheckReport rep = check_lemma32(6, 0.25, &rows);
  for (const auto& r : rows) {
    o.require(r.gap >= r.bound - kGapTol, fmt("delta=0.25 n=%d: gap %.12g >= 1 - sqrt(1 - p_delta) = %.12g", r.n, r.gap, r.bound));
    o.require(r.unit_defect <= kGapTol, fmt("  eigenvalue 1 on star-position functions, defect %.2g", r.unit_defect));
  }
  o.require(rep.passed(), "lemma suite report: " + std::to_string(rep.failure_count) + " failures");
  rows.clear();
  check_lemma32(6, 0.0, &rows);
  for (const auto& r : rows)
    o.require(std::abs(r.gap - 1.0) <= kGapTol, fmt("delta=0 n=%d: gap %.15g = 1", r.n, r.gap));
  return o;
}

Outcome criterion7() {
  Outcome o;
  struct Item {
    Inequality which;
    int k_lo, k_hi;
    const char* label;
  };
  for (const Item& it : {Item{Inequality::ModifiedVsTopSwap, 2, 2, "5 E2 - D2"}, Item{Inequality::BalancedVsModified, 2, 2, "C n D2 - F_delta"},
                         Item{Inequality::VarVsBalanced, 2, 2, "gamma F_delta - Var"}, Item{Inequality::VarVsDeckAvg, 2, 3, "DBAR - Var"}}) {
    double worst = 1e300;
    std::string where, failures;
    for (int n = 1; n <= 6; ++n)
      for (int k = it.k_lo; k <= it.k_hi; ++k) {
        const double ev = check_form_inequality(it.which, n, k).min_eigenvalue;
        if (ev < worst) {
          worst = ev;
          where = fmt("(n=%d,k=%d)", n, k);
        }
        if (ev < -kGapTol) failures += fmt(" (n=%d,k=%d):%.6g", n, k, ev);
      }
    o.require(worst >= -kGapTol, fmt("%s: min eigenvalue %.6g at %s", it.label, worst, where.c_str()));
    if (!failures.empty()) o.note("     negative at" + failures);
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  for (auto [k, m_max] : {std::pair{3, 6}, {4, 4}}) {
    for (int m = 0; m <= m_max; ++m) {
      const auto spec = K_spectrum(m, k);
      std::vector<double> want;
      for (int l = 0; l <= m; ++l) want.push_back(std::pow(-1.0 / (k - 1), l));
      std::sort(want.begin(), want.end(), std::greater<>());
      want.erase(std::unique(want.begin(), want.end(), [](double a, double b) { return std::abs(a - b) <= kGapTol; }), want.end());
      bool same = spec.size() == want.size();
      for (std::size_t i = 0; same && i < want.size(); ++i) same = std::abs(spec[i].value - want[i]) <= kGapTol;
      std::string got;
      for (const auto& e : spec) got += fmt(" %.6g(x%d)", std::abs(e.value) < 1e-12 ? 0.0 : e.value, e.multiplicity);
      o.require(same, fmt("k=%d m=%d: distinct eigenvalues", k, m) + got);
      if (k == 3 && m >= 2) {
        // second largest eigenvalue
        const double l2 = spec.size() > 1 ? spec[1].value : std::nan("");
        o.require(std::abs(l2 - 0.25) <= kGapTol, fmt("  k=3 m=%d: lambda_2 = %.12g, expected 1/4", m, l2));
      }
    }
  }
  for (int m = 1; m <= 5; ++m) {
    const double b = *projector_average_bound(m);
    o.require(b <= 0.5 + kGapTol, fmt("3 decks, m=%d: largest eigenvalue of the projector average %.12g <= 1/2", m, b));
  }
  return o;
}

Outcome criterion9() {
  Outcome o;
  for (const CheckReport& r : {check_inverse_identity(6), check_star_position_rule(6), check_decomposition(6),
                               check_pushforward(6)}) {
    o.require(r.passed(), fmt("%s over %s: %lld cases, %lld failures", r.id.c_str(), r.range.c_str(),
                              static_cast<long long>(r.cases), static_cast<long long>(r.failure_count)));
    for (const auto& w : r.witnesses) o.note("     " + w);
  }
  return o;
}

Outcome criterion10() {
  Outcome o;
  std::ifstream in(kGolden + "/remark31.csv");
  std::string line;
  std::getline(in, line);
  std::map<int, Rational> golden;
  while (std::getline(in, line)) {
    int n;
    long long num, den;
    if (std::sscanf(line.c_str(), "%d,%lld,%lld", &n, &num, &den) == 3) golden[n] = Rational(num, den);
  }
  o.require(golden.size() == 6, fmt("golden file holds %zu rows for n = 4..9", golden.size()));
  std::map<int, Rational> r;
  for (int n = 4; n <= 9; ++n) {
    r[n] = remark31_ratio(n).ratio;
    o.require(golden.count(n) && golden[n] == r[n], fmt("r(%d) = %s matches the golden value", n, str(r[n]).c_str()));
  }
  // brute-force forms over every state where the table is small
  for (int n = 4; n <= 6; ++n) {
    const StateSpace space(n, 2);
    std::vector<Card> target;
    for (int c = 1; c <= n; ++c) target.push_back(static_cast<Card>(c));
    target.push_back(kStar);
    std::vector<Rational> f(space.size(), Rational(0));
    f[space.rank(from_line(TwoDeckLine(target)))] = 1;
    const Rational brute = dirichlet_form(Form{FormId::E2RT}, space, f) / dirichlet_form(Form{FormId::E2}, space, f);
    o.require(brute == r[n], fmt("r(%d) by full enumeration = %s", n, str(brute).c_str()));
  }
  const Rational q = r[8] / r[4];
  o.require(q >= Rational(3, 2) && q <= Rational(5, 2), "r(8)/r(4) = " + str(q) + " in [3/2, 5/2]");
  return o;
}

Outcome criterion11() {
  Outcome o;
  int bad = 0, cases = 0;
  double worst = 1e300;
  for (auto [n, k] : capped_grid(kInversionCap)) {
    const double top = top_swap_gap(n, k).gap;
    const GapReport inv = kernel_gap(Kernel{KernelId::TopSwapInversion}, n, k);
    ++cases;
    worst = std::min(worst, inv.gap - top);
    if (inv.gap < top - kGapTol || !inv.converged) {
      ++bad;
      o.note(fmt("     (n=%d,k=%d): inversion %.12g < top-swap %.12g", n, k, inv.gap, top));
    }
  }
  o.require(bad == 0, fmt("gap(inversion) >= gap(top-swap) - 1e-9 over %d cases (k = 2..%d, states <= %llu); min difference %.6g",
                          cases, kMaxDecks, static_cast<unsigned long long>(kInversionCap), worst));
  return o;
}

Outcome criterion12() {
  Outcome o;
  const double exact = top_swap_gap(5, 2).relaxation_time;
  SimulationConfig c;
  c.kernel = Kernel{KernelId::TopSwapK};
  c.n = 5;
  c.k = 2;
  c.steps = 1000000;
  c.seed = 12;
  const RelaxationEstimate e = estimate_relaxation(simulate(c, Observable{ObservableId::AdjacencyCount, {}}));
  const double rel = std::abs(e.tau - exact) / exact;
  o.require(rel <= kMcGapTol, fmt("(n=5,k=2) adjacency_count tau = %.4f +- %.4f vs exact %.4f: rel. error %.3f <= %.2f",
                                  e.tau, e.stderr_tau, exact, rel, kMcGapTol));

  SimulationConfig s;
  s.kernel = Kernel{KernelId::TopSwapK};
  s.n = 4;
  s.k = 2;
  s.seed = 12;
  s.stride = 100;
  s.burn_in = 1000;
  s.start = Configuration(std::vector<std::vector<Card>>{{1, 2, 3, 4}, {}});
  const StateSpace space(4, 2);
  std::vector<double> counts(space.size(), 0.0);
  const std::int64_t samples = 100000;
  for (auto x : sample_states(s, samples)) counts[x] += 1;
  const double p = chi_square_pvalue(counts, std::vector<double>(space.size(), 1.0 / space.size()));
  o.require(p > kChiSquareP, fmt("(n=4,k=2) stationarity chi-square over %llu states, %lld samples every %lld steps: p = %.4f > %.3g",
                                 static_cast<unsigned long long>(space.size()), static_cast<long long>(samples),
                                 static_cast<long long>(s.stride), p, kChiSquareP));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"test-function closed forms", criterion1},
      {"gap upper bound", criterion2},
      {"linear relaxation-time law", criterion3},
      {"unweighted deck-average gap = 1", criterion4},
      {"weighted deck-average gap >= n/(6k)", criterion5},
      {"balanced-swap gap", criterion6},
      {"form inequalities are PSD", criterion7},
      {"transfer operator spectrum", criterion8},
      {"operator identities", criterion9},
      {"transposition/top-swap form ratio", criterion10},
      {"inversion variant dominates", criterion11},
      {"Monte Carlo validity", criterion12},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s  %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, secs);
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
