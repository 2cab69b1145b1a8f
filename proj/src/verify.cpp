#include "topswap/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace topswap {

namespace {

constexpr std::size_t kMaxWitnesses = 8;

std::string range_text(const char* var, int lo, int hi) {
  return std::string(var) + "=" + std::to_string(lo) + ".." + std::to_string(hi);
}

// All 2-deck lines of n cards.
std::vector<TwoDeckLine> all_lines(int n) {
  const StateSpace space(n, 2);
  std::vector<TwoDeckLine> out;
  out.reserve(space.size());
  for (StateIndex x = 0; x < space.size(); ++x) out.push_back(to_line(space.unrank(x)));
  return out;
}

OperatorMatrix pair_weighted_form(const StateSpace& space, const std::vector<std::pair<std::pair<int, int>, std::function<double(const Configuration&)>>>& terms) {
  const auto N = static_cast<std::int64_t>(space.size());
  std::vector<ProjectorTerm> out;
  for (const auto& [pair, weight] : terms) {
    ProjectorTerm t = conditioning_classes(space, Conditioning::frozen_pair(pair.first, pair.second));
    for (StateIndex x = 0; x < space.size(); ++x) t.weight[x] = weight(space.unrank(x));
    out.push_back(std::move(t));
  }
  return OperatorMatrix(OperatorKind::QuadraticForm, SparseMatrix(N, N), std::move(out));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

void CheckReport::fail(double violation, std::string witness) {
  ++failure_count;
  max_violation = std::max(max_violation, violation);
  if (witnesses.size() < kMaxWitnesses) witnesses.push_back(std::move(witness));
}

void CheckReport::absorb(const CheckReport& other) {
  cases += other.cases;
  failure_count += other.failure_count;
  max_violation = std::max(max_violation, other.max_violation);
  for (const auto& w : other.witnesses)
    if (witnesses.size() < kMaxWitnesses) witnesses.push_back(w);
}

// ---- identities ------------------------------------------------------------

CheckReport check_inverse_identity(int n_max) {
  CheckReport rep = CheckReport::make("inverse_identity", range_text("n", 1, n_max));
  for (int n = 1; n <= n_max; ++n)
    for (const TwoDeckLine& eta : all_lines(n)) {
      const int j = eta.star_position();
      for (int i = 1; i < j; ++i) {
        ++rep.cases;
        const TwoDeckLine back = apply_T(apply_T(eta, i, j), i, n + i - j + 2);
        if (!(back == eta))
          rep.fail(1, "eta=" + eta.to_string() + " i=" + std::to_string(i) + " j=" + std::to_string(j) +
                          " got " + back.to_string());
      }
    }
  return rep;
}

CheckReport check_star_position_rule(int n_max) {
  CheckReport rep = CheckReport::make("star_position_rule", range_text("n", 1, n_max));
  for (int n = 1; n <= n_max; ++n)
    for (const TwoDeckLine& eta : all_lines(n)) {
      const int x = eta.star_position();
      for (int i = 1; i <= n + 1; ++i)
        for (int j = i + 1; j <= n + 1; ++j) {
          if (!(i <= x && x <= j)) continue;
          ++rep.cases;
          const int expect = j > x ? n + i - j + 2 : i;
          const int got = apply_T(eta, i, j).star_position();
          if (got != expect)
            rep.fail(std::abs(got - expect), "eta=" + eta.to_string() + " i=" + std::to_string(i) +
                                                 " j=" + std::to_string(j) + " star " + std::to_string(got) +
                                                 " expected " + std::to_string(expect));
        }
    }
  return rep;
}

CheckReport check_decomposition(int n_max) {
  CheckReport rep = CheckReport::make("decomposition", range_text("n", 1, n_max));
  for (int n = 1; n <= n_max; ++n)
    for (const TwoDeckLine& eta : all_lines(n)) {
      const int l = eta.star_position();
      for (int i = 1; i < l; ++i)
        for (int j = l + 1; j <= n + 1; ++j) {
          ++rep.cases;
          const TwoDeckLine lhs = apply_E(eta, i, j);
          const TwoDeckLine rhs = apply_T_extended(apply_T(eta, i, j), i + 1, n + i - l + 3);
          if (!(lhs == rhs))
            rep.fail(1, "eta=" + eta.to_string() + " i=" + std::to_string(i) + " j=" + std::to_string(j) +
                            " E=" + lhs.to_string() + " TT=" + rhs.to_string());
        }
    }
  return rep;
}

CheckReport check_pushforward(int n_max, std::uint64_t seed) {
  CheckReport rep = CheckReport::make("pushforward", range_text("n", 1, n_max));
  std::int64_t reverse_cases = 0, reverse_into_i = 0;
  Rng rng(seed);
  for (int n = 1; n <= n_max; ++n) {
    const StateSpace space(n, 2);
    const auto N = space.size();
    std::vector<TwoDeckLine> lines = all_lines(n);

    // bijection Omega^j -> Omega^i for i < j, i.e. the averaging identity on every indicator g
    for (int i = 1; i <= n + 1; ++i)
      for (int j = i + 1; j <= n + 1; ++j) {
        std::vector<int> hits(N, 0);
        for (const auto& eta : lines) {
          if (eta.star_position() != j) continue;
          ++hits[space.rank(from_line(apply_T(eta, i, j)))];
        }
        for (StateIndex z = 0; z < N; ++z) {
          ++rep.cases;
          const int expect = lines[z].star_position() == i ? 1 : 0;
          if (hits[z] != expect)
            rep.fail(std::abs(hits[z] - expect), "zeta=" + lines[z].to_string() + " i=" + std::to_string(i) +
                                                     " j=" + std::to_string(j) + " preimages " +
                                                     std::to_string(hits[z]));
        }
      }
    // i > j is not covered by the identity; record where the image lands
    for (const auto& eta : lines) {
      const int j = eta.star_position();
      for (int i = j + 1; i <= n + 1; ++i) {
        ++reverse_cases;
        if (apply_T(eta, i, j).star_position() == i) ++reverse_into_i;
      }
    }

    // mu[Ag | x*] = mu[g] on a random +-1 table, exactly
    std::vector<Rational> g(N);
    Rational total = 0;
    for (auto& v : g) {
      v = rng.uniform_int(0, 1) ? 1 : -1;
      total += v;
    }
    const Rational mu_g = total / static_cast<std::int64_t>(N);
    std::vector<Rational> class_sum(n + 2, 0);
    std::vector<std::int64_t> class_count(n + 2, 0);
    for (StateIndex x = 0; x < N; ++x) {
      const TwoDeckLine& eta = lines[x];
      const int s = eta.star_position();
      Rational ag = 0;
      for (int i = 1; i <= n + 1; ++i) ag += g[space.rank(from_line(apply_T(eta, i, s)))];
      class_sum[s] += ag / (n + 1);
      ++class_count[s];
    }
    for (int s = 1; s <= n + 1; ++s) {
      ++rep.cases;
      const Rational lhs = class_sum[s] / class_count[s];
      if (lhs != mu_g)
        rep.fail(std::abs(static_cast<double>(lhs - mu_g)),
                 "n=" + std::to_string(n) + " x*=" + std::to_string(s) + " mu[Ag|x*]=" + lhs.str() +
                     " mu[g]=" + mu_g.str());
    }
  }
  rep.note = "i>j: " + std::to_string(reverse_into_i) + " of " + std::to_string(reverse_cases) +
             " images land in class i (not asserted)";
  return rep;
}

// ---- constants -------------------------------------------------------------

double c_delta_times_n(int n, double delta) {
  const double nn = n;
  return (2.0 + 9.0 * nn * nn / (delta * (1.0 - delta) * (nn + 1) * (nn + 1))) * (nn + 2) * (nn + 2) / nn;
}

double gamma_delta(int n, double delta) { return BalanceParams::make(n, delta).gamma_delta; }

double chain_constant_k(int n, double delta, bool transpositions) {
  double best = 0;
  for (int m = 1; m <= std::max(1, n); ++m) {
    const double c = c_delta_times_n(m, delta) / m * gamma_delta(m, delta);
    best = std::max(best, transpositions ? c : 5.0 * c);
  }
  return 12.0 * best;
}

CheckReport check_constants(double delta) {
  CheckReport rep = CheckReport::make("constants", "delta=" + fmt(delta) + ", n=10..100000");
  rep.tolerance = 1e-12;
  const double c_lim = 2.0 + 9.0 / (delta * (1.0 - delta));
  const double g_lim = 1.0 / (1.0 - std::sqrt(2.0 * delta));
  struct Quantity {
    const char* name;
    std::function<double(int)> value;
    double limit;
    std::optional<double> envelope;  // stated asymptotic bound
  };
  std::vector<Quantity> qs = {
      {"C_delta", [&](int n) { return c_delta_times_n(n, delta) / n; }, c_lim, std::nullopt},
      {"gamma_delta", [&](int n) { return gamma_delta(n, delta); }, g_lim, std::nullopt},
      {"5*C_delta*gamma_delta", [&](int n) { return 5.0 * c_delta_times_n(n, delta) / n * gamma_delta(n, delta); },
       5.0 * c_lim * g_lim, 875.0},
      {"C_delta*gamma_delta", [&](int n) { return c_delta_times_n(n, delta) / n * gamma_delta(n, delta); },
       c_lim * g_lim, 175.0},
  };
  if (delta == 0.25) {
    qs[0].envelope = 50.0;
    qs[1].envelope = std::sqrt(2.0) / (std::sqrt(2.0) - 1.0);
  }
  const std::vector<int> fit_ns = {10, 20, 50, 100};
  const std::vector<int> test_ns = {1000, 10000, 100000};
  for (const auto& q : qs) {
    // c fitted on moderate n; the tail must stay inside limit +- c/n
    double c = 0;
    for (int n : fit_ns) c = std::max(c, n * std::abs(q.value(n) - q.limit));
    for (int n : test_ns) {
      ++rep.cases;
      const double dev = std::abs(q.value(n) - q.limit);
      if (dev > 1.5 * c / n + 1e-12)
        rep.fail(dev - c / n, std::string(q.name) + " n=" + std::to_string(n) + " value=" + fmt(q.value(n)) +
                                  " limit=" + fmt(q.limit) + " slack c/n=" + fmt(c / n));
    }
    if (q.envelope) {
      ++rep.cases;
      if (q.limit > *q.envelope + 1e-12)
        rep.fail(q.limit - *q.envelope, std::string(q.name) + " limit " + fmt(q.limit) + " exceeds " + fmt(*q.envelope));
    }
    rep.note += std::string(q.name) + "->" + fmt(q.limit) + " (c=" + fmt(c) + "); ";
  }
  return rep;
}

// ---- inequalities ------------------------------------------------------------

const char* inequality_name(Inequality which) {
  switch (which) {
    case Inequality::ModifiedVsTopSwap: return "d2_le_5e2";
    case Inequality::BalancedVsModified: return "fdelta_le_cn_d2";
    case Inequality::VarVsBalanced: return "var_le_gamma_fdelta";
    case Inequality::VarVsDeckAvg: return "var_le_dbar";
    case Inequality::VarVsWeighted: return "var_le_6k_over_n_d";
    case Inequality::Triple: return "triple_deck";
    case Inequality::TopSwapK: return "var_le_c_nk_ek";
    case Inequality::TranspositionK: return "var_le_c_nk_ekt";
    case Inequality::Inversion: return "inversion_dominates";
  }
  return "unknown";
}

std::optional<Inequality> parse_inequality_name(std::string_view name) {
  for (Inequality w : {Inequality::ModifiedVsTopSwap, Inequality::BalancedVsModified, Inequality::VarVsBalanced, Inequality::VarVsDeckAvg,
                       Inequality::VarVsWeighted, Inequality::Triple, Inequality::TopSwapK, Inequality::TranspositionK,
                       Inequality::Inversion})
    if (name == inequality_name(w)) return w;
  return std::nullopt;
}

double min_eigenvalue_mean_zero(const OperatorMatrix& form, const EigenOptions& eigen) {
  const auto N = form.size();
  if (N <= 600) return dense_smallest_on_mean_zero(form.dense_laplacian());
  const EigenResult r = smallest_on_mean_zero(
      [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out = form.apply_laplacian(in); }, N, eigen);
  if (!r.converged) throw std::runtime_error("eigensolver did not converge in the PSD check");
  return r.value;
}

OperatorMatrix laplacian_form(const OperatorMatrix& kernel) {
  const auto N = kernel.size();
  switch (kernel.kind()) {
    case OperatorKind::QuadraticForm: return kernel;
    case OperatorKind::Stochastic: {
      SparseMatrix I(N, N);
      I.setIdentity();
      return OperatorMatrix(OperatorKind::QuadraticForm, SparseMatrix(I - kernel.sparse()));
    }
    case OperatorKind::Generator:
      return OperatorMatrix(OperatorKind::QuadraticForm, SparseMatrix(-kernel.sparse()), kernel.projectors());
  }
  return kernel;
}

InequalityResult check_form_inequality(Inequality which, int n, int k, double delta, const MatrixCaps& caps,
                                       const EigenOptions& eigen) {
  InequalityResult out;
  CheckReport& rep = out.report;
  rep.id = inequality_name(which);
  rep.range = "n=" + std::to_string(n) + ", k=" + std::to_string(k);
  rep.tolerance = 1e-9;
  const Form var{FormId::Var};
  std::optional<OperatorMatrix> diff;

  switch (which) {
    case Inequality::ModifiedVsTopSwap:
      diff = OperatorMatrix::combine(5.0, form_operator({FormId::E2}, n, 2, caps), -1.0,
                                     form_operator({FormId::D2}, n, 2, caps));
      break;
    case Inequality::BalancedVsModified:
      diff = OperatorMatrix::combine(c_delta_times_n(n, delta), form_operator({FormId::D2}, n, 2, caps), -1.0,
                                     form_operator({FormId::FDelta, delta}, n, 2, caps));
      break;
    case Inequality::VarVsBalanced:
      diff = OperatorMatrix::combine(gamma_delta(n, delta), form_operator({FormId::FDelta, delta}, n, 2, caps), -1.0,
                                     form_operator(var, n, 2, caps));
      break;
    case Inequality::VarVsDeckAvg:
      diff = OperatorMatrix::combine(1.0, form_operator({FormId::DBar}, n, k, caps), -1.0,
                                     form_operator(var, n, k, caps));
      break;
    case Inequality::VarVsWeighted:
      if (n == 0) throw std::invalid_argument("(6k/n) needs n >= 1");
      diff = OperatorMatrix::combine(6.0 * k / n, form_operator({FormId::DWeighted}, n, k, caps), -1.0,
                                     form_operator(var, n, k, caps));
      break;
    case Inequality::Triple: {
      if (k != 3) throw std::invalid_argument("the triple-deck inequality is checked on 3 decks");
      const StateSpace space(n, 3);
      // for each choice of the deck l entering the left side: RHS - LHS over the three pairs
      for (int l = 0; l < 3; ++l) {
        const int i = (l + 1) % 3, j = (l + 2) % 3;
        auto pair_size = [](int a, int b) {
          return [=](const Configuration& s) { return static_cast<double>(s.deck_size(a) + s.deck_size(b)); };
        };
        const OperatorMatrix form = pair_weighted_form(
            space, {{{i, j}, [=](const Configuration& s) {
                       return s.deck_size(i) + s.deck_size(j) - 0.5 * s.deck_size(l);
                     }},
                    {{i, l}, pair_size(i, l)},
                    {{j, l}, pair_size(j, l)}});
        const double lam = min_eigenvalue_mean_zero(form, eigen);
        ++rep.cases;
        out.min_eigenvalue = l == 0 ? lam : std::min(out.min_eigenvalue, lam);
        if (lam < -rep.tolerance)
          rep.fail(-lam, "l=" + std::to_string(l) + " min eigenvalue " + fmt(lam));
      }
      return out;
    }
    case Inequality::TopSwapK:
    case Inequality::TranspositionK: {
      const bool tr = which == Inequality::TranspositionK;
      const OperatorMatrix ek = form_operator({tr ? FormId::EKT : FormId::EK}, n, k, caps);
      const double c = chain_constant_k(n, delta, tr);
      out.chain_constant = c;
      const GapReport g = spectral_gap(ek, eigen);
      out.smallest_constant = g.gap > 0 ? 1.0 / (g.gap * (n + k)) : std::numeric_limits<double>::infinity();
      diff = OperatorMatrix::combine(c * (n + k), ek, -1.0, form_operator(var, n, k, caps));
      break;
    }
    case Inequality::Inversion: {
      const OperatorMatrix inv = laplacian_form(build_matrix({KernelId::TopSwapInversion}, n, k, caps));
      const OperatorMatrix top = laplacian_form(build_matrix({KernelId::TopSwapK}, n, k, caps));
      diff = OperatorMatrix::combine(1.0, inv, -1.0, top);
      break;
    }
  }
  out.min_eigenvalue = min_eigenvalue_mean_zero(*diff, eigen);
  ++rep.cases;
  if (out.min_eigenvalue < -rep.tolerance)
    rep.fail(-out.min_eigenvalue, "min eigenvalue of RHS - LHS = " + fmt(out.min_eigenvalue));
  if (out.smallest_constant && out.chain_constant && *out.smallest_constant > *out.chain_constant) {
    ++rep.cases;
    rep.fail(*out.smallest_constant - *out.chain_constant,
             "smallest constant " + fmt(*out.smallest_constant) + " exceeds " + fmt(*out.chain_constant));
  }
  return out;
}

// ---- balanced two-deck chain ------------------------------------------------

CheckReport check_lemma32(int n_max, double delta, std::vector<Lemma32Row>* rows) {
  CheckReport rep = CheckReport::make("lemma32", range_text("n", 1, n_max) + ", delta=" + fmt(delta));
  rep.tolerance = 1e-9;
  for (int n = 1; n <= n_max; ++n) {
    const Kernel kernel{KernelId::BalancedSwap, delta};
    const OperatorMatrix L = build_matrix(kernel, n, 2);
    const GapReport g = spectral_gap(L);
    const double p = delta == 0.0 ? 1.0 : static_cast<double>(p_delta_exact(n, delta));
    const double bound = 1.0 - std::sqrt(1.0 - p);

    const StateSpace space(n, 2);
    Eigen::VectorXd phi(static_cast<Eigen::Index>(space.size()));
    for (StateIndex x = 0; x < space.size(); ++x) phi[x] = space.unrank(x).deck_size(0) + 1;
    phi.array() -= phi.mean();
    const double unit_defect = (L.apply_laplacian(phi) - phi).cwiseAbs().maxCoeff();

    if (rows) rows->push_back({n, delta, g.gap, bound, unit_defect});
    const std::string where = "n=" + std::to_string(n) + " ";
    ++rep.cases;
    if (!g.converged) rep.fail(g.residual, where + "eigensolver did not converge");
    ++rep.cases;
    if (g.gap < bound - rep.tolerance) rep.fail(bound - g.gap, where + "gap " + fmt(g.gap) + " < " + fmt(bound));
    ++rep.cases;
    if (unit_defect > rep.tolerance) rep.fail(unit_defect, where + "phi(x*) is not an eigenfunction for 1");
    if (delta == 0.0) {
      ++rep.cases;
      if (std::abs(g.gap - 1.0) > rep.tolerance) rep.fail(std::abs(g.gap - 1.0), where + "gap " + fmt(g.gap) + " != 1");
    }
  }
  return rep;
}

// ---- ratio example -------------------------------------------------------------

RatioRow remark31_ratio(int n) {
  if (n < 1) throw std::invalid_argument("remark31_ratio needs n >= 1");
  std::vector<Card> symbols;
  for (int c = 1; c <= n; ++c) symbols.push_back(static_cast<Card>(c));
  symbols.push_back(kStar);
  const TwoDeckLine eta(symbols);
  // both kernels are symmetric, so moves into the support equal moves out of it:
  // sum_x sum_ij (f(y) - f(x))^2 = 2 #{(i,j) : move(eta) != eta}
  std::int64_t out_t = 0, out_e = 0;
  for (int i = 1; i <= n + 1; ++i)
    for (int j = 1; j <= n + 1; ++j) {
      if (!(apply_T(eta, i, j) == eta)) ++out_t;
      if (!(apply_E(eta, i, j) == eta)) ++out_e;
    }
  const Rational N = static_cast<Rational>(state_count(n, 2));
  const Rational coef(1, 2 * (n + 2) * (n + 2));
  RatioRow row{n, coef * 2 * out_t / N, coef * 2 * out_e / N, 0};
  row.ratio = row.e2_rt / row.e2;
  return row;
}

CheckReport check_remark31(int n_lo, int n_hi, std::vector<RatioRow>* rows) {
  CheckReport rep = CheckReport::make("remark31", range_text("n", n_lo, n_hi));
  std::map<int, Rational> r;
  for (int n = n_lo; n <= n_hi; ++n) {
    RatioRow row = remark31_ratio(n);
    ++rep.cases;
    if (row.e2 <= 0 || row.e2_rt <= 0) rep.fail(1, "n=" + std::to_string(n) + " a form vanishes");
    r[n] = row.ratio;
    if (rows) rows->push_back(row);
  }
  for (int n = n_lo; 2 * n <= n_hi; ++n) {
    ++rep.cases;
    const double growth = static_cast<double>(r[2 * n] / r[n]);
    if (growth < 1.5 || growth > 2.5)
      rep.fail(std::max(1.5 - growth, growth - 2.5),
               "r(" + std::to_string(2 * n) + ")/r(" + std::to_string(n) + ") = " + fmt(growth));
  }
  return rep;
}

}  // namespace topswap
