#pragma once

// Exhaustive checks of the operator identities and Dirichlet-form
// inequalities behind the relaxation-time bounds.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "topswap/spectral.hpp"

namespace topswap {

struct CheckReport {
  std::string id;
  std::string range;
  std::int64_t cases = 0;
  std::int64_t failure_count = 0;
  std::vector<std::string> witnesses;  // first few failures, with full state dumps
  double max_violation = 0;
  double tolerance = 0;
  std::string note;

  static CheckReport make(std::string id, std::string range) {
    CheckReport r;
    r.id = std::move(id);
    r.range = std::move(range);
    return r;
  }

  bool passed() const { return failure_count == 0; }
  void fail(double violation, std::string witness);
  void absorb(const CheckReport& other);
};

// ---- identities (exact) ----------------------------------------------------

/// T_{i,n+i-j+2} T_{i,j} eta = eta for x*(eta) = j, i < j.
CheckReport check_inverse_identity(int n_max);
/// New star position after T_{i,j}: n+i-j+2 when j > x*, i when j = x*.
CheckReport check_star_position_rule(int n_max);
/// E_{i,j} eta = T_{i+1,n+i-l+3} T_{i,j} eta for i < x*(eta) = l < j, extended index included.
CheckReport check_decomposition(int n_max);
/// T_{i,j} maps the star class j bijectively onto class i (i < j), and mu[Ag | x*] = mu[g].
CheckReport check_pushforward(int n_max, std::uint64_t seed = 7);

// ---- constants -------------------------------------------------------------

/// C_delta * n = {2 + 9n^2/(delta(1-delta)(n+1)^2)} (n+2)^2 / n
double c_delta_times_n(int n, double delta);
double gamma_delta(int n, double delta);
/// Explicit constant C in Var <= C (n+k) E_k from the 2-deck chain (top-swap: 12 max_m 5 C gamma;
/// constrained transpositions: 12 max_m C gamma), maximised over 2-deck sizes m = 1..n.
double chain_constant_k(int n, double delta, bool transpositions);

CheckReport check_constants(double delta);

// ---- inequalities (PSD) ----------------------------------------------------

enum class Inequality {
  ModifiedVsTopSwap,   // D2 <= 5 E2
  BalancedVsModified,  // F_delta <= C_delta n D2
  VarVsBalanced,       // Var <= gamma_delta F_delta
  VarVsDeckAvg,        // Var <= DBAR
  VarVsWeighted,       // Var <= (6k/n) D
  Triple,              // (1/2) nu[n_l Var_ij] <= sum of weighted pair variances, 3 decks
  TopSwapK,            // Var <= C (n+k) E_k
  TranspositionK,      // Var <= C (n+k) E_k^T
  Inversion,           // inversion-variant Laplacian dominates the top-swap Laplacian
};

const char* inequality_name(Inequality which);
std::optional<Inequality> parse_inequality_name(std::string_view name);

struct InequalityResult {
  CheckReport report;
  double min_eigenvalue = 0;              // of RHS - LHS on mean-zero functions
  std::optional<double> smallest_constant;  // TopSwapK / TranspositionK: tau(form)/(n+k)
  std::optional<double> chain_constant;
};

InequalityResult check_form_inequality(Inequality which, int n, int k, double delta = 0.25,
                                       const MatrixCaps& caps = {}, const EigenOptions& eigen = {});

/// Minimum eigenvalue of a quadratic form on mean-zero functions.
double min_eigenvalue_mean_zero(const OperatorMatrix& form, const EigenOptions& eigen = {});

/// I - P (or -L) of a kernel as a quadratic form.
OperatorMatrix laplacian_form(const OperatorMatrix& kernel);

// ---- balanced two-deck chain and the ratio example ----------------------------

struct Lemma32Row {
  int n;
  double delta;
  double gap;
  double bound;            // 1 - sqrt(1 - p_delta)
  double unit_defect;      // max |(-L)phi - phi| for phi(x*) of mean zero
};

CheckReport check_lemma32(int n_max, double delta, std::vector<Lemma32Row>* rows = nullptr);

struct RatioRow {
  int n;
  Rational e2;
  Rational e2_rt;
  Rational ratio;
};

/// r(n) = E2_RT(f)/E2(f) for f the indicator of (1,2,...,n,*); checks r(2n)/r(n) in [1.5, 2.5].
CheckReport check_remark31(int n_lo, int n_hi, std::vector<RatioRow>* rows = nullptr);
RatioRow remark31_ratio(int n);

}  // namespace topswap
