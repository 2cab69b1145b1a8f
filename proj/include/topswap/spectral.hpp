#pragma once

// Exact operators of every chain and Dirichlet form over the ranked state
// space, spectral gaps, variances and conditional variances, and the
// single-deck transfer operator K.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "topswap/config_space.hpp"
#include "topswap/eigensolver.hpp"
#include "topswap/kernels.hpp"
#include "topswap/operator_matrix.hpp"

namespace topswap {

struct MatrixCaps {
  StateIndex dense = 2000;        // explicit dense work (to_dense, dense eigensolves)
  StateIndex sparse = 2000000;    // sparse assembly
};

class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& what, std::string flag) : std::runtime_error(what), flag_(std::move(flag)) {}
  const std::string& flag() const { return flag_; }

 private:
  std::string flag_;
};

/// Number of assembly threads; 0 means available parallelism.
struct Parallelism {
  int workers = 0;
  int resolved() const;
};

/// Kernel operator over the ranked space: P for discrete kernels, L for
/// generators (resampling kept as projector terms).
OperatorMatrix build_matrix(const Kernel& kernel, int n, int k, const MatrixCaps& caps = {},
                            Parallelism par = {});
/// Same operator assembled row by row from transition_distribution (fully sparse, no
/// projector terms). Slow; used to cross-check build_matrix.
OperatorMatrix build_matrix_explicit(const Kernel& kernel, int n, int k, const MatrixCaps& caps = {});

enum class FormId { E2, D2, E2RT, FDelta, FDeltaT, DBar, DWeighted, EK, EKT, Var };

struct Form {
  FormId id = FormId::EK;
  double delta = 0.25;  // FDelta, FDeltaT
};

const char* form_name(FormId id);
std::optional<FormId> parse_form_name(std::string_view name);
/// Forms on 2-deck lines need k == 2.
bool form_needs_two_decks(FormId id);

/// Operator M of a form: Q(f) = f^T M f / N.
OperatorMatrix form_operator(const Form& form, int n, int k, const MatrixCaps& caps = {}, Parallelism par = {});

/// Direct evaluation of a form from its defining sum, in double or exact rational arithmetic.
template <class T>
T dirichlet_form(const Form& form, const StateSpace& space, const std::vector<T>& f);

extern template double dirichlet_form<double>(const Form&, const StateSpace&, const std::vector<double>&);
extern template Rational dirichlet_form<Rational>(const Form&, const StateSpace&, const std::vector<Rational>&);

template <class T>
T mean(const std::vector<T>& f);
template <class T>
T variance(const std::vector<T>& f);

extern template double mean<double>(const std::vector<double>&);
extern template Rational mean<Rational>(const std::vector<Rational>&);
extern template double variance<double>(const std::vector<double>&);
extern template Rational variance<Rational>(const std::vector<Rational>&);

struct Conditioning {
  enum class Kind { StarPosition, FrozenPair, DeckContent };
  Kind kind = Kind::StarPosition;
  int i = 0;  // FrozenPair: the two decks left free; DeckContent: the deck conditioned on
  int j = 1;

  static Conditioning star() { return {Kind::StarPosition, 0, 1}; }
  static Conditioning frozen_pair(int a, int b) { return {Kind::FrozenPair, a, b}; }
  static Conditioning deck_content(int d) { return {Kind::DeckContent, d, d}; }
};

/// Class id per state for a conditioning; ids are dense in [0, classes).
ProjectorTerm conditioning_classes(const StateSpace& space, const Conditioning& cond);
/// Conditional variance table, constant on each conditioning class.
std::vector<double> conditional_variance(const StateSpace& space, const std::vector<double>& f,
                                         const Conditioning& cond);
/// Conditional mean table.
std::vector<double> conditional_mean(const StateSpace& space, const std::vector<double>& f, const Conditioning& cond);

/// Exact k-deck top-swap form, mean and variance of a function of the deck sizes
/// alone, summed over deck-size compositions (each composition carries n! states).
Rational lumped_size_form_ek(int n, int k, const std::function<Rational(const std::vector<int>&)>& g);
Rational lumped_size_mean(int n, int k, const std::function<Rational(const std::vector<int>&)>& g);
Rational lumped_size_variance(int n, int k, const std::function<Rational(const std::vector<int>&)>& g);

struct GapReport {
  std::string chain;
  int n = 0;
  int k = 0;
  StateIndex state_count = 0;
  double gap = 0;
  double relaxation_time = 0;
  double residual = 0;
  double gap_times_nk = 0;
  std::int64_t matvecs = 0;
  bool converged = false;
};

/// Smallest nonzero eigenvalue of the Laplacian (I - P, -L or M) on mean-zero functions.
GapReport spectral_gap(const OperatorMatrix& matrix, const EigenOptions& options = {});
GapReport kernel_gap(const Kernel& kernel, int n, int k, const MatrixCaps& caps = {}, const EigenOptions& options = {},
                     Parallelism par = {});

/// sup_f Var(f)/Form(f); +infinity when the form vanishes on a nonconstant function.
double rayleigh_relaxation(const Form& form, int n, int k, const MatrixCaps& caps = {},
                           const EigenOptions& options = {});

/// Row-stochastic K(alpha, beta) = P(deck 0 holds beta | deck 1 holds alpha) under the uniform
/// law of m cards in k decks, over all ordered deck contents (index order of `contents`).
struct KMatrix {
  std::vector<std::vector<Card>> contents;
  Eigen::MatrixXd K;
  Eigen::VectorXd marginal;  // law of one deck's contents
};
KMatrix build_K_matrix(int m, int k);

struct SpectrumEntry {
  double value;
  int multiplicity;
};
/// Eigenvalues of K sorted descending, clustered within `cluster_tol`.
std::vector<SpectrumEntry> K_spectrum(int m, int k, double cluster_tol = 1e-9);

/// Largest eigenvalue of (P_0 + P_1 + P_2)/3 on mean-zero functions of m cards in 3 decks,
/// P_d the conditional expectation given deck d's contents. nullopt when m = 0.
std::optional<double> projector_average_bound(int m, const EigenOptions& options = {});

}  // namespace topswap
