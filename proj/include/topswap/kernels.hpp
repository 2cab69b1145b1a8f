#pragma once

// Transformation operators and one-step transition laws for every chain in
// the top-swap family.
//
// Line operators take 1-based positions 1..n+1 on a TwoDeckLine. k-deck
// operators take 1-based positions 1..n+k that scan decks in label order;
// within a deck the first slot is the extra (empty-top) slot and slot t >= 2
// selects the card at height t-1 counted from the bottom.

#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "topswap/config_space.hpp"
#include "topswap/rng.hpp"

namespace topswap {

enum class KernelId {
  TopSwapK,                   // k-deck top-swap, (n+k)^2 ordered slot pairs
  TopSwap2Line,               // T_{i,j} on the line, (n+1)^2 pairs over (n+2)^2
  ModifiedTransposition,      // E-tilde
  ConstrainedTransposition2,  // E-tilde^T on the line
  ConstrainedTranspositionK,  // E_{r,s} across extended decks
  PureTransposition2,         // E_{i,j} on the line, no deck constraint
  BalancedSwap,               // generator: T_{i,x*} moves + constrained resampling
  BalancedSwapT,              // generator: E_{i,x*} moves + constrained resampling
  DeckAvgUnweighted,          // generator: rate 1/k per ordered deck pair
  DeckAvgWeighted,            // generator: rate (n_i+n_j)/k per ordered deck pair
  TopSwapInversion,           // top-swap, same-deck picks reverse an interval
};

inline constexpr KernelId kAllKernels[] = {
    KernelId::TopSwapK,          KernelId::TopSwap2Line,      KernelId::ModifiedTransposition,
    KernelId::ConstrainedTransposition2, KernelId::ConstrainedTranspositionK,
    KernelId::PureTransposition2, KernelId::BalancedSwap,     KernelId::BalancedSwapT,
    KernelId::DeckAvgUnweighted, KernelId::DeckAvgWeighted,   KernelId::TopSwapInversion};

struct Kernel {
  KernelId id = KernelId::TopSwapK;
  /// Balance threshold for the balanced-swap generators. 0 means no constraint.
  double delta = 0.25;
};

std::string_view kernel_name(KernelId id);
std::optional<KernelId> parse_kernel_name(std::string_view name);
bool is_continuous(KernelId id);
/// Kernels defined through the line encoding; they require k == 2.
bool is_line_kernel(KernelId id);
/// Throws std::invalid_argument when the kernel cannot act on (n, k).
void require_compatible(const Kernel& kernel, int n, int k);

// ---- line operators ------------------------------------------------------

TwoDeckLine apply_T(const TwoDeckLine& line, int i, int j);
/// Accepts j = n+2 meaning "move the top from i upward onto deck 2" (requires i <= x*).
TwoDeckLine apply_T_extended(const TwoDeckLine& line, int i, int j);
TwoDeckLine apply_E(const TwoDeckLine& line, int i, int j);
TwoDeckLine apply_E_tilde(const TwoDeckLine& line, int i, int j);
TwoDeckLine apply_E_tilde_T(const TwoDeckLine& line, int i, int j);

// ---- k-deck operators ----------------------------------------------------

struct Slot {
  int deck;
  int height;  // 0 for the extra slot, else 1-based height of the selected card
};

Slot slot_at(const Configuration& state, int position);

Configuration apply_top_swap_k(const Configuration& state, int r, int s);
/// Transposition across extended decks. For decks a < b the pair acts on the
/// line (deck a, *, deck b) with both extra slots standing for the star, so
/// k = 2 reproduces E-tilde^T.
Configuration apply_constrained_transposition_k(const Configuration& state, int r, int s);
/// Top-swap across decks; within a deck the inclusive interval between the
/// two selected cards is reversed (the extra slot stands for the top card).
Configuration apply_inversion_variant(const Configuration& state, int r, int s);
/// Redistributes the cards of decks i and j uniformly over all (m+1)! joint arrangements.
Configuration deck_average_resample(const Configuration& state, int i, int j, Rng& rng);

// ---- transition laws -----------------------------------------------------

struct TransitionDistribution {
  bool continuous = false;
  /// Successors merged by state. Discrete: probabilities summing to 1 (holding
  /// included). Continuous: rates, with the state's own entry carrying the
  /// diagonal so the row sums to 0.
  std::vector<std::pair<Configuration, double>> entries;
};

TransitionDistribution transition_distribution(const Kernel& kernel, const Configuration& state);

using MoveSink = std::function<void(const Configuration&, double)>;

/// Jump part of a kernel: every discrete move, or the non-resampling moves of
/// a generator (rates). Unmerged; repeated successors are emitted repeatedly.
void for_each_jump(const Kernel& kernel, const Configuration& state, const MoveSink& sink);

/// Total-rate bound used to uniformize a generator; 1 for discrete kernels.
double uniformization_rate(const Kernel& kernel, int n, int k);

/// One step of the discrete kernel, or of the uniformized generator.
void step(const Kernel& kernel, Configuration& state, Rng& rng);

}  // namespace topswap
