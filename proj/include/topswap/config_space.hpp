#pragma once

// State spaces of the top-swap family: k labeled decks holding n labeled
// cards (each deck ordered bottom-to-top), and the 2-deck "line" encoding in
// which a star symbol marks the boundary between deck 1 and deck 2.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "topswap/rng.hpp"

namespace topswap {

using Card = std::uint16_t;
inline constexpr Card kStar = 0;

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using StateIndex = std::uint64_t;

/// n cards in k decks. Decks are indexed 0..k-1 and stored bottom-to-top.
class Configuration {
 public:
  /// Validates that the labels form a permutation of 1..n; throws std::invalid_argument.
  explicit Configuration(const std::vector<std::vector<Card>>& decks);

  /// Builds from concatenated deck contents and k+1 deck boundaries.
  /// Permutation validity is asserted, not checked, so kernels can use it on hot paths.
  static Configuration assemble(std::vector<Card> cards, std::vector<std::uint32_t> bounds);

  int n() const { return static_cast<int>(cards_.size()); }
  int k() const { return static_cast<int>(bounds_.size()) - 1; }
  int deck_size(int d) const { return static_cast<int>(bounds_[d + 1] - bounds_[d]); }
  std::span<const Card> deck(int d) const {
    return {cards_.data() + bounds_[d], static_cast<std::size_t>(deck_size(d))};
  }
  /// All cards, deck 0 first, each deck bottom-to-top.
  std::span<const Card> cards() const { return cards_; }
  std::span<const std::uint32_t> bounds() const { return bounds_; }
  std::vector<std::vector<Card>> decks() const;

  bool operator==(const Configuration&) const = default;

  /// e.g. "[3 4|5 2 1 6]"
  std::string to_string() const;

 private:
  Configuration(std::vector<Card> cards, std::vector<std::uint32_t> bounds)
      : cards_(std::move(cards)), bounds_(std::move(bounds)) {}

  std::vector<Card> cards_;
  std::vector<std::uint32_t> bounds_;
};

/// Length n+1 sequence: deck 1 bottom-to-top, the star, deck 2 bottom-to-top.
/// Positions are 1-based, as in the operator definitions built on it.
class TwoDeckLine {
 public:
  explicit TwoDeckLine(std::vector<Card> symbols);

  int n() const { return static_cast<int>(symbols_.size()) - 1; }
  int star_position() const { return star_; }
  Card at(int position) const { return symbols_[position - 1]; }
  std::span<const Card> symbols() const { return symbols_; }

  bool operator==(const TwoDeckLine&) const = default;

  /// e.g. "(3,4,*,5,2,1,6)"
  std::string to_string() const;

 private:
  struct Trusted {};
  TwoDeckLine(Trusted, std::vector<Card> symbols, int star)
      : symbols_(std::move(symbols)), star_(star) {}
  friend TwoDeckLine make_line_unchecked(std::vector<Card> symbols, int star);

  std::vector<Card> symbols_;
  int star_ = 1;
};

/// Skips validation; star must be the 1-based position of kStar.
TwoDeckLine make_line_unchecked(std::vector<Card> symbols, int star);

TwoDeckLine to_line(const Configuration& state);
Configuration from_line(const TwoDeckLine& line);

/// (n+k-1)!/(k-1)!
BigInt state_count(int n, int k);

/// Ranks states by the lexicographic order of their separator word: the
/// cards of deck 0, a separator, the cards of deck 1, ..., with the separator
/// ordered before every card. Ranking is a multiset-permutation rank.
class StateSpace {
 public:
  /// Throws std::invalid_argument if k < 1, n < 0, n > 64 or the count does not fit 63 bits.
  StateSpace(int n, int k);

  int n() const { return n_; }
  int k() const { return k_; }
  StateIndex size() const { return size_; }

  StateIndex rank(const Configuration& state) const;
  /// Throws std::out_of_range for index >= size().
  Configuration unrank(StateIndex index) const;
  std::vector<Configuration> enumerate() const;

 private:
  // a!/b! for 0 <= b <= a <= n+k-1, saturating at UINT64_MAX
  std::uint64_t falling(int a, int b) const { return falling_[a * (length_ + 1) + b]; }

  int n_;
  int k_;
  int length_;
  StateIndex size_;
  std::vector<std::uint64_t> falling_;
};

/// Exactly uniform over all arrangements.
Configuration sample_uniform(int n, int k, Rng& rng);

struct StarRange {
  int lo;
  int hi;
};

/// Integer star positions j with delta*(n+1) <= j <= (1-delta)*(n+1), clipped to 1..n+1,
/// evaluated exactly on the binary value of delta.
StarRange balanced_star_range(int n, double delta);
bool is_delta_balanced(int star_position, int n, double delta);
/// Probability that a uniform 2-deck state is delta-balanced.
Rational p_delta_exact(int n, double delta);

struct BalanceParams {
  int n;
  double delta;
  Rational p_delta;
  double gamma_delta;  // (1 - sqrt(1 - p_delta))^-1

  /// Requires 0 < delta < 1/2.
  static BalanceParams make(int n, double delta);
};

struct Observables {
  std::vector<int> deck_sizes;
  std::optional<int> star_position;     // 2 decks only
  std::optional<bool> delta_balanced;   // 2 decks and a delta given
};

Observables observables(const Configuration& state, std::optional<double> delta = std::nullopt);

}  // namespace topswap
