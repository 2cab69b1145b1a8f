#include "topswap/config_space.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace topswap {

namespace {

bool is_permutation_of_1_to_n(std::span<const Card> cards) {
  std::vector<char> seen(cards.size() + 1, 0);
  for (Card c : cards) {
    if (c < 1 || c > cards.size() || seen[c]) return false;
    seen[c] = 1;
  }
  return true;
}

void append_symbol(std::ostringstream& os, Card c) {
  if (c == kStar)
    os << '*';
  else
    os << c;
}

}  // namespace

Configuration::Configuration(const std::vector<std::vector<Card>>& decks) {
  if (decks.empty()) throw std::invalid_argument("a configuration needs at least one deck");
  bounds_.reserve(decks.size() + 1);
  bounds_.push_back(0);
  for (const auto& d : decks) {
    cards_.insert(cards_.end(), d.begin(), d.end());
    bounds_.push_back(static_cast<std::uint32_t>(cards_.size()));
  }
  if (!is_permutation_of_1_to_n(cards_))
    throw std::invalid_argument("deck contents are not a permutation of 1..n");
}

Configuration Configuration::assemble(std::vector<Card> cards, std::vector<std::uint32_t> bounds) {
  assert(!bounds.empty() && bounds.front() == 0 && bounds.back() == cards.size());
  assert(std::is_sorted(bounds.begin(), bounds.end()));
  assert(is_permutation_of_1_to_n(cards));
  return Configuration(std::move(cards), std::move(bounds));
}

std::vector<std::vector<Card>> Configuration::decks() const {
  std::vector<std::vector<Card>> out;
  out.reserve(k());
  for (int d = 0; d < k(); ++d) out.emplace_back(deck(d).begin(), deck(d).end());
  return out;
}

std::string Configuration::to_string() const {
  std::ostringstream os;
  os << '[';
  for (int d = 0; d < k(); ++d) {
    if (d) os << '|';
    auto cs = deck(d);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (i) os << ' ';
      os << cs[i];
    }
  }
  os << ']';
  return os.str();
}

TwoDeckLine::TwoDeckLine(std::vector<Card> symbols) : symbols_(std::move(symbols)) {
  auto star_count = std::count(symbols_.begin(), symbols_.end(), kStar);
  if (star_count != 1) throw std::invalid_argument("a two-deck line needs exactly one star");
  star_ = static_cast<int>(std::find(symbols_.begin(), symbols_.end(), kStar) - symbols_.begin()) + 1;
  std::vector<Card> cards;
  cards.reserve(symbols_.size() - 1);
  for (Card c : symbols_)
    if (c != kStar) cards.push_back(c);
  if (!is_permutation_of_1_to_n(cards))
    throw std::invalid_argument("line cards are not a permutation of 1..n");
}

TwoDeckLine make_line_unchecked(std::vector<Card> symbols, int star) {
  assert(star >= 1 && star <= static_cast<int>(symbols.size()) && symbols[star - 1] == kStar);
  return TwoDeckLine(TwoDeckLine::Trusted{}, std::move(symbols), star);
}

std::string TwoDeckLine::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (i) os << ',';
    append_symbol(os, symbols_[i]);
  }
  os << ')';
  return os.str();
}

TwoDeckLine to_line(const Configuration& state) {
  if (state.k() != 2) throw std::invalid_argument("line representation needs exactly 2 decks");
  std::vector<Card> symbols;
  symbols.reserve(state.n() + 1);
  auto d0 = state.deck(0);
  auto d1 = state.deck(1);
  symbols.insert(symbols.end(), d0.begin(), d0.end());
  symbols.push_back(kStar);
  symbols.insert(symbols.end(), d1.begin(), d1.end());
  return make_line_unchecked(std::move(symbols), state.deck_size(0) + 1);
}

Configuration from_line(const TwoDeckLine& line) {
  std::vector<Card> cards;
  cards.reserve(line.n());
  for (Card c : line.symbols())
    if (c != kStar) cards.push_back(c);
  auto n0 = static_cast<std::uint32_t>(line.star_position() - 1);
  return Configuration::assemble(std::move(cards), {0u, n0, static_cast<std::uint32_t>(line.n())});
}

BigInt state_count(int n, int k) {
  if (k < 1) throw std::invalid_argument("state_count: k must be at least 1");
  if (n < 0) throw std::invalid_argument("state_count: n must be non-negative");
  BigInt out = 1;
  for (int v = k; v <= n + k - 1; ++v) out *= v;
  return out;
}

StateSpace::StateSpace(int n, int k) : n_(n), k_(k), length_(n + k - 1) {
  if (k < 1) throw std::invalid_argument("StateSpace: k must be at least 1");
  if (n < 0) throw std::invalid_argument("StateSpace: n must be non-negative");
  if (n > 64) throw std::invalid_argument("StateSpace: ranking supports at most 64 cards");
  BigInt count = state_count(n, k);
  if (count > BigInt(std::numeric_limits<std::int64_t>::max()))
    throw std::invalid_argument("StateSpace: state count does not fit in 63 bits");
  size_ = static_cast<StateIndex>(count);

  constexpr auto kSat = std::numeric_limits<std::uint64_t>::max();
  falling_.assign(static_cast<std::size_t>(length_ + 1) * (length_ + 1), 0);
  for (int a = 0; a <= length_; ++a) {
    std::uint64_t v = 1;
    falling_[a * (length_ + 1) + a] = 1;
    for (int b = a - 1; b >= 0; --b) {
      auto f = static_cast<std::uint64_t>(b + 1);
      v = (v > kSat / std::max<std::uint64_t>(f, 1)) ? kSat : v * f;
      falling_[a * (length_ + 1) + b] = v;
    }
  }
}

StateIndex StateSpace::rank(const Configuration& state) const {
  assert(state.n() == n_ && state.k() == k_);
  std::uint64_t remaining_cards = (n_ == 64) ? ~0ULL : ((1ULL << n_) - 1);
  int separators = k_ - 1;
  int pos = 0;
  StateIndex r = 0;
  for (int d = 0; d < k_; ++d) {
    for (Card c : state.deck(d)) {
      int rem = length_ - pos;
      if (separators > 0) r += falling(rem - 1, separators - 1);
      std::uint64_t below = (c == 1) ? 0 : (remaining_cards & ((1ULL << (c - 1)) - 1));
      if (auto smaller = static_cast<std::uint64_t>(std::popcount(below)))
        r += smaller * falling(rem - 1, separators);
      remaining_cards &= ~(1ULL << (c - 1));
      ++pos;
    }
    if (d + 1 < k_) {
      --separators;
      ++pos;
    }
  }
  return r;
}

Configuration StateSpace::unrank(StateIndex index) const {
  if (index >= size_) throw std::out_of_range("StateSpace::unrank: index out of range");
  std::vector<Card> cards;
  cards.reserve(n_);
  std::vector<std::uint32_t> bounds{0};
  bounds.reserve(k_ + 1);
  std::uint64_t remaining_cards = (n_ == 64) ? ~0ULL : ((1ULL << n_) - 1);
  int separators = k_ - 1;
  for (int pos = 0; pos < length_; ++pos) {
    int rem = length_ - pos;
    if (separators > 0) {
      std::uint64_t with_sep = falling(rem - 1, separators - 1);
      if (index < with_sep) {
        --separators;
        bounds.push_back(static_cast<std::uint32_t>(cards.size()));
        continue;
      }
      index -= with_sep;
    }
    std::uint64_t block = falling(rem - 1, separators);
    auto q = static_cast<int>(index / block);
    index %= block;
    std::uint64_t m = remaining_cards;
    for (int i = 0; i < q; ++i) m &= m - 1;
    int bit = std::countr_zero(m);
    cards.push_back(static_cast<Card>(bit + 1));
    remaining_cards &= ~(1ULL << bit);
  }
  bounds.push_back(static_cast<std::uint32_t>(cards.size()));
  return Configuration::assemble(std::move(cards), std::move(bounds));
}

std::vector<Configuration> StateSpace::enumerate() const {
  std::vector<Configuration> out;
  out.reserve(size_);
  for (StateIndex i = 0; i < size_; ++i) out.push_back(unrank(i));
  return out;
}

Configuration sample_uniform(int n, int k, Rng& rng) {
  if (k < 1 || n < 0) throw std::invalid_argument("sample_uniform: need n >= 0, k >= 1");
  if (n <= 64 && state_count(n, k) <= BigInt(std::numeric_limits<std::int64_t>::max())) {
    StateSpace space(n, k);
    return space.unrank(rng.uniform_int<StateIndex>(0, space.size() - 1));
  }
  // Uniform multiset permutation of the separator word.
  std::vector<Card> word(n + k - 1, kStar);
  std::iota(word.begin(), word.begin() + n, Card{1});
  std::shuffle(word.begin(), word.end(), rng);
  std::vector<Card> cards;
  cards.reserve(n);
  std::vector<std::uint32_t> bounds{0};
  for (Card c : word) {
    if (c == kStar)
      bounds.push_back(static_cast<std::uint32_t>(cards.size()));
    else
      cards.push_back(c);
  }
  bounds.push_back(static_cast<std::uint32_t>(cards.size()));
  return Configuration::assemble(std::move(cards), std::move(bounds));
}

StarRange balanced_star_range(int n, double delta) {
  Rational d(delta);
  Rational lo_r = d * (n + 1);
  Rational hi_r = (Rational(1) - d) * (n + 1);
  BigInt lo_num = numerator(lo_r), lo_den = denominator(lo_r);
  BigInt hi_num = numerator(hi_r), hi_den = denominator(hi_r);
  // ceil and floor for non-negative rationals
  BigInt lo = (lo_num + lo_den - 1) / lo_den;
  BigInt hi = hi_num / hi_den;
  int lo_i = std::max(1, static_cast<int>(lo));
  int hi_i = std::min(n + 1, static_cast<int>(hi));
  return {lo_i, hi_i};
}

bool is_delta_balanced(int star_position, int n, double delta) {
  auto r = balanced_star_range(n, delta);
  return star_position >= r.lo && star_position <= r.hi;
}

Rational p_delta_exact(int n, double delta) {
  auto r = balanced_star_range(n, delta);
  int count = std::max(0, r.hi - r.lo + 1);
  return Rational(count, n + 1);
}

BalanceParams BalanceParams::make(int n, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("delta must lie in (0, 1/2)");
  if (n < 0) throw std::invalid_argument("n must be non-negative");
  Rational p = p_delta_exact(n, delta);
  if (p <= 0) throw std::invalid_argument("no star position is delta-balanced for this n");
  double pd = static_cast<double>(p);
  return BalanceParams{n, delta, p, 1.0 / (1.0 - std::sqrt(1.0 - pd))};
}

Observables observables(const Configuration& state, std::optional<double> delta) {
  Observables out;
  out.deck_sizes.reserve(state.k());
  for (int d = 0; d < state.k(); ++d) out.deck_sizes.push_back(state.deck_size(d));
  if (state.k() == 2) {
    out.star_position = state.deck_size(0) + 1;
    if (delta) out.delta_balanced = is_delta_balanced(*out.star_position, state.n(), *delta);
  }
  return out;
}

}  // namespace topswap
