#include "topswap/kernels.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>
#include <string>

namespace topswap {

namespace {

struct NameEntry {
  KernelId id;
  std::string_view name;
};

constexpr std::array<NameEntry, 11> kNames{{
    {KernelId::TopSwapK, "top_swap_k"},
    {KernelId::TopSwap2Line, "top_swap_2line"},
    {KernelId::ModifiedTransposition, "modified_transposition"},
    {KernelId::ConstrainedTransposition2, "constrained_transposition_2"},
    {KernelId::ConstrainedTranspositionK, "constrained_transposition_k"},
    {KernelId::PureTransposition2, "pure_transposition_2"},
    {KernelId::BalancedSwap, "balanced_swap"},
    {KernelId::BalancedSwapT, "balanced_swap_t"},
    {KernelId::DeckAvgUnweighted, "deck_avg_unweighted"},
    {KernelId::DeckAvgWeighted, "deck_avg_weighted"},
    {KernelId::TopSwapInversion, "top_swap_inversion"},
}};

void check_line_positions(const TwoDeckLine& line, int i, int j, int max_pos) {
  if (i < 1 || j < 1 || i > max_pos || j > max_pos)
    throw std::out_of_range("line position out of range: " + std::to_string(i) + "," +
                            std::to_string(j) + " (n=" + std::to_string(line.n()) + ")");
}

int find_star(const std::vector<Card>& symbols) {
  return static_cast<int>(std::find(symbols.begin(), symbols.end(), kStar) - symbols.begin()) + 1;
}

// Cards kept in place when slot `s` is selected: everything below the cut.
int kept_below(const Configuration& state, Slot s) {
  return s.height == 0 ? state.deck_size(s.deck) : s.height - 1;
}

Configuration rebuild(const Configuration& state, int da, int keep_a, int db, int keep_b) {
  const int k = state.k();
  std::vector<Card> cards;
  cards.reserve(state.n());
  std::vector<std::uint32_t> bounds(1, 0);
  bounds.reserve(k + 1);
  for (int d = 0; d < k; ++d) {
    auto deck = state.deck(d);
    if (d == da || d == db) {
      const int keep = d == da ? keep_a : keep_b;
      auto other = state.deck(d == da ? db : da);
      const int other_keep = d == da ? keep_b : keep_a;
      cards.insert(cards.end(), deck.begin(), deck.begin() + keep);
      cards.insert(cards.end(), other.begin() + other_keep, other.end());
    } else {
      cards.insert(cards.end(), deck.begin(), deck.end());
    }
    bounds.push_back(static_cast<std::uint32_t>(cards.size()));
  }
  return Configuration::assemble(std::move(cards), std::move(bounds));
}

TwoDeckLine line_op(KernelId id, const TwoDeckLine& line, int i, int j) {
  switch (id) {
    case KernelId::TopSwap2Line: return apply_T(line, i, j);
    case KernelId::ModifiedTransposition: return apply_E_tilde(line, i, j);
    case KernelId::ConstrainedTransposition2: return apply_E_tilde_T(line, i, j);
    case KernelId::PureTransposition2: return apply_E(line, i, j);
    default: throw std::logic_error("not a line kernel");
  }
}

Configuration slot_op(KernelId id, const Configuration& state, int r, int s) {
  switch (id) {
    case KernelId::TopSwapK: return apply_top_swap_k(state, r, s);
    case KernelId::ConstrainedTranspositionK: return apply_constrained_transposition_k(state, r, s);
    case KernelId::TopSwapInversion: return apply_inversion_variant(state, r, s);
    default: throw std::logic_error("not a slot kernel");
  }
}

// All states sharing the deck sizes of `state`, i.e. every card order.
void for_each_same_sizes(const Configuration& state, const std::function<void(const Configuration&)>& fn) {
  std::vector<Card> cards(state.cards().begin(), state.cards().end());
  std::sort(cards.begin(), cards.end());
  std::vector<std::uint32_t> bounds(state.bounds().begin(), state.bounds().end());
  do {
    fn(Configuration::assemble(cards, bounds));
  } while (std::next_permutation(cards.begin(), cards.end()));
}

// All arrangements of the cards of decks i and j with the other decks frozen.
void for_each_pair_arrangement(const Configuration& state, int i, int j,
                               const std::function<void(const Configuration&)>& fn) {
  std::vector<Card> pool;
  for (Card c : state.deck(i)) pool.push_back(c);
  for (Card c : state.deck(j)) pool.push_back(c);
  std::sort(pool.begin(), pool.end());
  const int m = static_cast<int>(pool.size());
  do {
    for (int cut = 0; cut <= m; ++cut) {
      std::vector<Card> cards;
      cards.reserve(state.n());
      std::vector<std::uint32_t> bounds(1, 0);
      for (int d = 0; d < state.k(); ++d) {
        if (d == i) {
          cards.insert(cards.end(), pool.begin(), pool.begin() + cut);
        } else if (d == j) {
          cards.insert(cards.end(), pool.begin() + cut, pool.end());
        } else {
          auto deck = state.deck(d);
          cards.insert(cards.end(), deck.begin(), deck.end());
        }
        bounds.push_back(static_cast<std::uint32_t>(cards.size()));
      }
      fn(Configuration::assemble(std::move(cards), std::move(bounds)));
    }
  } while (std::next_permutation(pool.begin(), pool.end()));
}

double factorial(int m) {
  double f = 1;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

double deck_pair_rate(const Kernel& kernel, const Configuration& state, int i, int j) {
  const double k = state.k();
  if (kernel.id == KernelId::DeckAvgWeighted) return (state.deck_size(i) + state.deck_size(j)) / k;
  return 1.0 / k;
}

struct StateLess {
  bool operator()(const Configuration& a, const Configuration& b) const {
    if (a.bounds().size() != b.bounds().size()) return a.bounds().size() < b.bounds().size();
    auto ab = a.bounds(), bb = b.bounds();
    if (!std::equal(ab.begin(), ab.end(), bb.begin()))
      return std::lexicographical_compare(ab.begin(), ab.end(), bb.begin(), bb.end());
    auto ac = a.cards(), bc = b.cards();
    return std::lexicographical_compare(ac.begin(), ac.end(), bc.begin(), bc.end());
  }
};

}  // namespace

std::string_view kernel_name(KernelId id) {
  for (const auto& e : kNames)
    if (e.id == id) return e.name;
  return "unknown";
}

std::optional<KernelId> parse_kernel_name(std::string_view name) {
  std::string lowered(name);
  for (char& c : lowered) {
    if (c == '-') c = '_';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  for (const auto& e : kNames)
    if (e.name == lowered) return e.id;
  return std::nullopt;
}

bool is_continuous(KernelId id) {
  switch (id) {
    case KernelId::BalancedSwap:
    case KernelId::BalancedSwapT:
    case KernelId::DeckAvgUnweighted:
    case KernelId::DeckAvgWeighted: return true;
    default: return false;
  }
}

bool is_line_kernel(KernelId id) {
  switch (id) {
    case KernelId::TopSwap2Line:
    case KernelId::ModifiedTransposition:
    case KernelId::ConstrainedTransposition2:
    case KernelId::PureTransposition2:
    case KernelId::BalancedSwap:
    case KernelId::BalancedSwapT: return true;
    default: return false;
  }
}

void require_compatible(const Kernel& kernel, int n, int k) {
  if (n < 0 || k < 1) throw std::invalid_argument("need n >= 0 and k >= 1");
  if (is_line_kernel(kernel.id) && k != 2)
    throw std::invalid_argument(std::string(kernel_name(kernel.id)) + " is defined for k = 2 only");
  if ((kernel.id == KernelId::BalancedSwap || kernel.id == KernelId::BalancedSwapT) &&
      !(kernel.delta >= 0.0 && kernel.delta < 0.5))
    throw std::invalid_argument("delta must lie in [0, 1/2)");
}

// ---- line operators ------------------------------------------------------

TwoDeckLine apply_T(const TwoDeckLine& line, int i, int j) {
  const int n = line.n();
  check_line_positions(line, i, j, n + 1);
  if (i > j) std::swap(i, j);
  const int x = line.star_position();
  if (i == j || j < x || i > x) return line;

  std::vector<Card> out;
  out.reserve(n + 1);
  auto append = [&](int from, int to) {
    for (int p = from; p <= to; ++p) out.push_back(line.at(p));
  };
  int star;
  if (i < x && x < j) {
    append(1, i - 1);
    append(j, n + 1);
    star = static_cast<int>(out.size()) + 1;
    out.push_back(kStar);
    append(x + 1, j - 1);
    append(i, x - 1);
  } else if (i == x) {
    append(1, x - 1);
    append(j, n + 1);
    star = static_cast<int>(out.size()) + 1;
    out.push_back(kStar);
    append(x + 1, j - 1);
  } else {  // j == x
    append(1, i - 1);
    star = static_cast<int>(out.size()) + 1;
    out.push_back(kStar);
    append(x + 1, n + 1);
    append(i, x - 1);
  }
  return make_line_unchecked(std::move(out), star);
}

TwoDeckLine apply_T_extended(const TwoDeckLine& line, int i, int j) {
  const int n = line.n();
  check_line_positions(line, i, j, n + 2);
  if (i > j) std::swap(i, j);
  if (j == n + 2) {
    if (i == n + 2) return line;
    // i = x* moves an empty top, which is the identity
    if (i > line.star_position())
      throw std::invalid_argument("extended index n+2 needs i at or below the star");
    return apply_T(line, i, line.star_position());
  }
  return apply_T(line, i, j);
}

TwoDeckLine apply_E(const TwoDeckLine& line, int i, int j) {
  check_line_positions(line, i, j, line.n() + 1);
  if (i == j) return line;
  std::vector<Card> out(line.symbols().begin(), line.symbols().end());
  std::swap(out[i - 1], out[j - 1]);
  const int star = find_star(out);
  return make_line_unchecked(std::move(out), star);
}

TwoDeckLine apply_E_tilde(const TwoDeckLine& line, int i, int j) {
  check_line_positions(line, i, j, line.n() + 1);
  if (i > j) std::swap(i, j);
  const int x = line.star_position();
  if (i == j) return line;
  if (i < x && x < j) return apply_E(line, i, j);
  if (i == x || j == x) return apply_T(line, i, j);
  return line;
}

TwoDeckLine apply_E_tilde_T(const TwoDeckLine& line, int i, int j) {
  check_line_positions(line, i, j, line.n() + 1);
  if (i > j) std::swap(i, j);
  const int x = line.star_position();
  if (i == j) return line;
  if (i <= x && x <= j) return apply_E(line, i, j);
  return line;
}

// ---- k-deck operators ----------------------------------------------------

Slot slot_at(const Configuration& state, int position) {
  if (position < 1 || position > state.n() + state.k())
    throw std::out_of_range("slot position out of range: " + std::to_string(position));
  int p = position;
  for (int d = 0; d < state.k(); ++d) {
    const int width = state.deck_size(d) + 1;
    if (p <= width) return {d, p - 1};
    p -= width;
  }
  throw std::logic_error("slot_at: unreachable");
}

Configuration apply_top_swap_k(const Configuration& state, int r, int s) {
  const Slot a = slot_at(state, r), b = slot_at(state, s);
  if (a.deck == b.deck) return state;
  return rebuild(state, a.deck, kept_below(state, a), b.deck, kept_below(state, b));
}

Configuration apply_constrained_transposition_k(const Configuration& state, int r, int s) {
  Slot a = slot_at(state, r), b = slot_at(state, s);
  if (a.deck == b.deck) return state;
  if (a.deck > b.deck) std::swap(a, b);
  const int lo = a.deck, hi = b.deck;
  auto dlo = state.deck(lo), dhi = state.deck(hi);
  const int x = static_cast<int>(dlo.size()) + 1;

  std::vector<Card> seq(dlo.begin(), dlo.end());
  seq.push_back(kStar);
  seq.insert(seq.end(), dhi.begin(), dhi.end());

  const int p = a.height == 0 ? x : a.height;
  const int q = b.height == 0 ? x : x + b.height;
  if (p == q) return state;
  std::swap(seq[p - 1], seq[q - 1]);
  const int star = find_star(seq);

  std::vector<Card> cards;
  cards.reserve(state.n());
  std::vector<std::uint32_t> bounds(1, 0);
  for (int d = 0; d < state.k(); ++d) {
    if (d == lo) {
      cards.insert(cards.end(), seq.begin(), seq.begin() + (star - 1));
    } else if (d == hi) {
      cards.insert(cards.end(), seq.begin() + star, seq.end());
    } else {
      auto deck = state.deck(d);
      cards.insert(cards.end(), deck.begin(), deck.end());
    }
    bounds.push_back(static_cast<std::uint32_t>(cards.size()));
  }
  return Configuration::assemble(std::move(cards), std::move(bounds));
}

Configuration apply_inversion_variant(const Configuration& state, int r, int s) {
  const Slot a = slot_at(state, r), b = slot_at(state, s);
  if (a.deck != b.deck)
    return rebuild(state, a.deck, kept_below(state, a), b.deck, kept_below(state, b));
  const int size = state.deck_size(a.deck);
  if (r == s || size == 0) return state;
  const int ha = a.height == 0 ? size : a.height;
  const int hb = b.height == 0 ? size : b.height;
  const int lo = std::min(ha, hb), hi = std::max(ha, hb);
  if (lo == hi) return state;
  std::vector<Card> cards(state.cards().begin(), state.cards().end());
  const auto base = cards.begin() + state.bounds()[a.deck];
  std::reverse(base + (lo - 1), base + hi);
  return Configuration::assemble(std::move(cards),
                                 std::vector<std::uint32_t>(state.bounds().begin(), state.bounds().end()));
}

Configuration deck_average_resample(const Configuration& state, int i, int j, Rng& rng) {
  if (i == j || i < 0 || j < 0 || i >= state.k() || j >= state.k())
    throw std::invalid_argument("deck_average_resample needs two distinct decks");
  std::vector<Card> pool;
  for (Card c : state.deck(i)) pool.push_back(c);
  for (Card c : state.deck(j)) pool.push_back(c);
  std::shuffle(pool.begin(), pool.end(), rng);
  const int m = static_cast<int>(pool.size());
  const int cut = rng.uniform_int(0, m);

  std::vector<Card> cards;
  cards.reserve(state.n());
  std::vector<std::uint32_t> bounds(1, 0);
  for (int d = 0; d < state.k(); ++d) {
    if (d == i) {
      cards.insert(cards.end(), pool.begin(), pool.begin() + cut);
    } else if (d == j) {
      cards.insert(cards.end(), pool.begin() + cut, pool.end());
    } else {
      auto deck = state.deck(d);
      cards.insert(cards.end(), deck.begin(), deck.end());
    }
    bounds.push_back(static_cast<std::uint32_t>(cards.size()));
  }
  return Configuration::assemble(std::move(cards), std::move(bounds));
}

// ---- transition laws -----------------------------------------------------

void for_each_jump(const Kernel& kernel, const Configuration& state, const MoveSink& sink) {
  const int n = state.n(), k = state.k();
  require_compatible(kernel, n, k);
  switch (kernel.id) {
    case KernelId::TopSwapK:
    case KernelId::ConstrainedTranspositionK: {
      const double w = 1.0 / (static_cast<double>(n + k) * (n + k));
      double same_deck = 0;
      for (int d = 0; d < k; ++d) same_deck += static_cast<double>(state.deck_size(d) + 1) * (state.deck_size(d) + 1);
      sink(state, same_deck * w);
      for (int r = 1; r <= n + k; ++r) {
        const int dr = slot_at(state, r).deck;
        for (int s = 1; s <= n + k; ++s)
          if (slot_at(state, s).deck != dr) sink(slot_op(kernel.id, state, r, s), w);
      }
      return;
    }
    case KernelId::TopSwapInversion: {
      const double w = 1.0 / (static_cast<double>(n + k) * (n + k));
      for (int r = 1; r <= n + k; ++r)
        for (int s = 1; s <= n + k; ++s) sink(apply_inversion_variant(state, r, s), w);
      return;
    }
    case KernelId::TopSwap2Line:
    case KernelId::ModifiedTransposition:
    case KernelId::ConstrainedTransposition2:
    case KernelId::PureTransposition2: {
      const double total = static_cast<double>(n + 2) * (n + 2);
      const double w = 1.0 / total;
      sink(state, (total - static_cast<double>(n + 1) * (n + 1)) / total);
      const TwoDeckLine line = to_line(state);
      for (int i = 1; i <= n + 1; ++i)
        for (int j = 1; j <= n + 1; ++j) sink(from_line(line_op(kernel.id, line, i, j)), w);
      return;
    }
    case KernelId::BalancedSwap:
    case KernelId::BalancedSwapT: {
      const TwoDeckLine line = to_line(state);
      const int x = line.star_position();
      const double w = 1.0 / (n + 1);
      for (int i = 1; i <= n + 1; ++i) {
        const TwoDeckLine next =
            kernel.id == KernelId::BalancedSwap ? apply_T(line, i, x) : apply_E(line, i, x);
        sink(from_line(next), w);
      }
      return;
    }
    case KernelId::DeckAvgUnweighted:
    case KernelId::DeckAvgWeighted: return;
  }
}

TransitionDistribution transition_distribution(const Kernel& kernel, const Configuration& state) {
  TransitionDistribution out;
  out.continuous = is_continuous(kernel.id);
  std::map<Configuration, double, StateLess> acc;
  auto add = [&](const Configuration& c, double w) { acc[c] += w; };
  for_each_jump(kernel, state, add);

  if (kernel.id == KernelId::BalancedSwap || kernel.id == KernelId::BalancedSwapT) {
    const int x = state.deck_size(0) + 1;
    if (kernel.delta == 0.0 || is_delta_balanced(x, state.n(), kernel.delta)) {
      const double w = 1.0 / factorial(state.n());
      for_each_same_sizes(state, [&](const Configuration& c) { add(c, w); });
    }
  } else if (kernel.id == KernelId::DeckAvgUnweighted || kernel.id == KernelId::DeckAvgWeighted) {
    for (int i = 0; i < state.k(); ++i)
      for (int j = 0; j < state.k(); ++j) {
        if (i == j) continue;
        const int m = state.deck_size(i) + state.deck_size(j);
        const double w = deck_pair_rate(kernel, state, i, j) / factorial(m + 1);
        for_each_pair_arrangement(state, i, j, [&](const Configuration& c) { add(c, w); });
      }
  }

  if (out.continuous) {
    double leaving = 0;
    for (auto& [c, w] : acc)
      if (!(c == state)) leaving += w;
    acc[state] = -leaving;
  }
  out.entries.reserve(acc.size());
  for (auto& [c, w] : acc) out.entries.emplace_back(c, w);
  return out;
}

double uniformization_rate(const Kernel& kernel, int n, int k) {
  switch (kernel.id) {
    case KernelId::BalancedSwap:
    case KernelId::BalancedSwapT: return 2.0;
    case KernelId::DeckAvgUnweighted: return std::max(1, k - 1);
    case KernelId::DeckAvgWeighted: return n == 0 || k < 2 ? 1.0 : 2.0 * (k - 1) * n / k;
    default: return 1.0;
  }
}

void step(const Kernel& kernel, Configuration& state, Rng& rng) {
  const int n = state.n(), k = state.k();
  switch (kernel.id) {
    case KernelId::TopSwapK:
    case KernelId::ConstrainedTranspositionK:
    case KernelId::TopSwapInversion: {
      const int r = rng.uniform_int(1, n + k), s = rng.uniform_int(1, n + k);
      state = slot_op(kernel.id, state, r, s);
      return;
    }
    case KernelId::TopSwap2Line:
    case KernelId::ModifiedTransposition:
    case KernelId::ConstrainedTransposition2:
    case KernelId::PureTransposition2: {
      const int i = rng.uniform_int(1, n + 2), j = rng.uniform_int(1, n + 2);
      if (i == n + 2 || j == n + 2) return;
      state = from_line(line_op(kernel.id, to_line(state), i, j));
      return;
    }
    case KernelId::BalancedSwap:
    case KernelId::BalancedSwapT: {
      const int x = state.deck_size(0) + 1;
      if (rng.uniform_int(0, 1) == 0) {
        const int i = rng.uniform_int(1, n + 1);
        const TwoDeckLine line = to_line(state);
        state = from_line(kernel.id == KernelId::BalancedSwap ? apply_T(line, i, x) : apply_E(line, i, x));
      } else if (kernel.delta == 0.0 || is_delta_balanced(x, n, kernel.delta)) {
        std::vector<Card> cards(state.cards().begin(), state.cards().end());
        std::shuffle(cards.begin(), cards.end(), rng);
        state = Configuration::assemble(std::move(cards),
                                        std::vector<std::uint32_t>(state.bounds().begin(), state.bounds().end()));
      }
      return;
    }
    case KernelId::DeckAvgUnweighted: {
      if (k < 2) return;
      const int i = rng.uniform_int(0, k - 1);
      int j = rng.uniform_int(0, k - 2);
      if (j >= i) ++j;
      state = deck_average_resample(state, i, j, rng);
      return;
    }
    case KernelId::DeckAvgWeighted: {
      if (k < 2 || n == 0) return;
      // a uniform card picks deck i with probability n_i/n; unordered pair {i,j}
      // then has probability (n_i+n_j)/((k-1)n), proportional to its rate
      const int pos = rng.uniform_int(0, n - 1);
      int i = 0;
      while (static_cast<int>(state.bounds()[i + 1]) <= pos) ++i;
      int j = rng.uniform_int(0, k - 2);
      if (j >= i) ++j;
      state = deck_average_resample(state, i, j, rng);
      return;
    }
  }
}

}  // namespace topswap
