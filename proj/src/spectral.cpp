#include "topswap/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <thread>
#include <unordered_map>

namespace topswap {

namespace {

using Row = std::vector<std::pair<std::int64_t, double>>;
using RowFn = std::function<void(const Configuration& state, StateIndex x, Row& row)>;

StateSpace checked_space(int n, int k, StateIndex cap, const char* flag) {
  const BigInt count = state_count(n, k);
  if (count > BigInt(cap))
    throw CapExceeded("state count " + count.str() + " for (n=" + std::to_string(n) + ", k=" + std::to_string(k) +
                          ") exceeds the cap of " + std::to_string(cap) + " (raise " + flag + ")",
                      flag);
  return StateSpace(n, k);
}

// Row-parallel CSR assembly; rows are merged by column so the result is canonical.
SparseMatrix assemble(const StateSpace& space, Parallelism par, const RowFn& fn) {
  const auto N = static_cast<std::int64_t>(space.size());
  const int threads = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(par.resolved(), N / 64 + 1)));

  struct Chunk {
    std::vector<std::int64_t> counts;
    std::vector<std::int64_t> cols;
    std::vector<double> vals;
  };
  std::vector<Chunk> chunks(threads);
  auto work = [&](int t) {
    const std::int64_t lo = N * t / threads, hi = N * (t + 1) / threads;
    Chunk& c = chunks[t];
    c.counts.reserve(hi - lo);
    Row row;
    for (std::int64_t x = lo; x < hi; ++x) {
      row.clear();
      fn(space.unrank(static_cast<StateIndex>(x)), static_cast<StateIndex>(x), row);
      std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      std::int64_t count = 0;
      for (std::size_t i = 0; i < row.size();) {
        double v = 0;
        const auto col = row[i].first;
        for (; i < row.size() && row[i].first == col; ++i) v += row[i].second;
        if (v != 0.0) {
          c.cols.push_back(col);
          c.vals.push_back(v);
          ++count;
        }
      }
      c.counts.push_back(count);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }

  std::int64_t nnz = 0;
  for (const auto& c : chunks) nnz += static_cast<std::int64_t>(c.cols.size());
  SparseMatrix m(N, N);
  m.resizeNonZeros(nnz);
  auto* outer = m.outerIndexPtr();
  auto* inner = m.innerIndexPtr();
  auto* vals = m.valuePtr();
  std::int64_t pos = 0, row_index = 0;
  outer[0] = 0;
  for (auto& c : chunks) {
    std::copy(c.cols.begin(), c.cols.end(), inner + pos);
    std::copy(c.vals.begin(), c.vals.end(), vals + pos);
    for (auto cnt : c.counts) {
      outer[row_index + 1] = outer[row_index] + cnt;
      ++row_index;
    }
    pos += static_cast<std::int64_t>(c.cols.size());
    c = Chunk{};
  }
  return m;
}

bool chi(const Kernel& kernel, const Configuration& state) {
  return kernel.delta == 0.0 || is_delta_balanced(state.deck_size(0) + 1, state.n(), kernel.delta);
}

// ---- form structure ------------------------------------------------------

enum class MoveSet { None, LineT, LineETilde, LineE, StarT, StarE, SlotTop, SlotTransposition };

struct FormSpec {
  MoveSet moves = MoveSet::None;
  Rational coef = 0;
  bool star_projector = false;   // mu[chi Var(f | x*)]
  bool pair_projectors = false;  // sum over unordered pairs of 2w/k * Var_{i,j}
  bool weighted_pairs = false;
  bool total_projector = false;  // Var
};

FormSpec form_spec(FormId id, int n, int k) {
  FormSpec s;
  switch (id) {
    case FormId::E2: s.moves = MoveSet::LineT; s.coef = Rational(1, 2 * (n + 2) * (n + 2)); break;
    case FormId::D2: s.moves = MoveSet::LineETilde; s.coef = Rational(1, 2 * (n + 2) * (n + 2)); break;
    case FormId::E2RT: s.moves = MoveSet::LineE; s.coef = Rational(1, 2 * (n + 2) * (n + 2)); break;
    case FormId::FDelta:
      s.moves = MoveSet::StarT;
      s.coef = Rational(1, 2 * (n + 1));
      s.star_projector = true;
      break;
    case FormId::FDeltaT:
      s.moves = MoveSet::StarE;
      s.coef = Rational(1, 2 * (n + 1));
      s.star_projector = true;
      break;
    case FormId::DBar: s.pair_projectors = true; break;
    case FormId::DWeighted: s.pair_projectors = true; s.weighted_pairs = true; break;
    case FormId::EK: s.moves = MoveSet::SlotTop; s.coef = Rational(1, 2 * (n + k) * (n + k)); break;
    case FormId::EKT: s.moves = MoveSet::SlotTransposition; s.coef = Rational(1, 2 * (n + k) * (n + k)); break;
    case FormId::Var: s.total_projector = true; break;
  }
  return s;
}

template <class Sink>
void for_each_form_move(MoveSet moves, const Configuration& state, Sink&& sink) {
  const int n = state.n(), k = state.k();
  switch (moves) {
    case MoveSet::None: return;
    case MoveSet::LineT:
    case MoveSet::LineETilde:
    case MoveSet::LineE: {
      const TwoDeckLine line = to_line(state);
      for (int i = 1; i <= n + 1; ++i)
        for (int j = 1; j <= n + 1; ++j) {
          if (moves == MoveSet::LineT)
            sink(from_line(apply_T(line, i, j)));
          else if (moves == MoveSet::LineETilde)
            sink(from_line(apply_E_tilde(line, i, j)));
          else
            sink(from_line(apply_E(line, i, j)));
        }
      return;
    }
    case MoveSet::StarT:
    case MoveSet::StarE: {
      const TwoDeckLine line = to_line(state);
      const int x = line.star_position();
      for (int i = 1; i <= n + 1; ++i)
        sink(from_line(moves == MoveSet::StarT ? apply_T(line, i, x) : apply_E(line, i, x)));
      return;
    }
    case MoveSet::SlotTop:
    case MoveSet::SlotTransposition:
      for (int r = 1; r <= n + k; ++r)
        for (int s = 1; s <= n + k; ++s)
          sink(moves == MoveSet::SlotTop ? apply_top_swap_k(state, r, s)
                                         : apply_constrained_transposition_k(state, r, s));
      return;
  }
}

struct WeightedClasses {
  ProjectorTerm classes;
  std::vector<Rational> weight;
};

std::vector<WeightedClasses> form_projectors(const Form& form, const FormSpec& spec, const StateSpace& space) {
  std::vector<WeightedClasses> out;
  const auto N = space.size();
  if (spec.star_projector) {
    WeightedClasses wc{conditioning_classes(space, Conditioning::star()), std::vector<Rational>(N)};
    const Kernel balanced{KernelId::BalancedSwap, form.delta};
    for (StateIndex x = 0; x < N; ++x) wc.weight[x] = chi(balanced, space.unrank(x)) ? 1 : 0;
    out.push_back(std::move(wc));
  }
  if (spec.pair_projectors) {
    const int k = space.k();
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        WeightedClasses wc{conditioning_classes(space, Conditioning::frozen_pair(i, j)), std::vector<Rational>(N)};
        for (StateIndex x = 0; x < N; ++x) {
          if (spec.weighted_pairs) {
            const Configuration s = space.unrank(x);
            wc.weight[x] = Rational(2 * (s.deck_size(i) + s.deck_size(j)), k);
          } else {
            wc.weight[x] = Rational(2, k);
          }
        }
        out.push_back(std::move(wc));
      }
  }
  if (spec.total_projector) {
    WeightedClasses wc;
    wc.classes.class_of.assign(N, 0);
    wc.classes.num_classes = 1;
    wc.classes.weight.assign(N, 1.0);
    wc.weight.assign(N, Rational(1));
    out.push_back(std::move(wc));
  }
  for (auto& wc : out) {
    wc.classes.weight.resize(N);
    for (StateIndex x = 0; x < N; ++x) wc.classes.weight[x] = static_cast<double>(wc.weight[x]);
  }
  return out;
}

template <class T>
T from_rational(const Rational& r) {
  if constexpr (std::is_same_v<T, Rational>)
    return r;
  else
    return static_cast<T>(r);
}

void for_each_composition(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> c(k, 0);
  std::function<void(int, int)> rec = [&](int d, int left) {
    if (d == k - 1) {
      c[d] = left;
      fn(c);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      c[d] = v;
      rec(d + 1, left - v);
    }
  };
  if (k >= 1) rec(0, n);
}

void check_form_space(const Form& form, int k) {
  if (form_needs_two_decks(form.id) && k != 2)
    throw std::invalid_argument(std::string(form_name(form.id)) + " is defined for k = 2 only");
}

}  // namespace

int Parallelism::resolved() const {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// ---- kernels -------------------------------------------------------------

OperatorMatrix build_matrix(const Kernel& kernel, int n, int k, const MatrixCaps& caps, Parallelism par) {
  require_compatible(kernel, n, k);
  const StateSpace space = checked_space(n, k, caps.sparse, "--sparse-cap");
  const bool continuous = is_continuous(kernel.id);

  SparseMatrix sparse = assemble(space, par, [&](const Configuration& state, StateIndex x, Row& row) {
    for_each_jump(kernel, state, [&](const Configuration& y, double w) {
      row.emplace_back(static_cast<std::int64_t>(space.rank(y)), w);
      if (continuous) row.emplace_back(static_cast<std::int64_t>(x), -w);
    });
  });

  std::vector<ProjectorTerm> projectors;
  const auto N = space.size();
  if (kernel.id == KernelId::BalancedSwap || kernel.id == KernelId::BalancedSwapT) {
    ProjectorTerm t = conditioning_classes(space, Conditioning::star());
    for (StateIndex x = 0; x < N; ++x) t.weight[x] = chi(kernel, space.unrank(x)) ? 1.0 : 0.0;
    projectors.push_back(std::move(t));
  } else if (kernel.id == KernelId::DeckAvgUnweighted || kernel.id == KernelId::DeckAvgWeighted) {
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        ProjectorTerm t = conditioning_classes(space, Conditioning::frozen_pair(i, j));
        for (StateIndex x = 0; x < N; ++x) {
          if (kernel.id == KernelId::DeckAvgWeighted) {
            const Configuration s = space.unrank(x);
            t.weight[x] = 2.0 * (s.deck_size(i) + s.deck_size(j)) / k;
          } else {
            t.weight[x] = 2.0 / k;
          }
        }
        projectors.push_back(std::move(t));
      }
  }
  return OperatorMatrix(continuous ? OperatorKind::Generator : OperatorKind::Stochastic, std::move(sparse),
                        std::move(projectors));
}

OperatorMatrix build_matrix_explicit(const Kernel& kernel, int n, int k, const MatrixCaps& caps) {
  require_compatible(kernel, n, k);
  const StateSpace space = checked_space(n, k, caps.dense, "--dense-cap");
  SparseMatrix sparse = assemble(space, Parallelism{1}, [&](const Configuration& state, StateIndex, Row& row) {
    for (const auto& [y, w] : transition_distribution(kernel, state).entries)
      row.emplace_back(static_cast<std::int64_t>(space.rank(y)), w);
  });
  return OperatorMatrix(is_continuous(kernel.id) ? OperatorKind::Generator : OperatorKind::Stochastic,
                        std::move(sparse));
}

// ---- forms ---------------------------------------------------------------

const char* form_name(FormId id) {
  switch (id) {
    case FormId::E2: return "E2";
    case FormId::D2: return "D2";
    case FormId::E2RT: return "E2_RT";
    case FormId::FDelta: return "F_DELTA";
    case FormId::FDeltaT: return "F_DELTA_T";
    case FormId::DBar: return "DBAR";
    case FormId::DWeighted: return "D_WEIGHTED";
    case FormId::EK: return "EK";
    case FormId::EKT: return "EK_T";
    case FormId::Var: return "VAR";
  }
  return "unknown";
}

std::optional<FormId> parse_form_name(std::string_view name) {
  std::string up(name);
  for (char& c : up) {
    if (c == '-') c = '_';
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  for (FormId id : {FormId::E2, FormId::D2, FormId::E2RT, FormId::FDelta, FormId::FDeltaT, FormId::DBar,
                    FormId::DWeighted, FormId::EK, FormId::EKT, FormId::Var})
    if (up == form_name(id)) return id;
  return std::nullopt;
}

bool form_needs_two_decks(FormId id) {
  switch (id) {
    case FormId::E2:
    case FormId::D2:
    case FormId::E2RT:
    case FormId::FDelta:
    case FormId::FDeltaT: return true;
    default: return false;
  }
}

OperatorMatrix form_operator(const Form& form, int n, int k, const MatrixCaps& caps, Parallelism par) {
  check_form_space(form, k);
  const StateSpace space = checked_space(n, k, caps.sparse, "--sparse-cap");
  const FormSpec spec = form_spec(form.id, n, k);
  const auto N = static_cast<std::int64_t>(space.size());

  SparseMatrix M(N, N);
  if (spec.moves != MoveSet::None) {
    const SparseMatrix W = assemble(space, par, [&](const Configuration& state, StateIndex, Row& row) {
      for_each_form_move(spec.moves, state, [&](const Configuration& y) {
        row.emplace_back(static_cast<std::int64_t>(space.rank(y)), 1.0);
      });
    });
    const SparseMatrix Wt = W.transpose();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(N);
    const Eigen::VectorXd degree = W * ones + Wt * ones;
    SparseMatrix D(N, N);
    D.reserve(N);
    for (std::int64_t x = 0; x < N; ++x) D.insert(x, x) = degree[x];
    D.makeCompressed();
    M = static_cast<double>(spec.coef) * (D - W - Wt);
    M.prune(0.0);
  }
  std::vector<ProjectorTerm> terms;
  for (auto& wc : form_projectors(form, spec, space)) terms.push_back(std::move(wc.classes));
  return OperatorMatrix(OperatorKind::QuadraticForm, std::move(M), std::move(terms));
}

template <class T>
T dirichlet_form(const Form& form, const StateSpace& space, const std::vector<T>& f) {
  check_form_space(form, space.k());
  const auto N = space.size();
  if (f.size() != N) throw std::invalid_argument("function table does not match the state space");
  const FormSpec spec = form_spec(form.id, space.n(), space.k());

  T total = 0;
  if (spec.moves != MoveSet::None) {
    T moves_sum = 0;
    for (StateIndex x = 0; x < N; ++x) {
      const Configuration state = space.unrank(x);
      for_each_form_move(spec.moves, state, [&](const Configuration& y) {
        const T d = f[space.rank(y)] - f[x];
        moves_sum += d * d;
      });
    }
    total += from_rational<T>(spec.coef) * moves_sum;
  }
  for (const auto& wc : form_projectors(form, spec, space)) {
    const auto& cl = wc.classes;
    std::vector<T> sum(cl.num_classes, T(0));
    std::vector<std::int64_t> count(cl.num_classes, 0);
    for (StateIndex x = 0; x < N; ++x) {
      sum[cl.class_of[x]] += f[x];
      ++count[cl.class_of[x]];
    }
    for (StateIndex x = 0; x < N; ++x) {
      if (wc.weight[x] == 0) continue;
      const T d = f[x] - sum[cl.class_of[x]] / T(count[cl.class_of[x]]);
      total += from_rational<T>(wc.weight[x]) * d * d;
    }
  }
  return total / T(N);
}

template double dirichlet_form<double>(const Form&, const StateSpace&, const std::vector<double>&);
template Rational dirichlet_form<Rational>(const Form&, const StateSpace&, const std::vector<Rational>&);

template <class T>
T mean(const std::vector<T>& f) {
  if (f.empty()) throw std::invalid_argument("mean of an empty table");
  T s = 0;
  for (const auto& v : f) s += v;
  return s / T(static_cast<std::int64_t>(f.size()));
}

template <class T>
T variance(const std::vector<T>& f) {
  const T m = mean(f);
  T s = 0;
  for (const auto& v : f) s += (v - m) * (v - m);
  return s / T(static_cast<std::int64_t>(f.size()));
}

template double mean<double>(const std::vector<double>&);
template Rational mean<Rational>(const std::vector<Rational>&);
template double variance<double>(const std::vector<double>&);
template Rational variance<Rational>(const std::vector<Rational>&);

// ---- conditioning --------------------------------------------------------

ProjectorTerm conditioning_classes(const StateSpace& space, const Conditioning& cond) {
  const auto N = space.size();
  const int k = space.k();
  ProjectorTerm t;
  t.class_of.resize(N);
  t.weight.assign(N, 1.0);
  switch (cond.kind) {
    case Conditioning::Kind::StarPosition: {
      if (k != 2) throw std::invalid_argument("star-position conditioning needs k = 2");
      for (StateIndex x = 0; x < N; ++x) t.class_of[x] = static_cast<std::uint32_t>(space.unrank(x).deck_size(0));
      t.num_classes = static_cast<std::uint32_t>(space.n() + 1);
      return t;
    }
    case Conditioning::Kind::FrozenPair: {
      const int a = std::min(cond.i, cond.j), b = std::max(cond.i, cond.j);
      if (a == b || a < 0 || b >= k) throw std::invalid_argument("frozen-pair conditioning needs two distinct decks");
      std::unordered_map<StateIndex, std::uint32_t> ids;
      for (StateIndex x = 0; x < N; ++x) {
        const Configuration s = space.unrank(x);
        std::vector<Card> cards;
        std::vector<std::uint32_t> bounds(1, 0);
        std::vector<Card> pool;
        for (Card c : s.deck(a)) pool.push_back(c);
        for (Card c : s.deck(b)) pool.push_back(c);
        std::sort(pool.begin(), pool.end());
        for (int d = 0; d < k; ++d) {
          if (d == a) {
            cards.insert(cards.end(), pool.begin(), pool.end());
          } else if (d != b) {
            auto deck = s.deck(d);
            cards.insert(cards.end(), deck.begin(), deck.end());
          }
          bounds.push_back(static_cast<std::uint32_t>(cards.size()));
        }
        const StateIndex key = space.rank(Configuration::assemble(std::move(cards), std::move(bounds)));
        auto [it, inserted] = ids.emplace(key, static_cast<std::uint32_t>(ids.size()));
        t.class_of[x] = it->second;
      }
      t.num_classes = static_cast<std::uint32_t>(ids.size());
      return t;
    }
    case Conditioning::Kind::DeckContent: {
      if (cond.i < 0 || cond.i >= k) throw std::invalid_argument("deck-content conditioning: deck out of range");
      std::map<std::vector<Card>, std::uint32_t> ids;
      for (StateIndex x = 0; x < N; ++x) {
        const Configuration s = space.unrank(x);
        auto deck = s.deck(cond.i);
        auto [it, inserted] =
            ids.emplace(std::vector<Card>(deck.begin(), deck.end()), static_cast<std::uint32_t>(ids.size()));
        t.class_of[x] = it->second;
      }
      t.num_classes = static_cast<std::uint32_t>(ids.size());
      return t;
    }
  }
  return t;
}

std::vector<double> conditional_mean(const StateSpace& space, const std::vector<double>& f, const Conditioning& cond) {
  if (f.size() != space.size()) throw std::invalid_argument("function table does not match the state space");
  const ProjectorTerm t = conditioning_classes(space, cond);
  const Eigen::VectorXd avg = t.average(Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size())));
  return std::vector<double>(avg.data(), avg.data() + avg.size());
}

std::vector<double> conditional_variance(const StateSpace& space, const std::vector<double>& f,
                                         const Conditioning& cond) {
  if (f.size() != space.size()) throw std::invalid_argument("function table does not match the state space");
  const ProjectorTerm t = conditioning_classes(space, cond);
  const auto fv = Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  const Eigen::VectorXd sq = t.average(fv.array().square().matrix());
  const Eigen::VectorXd avg = t.average(fv);
  std::vector<double> out(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) out[x] = std::max(0.0, sq[x] - avg[x] * avg[x]);
  return out;
}

// ---- lumped exact evaluation ---------------------------------------------

Rational lumped_size_mean(int n, int k, const std::function<Rational(const std::vector<int>&)>& g) {
  Rational sum = 0;
  std::int64_t count = 0;
  for_each_composition(n, k, [&](const std::vector<int>& c) {
    sum += g(c);
    ++count;
  });
  return sum / count;
}

Rational lumped_size_variance(int n, int k, const std::function<Rational(const std::vector<int>&)>& g) {
  const Rational m = lumped_size_mean(n, k, g);
  return lumped_size_mean(n, k, [&](const std::vector<int>& c) {
    const Rational d = g(c) - m;
    return d * d;
  });
}

Rational lumped_size_form_ek(int n, int k, const std::function<Rational(const std::vector<int>&)>& g) {
  // slot (deck d, height h): h = 0 is the extra slot and keeps all n_d cards, h >= 1 keeps h-1
  Rational sum = 0;
  std::int64_t count = 0;
  for_each_composition(n, k, [&](const std::vector<int>& c) {
    ++count;
    const Rational here = g(c);
    std::vector<int> next = c;
    for (int da = 0; da < k; ++da)
      for (int ha = 0; ha <= c[da]; ++ha)
        for (int db = 0; db < k; ++db) {
          if (db == da) continue;
          for (int hb = 0; hb <= c[db]; ++hb) {
            const int keep_a = ha == 0 ? c[da] : ha - 1;
            const int keep_b = hb == 0 ? c[db] : hb - 1;
            next[da] = keep_a + (c[db] - keep_b);
            next[db] = keep_b + (c[da] - keep_a);
            const Rational d = g(next) - here;
            sum += d * d;
            next[da] = c[da];
            next[db] = c[db];
          }
        }
  });
  return sum / (Rational(2 * (n + k) * (n + k)) * count);
}

// ---- gaps ----------------------------------------------------------------

GapReport spectral_gap(const OperatorMatrix& matrix, const EigenOptions& options) {
  const auto N = matrix.size();
  if (N < 2) throw std::invalid_argument("spectral gap needs at least two states");
  if (matrix.symmetry_defect() > 1e-10) throw std::invalid_argument("operator is not symmetric");
  const EigenResult r = smallest_on_mean_zero(
      [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out = matrix.apply_laplacian(in); }, N, options);
  GapReport rep;
  rep.state_count = static_cast<StateIndex>(N);
  rep.gap = r.value;
  rep.relaxation_time = r.value > 0 ? 1.0 / r.value : std::numeric_limits<double>::infinity();
  rep.residual = r.residual;
  rep.matvecs = r.matvecs;
  rep.converged = r.converged;
  return rep;
}

GapReport kernel_gap(const Kernel& kernel, int n, int k, const MatrixCaps& caps, const EigenOptions& options,
                     Parallelism par) {
  GapReport rep = spectral_gap(build_matrix(kernel, n, k, caps, par), options);
  rep.chain = std::string(kernel_name(kernel.id));
  rep.n = n;
  rep.k = k;
  rep.gap_times_nk = (n + k) * rep.gap;
  return rep;
}

double rayleigh_relaxation(const Form& form, int n, int k, const MatrixCaps& caps, const EigenOptions& options) {
  const OperatorMatrix m = form_operator(form, n, k, caps);
  const GapReport rep = spectral_gap(m, options);
  if (rep.gap <= 1e-12) return std::numeric_limits<double>::infinity();
  return 1.0 / rep.gap;
}

// ---- K and projector averages ---------------------------------------------

KMatrix build_K_matrix(int m, int k) {
  if (k < 2) throw std::invalid_argument("K needs at least two decks");
  const StateSpace space = checked_space(m, k, 5000000, "--sparse-cap");

  KMatrix out;
  // all ordered contents, by length then lexicographically
  std::map<std::vector<Card>, int> index;
  std::vector<Card> cur;
  std::function<void(std::size_t)> gen = [&](std::size_t len) {
    if (cur.size() == len) {
      index.emplace(cur, 0);
      return;
    }
    for (Card c = 1; c <= m; ++c) {
      if (std::find(cur.begin(), cur.end(), c) != cur.end()) continue;
      cur.push_back(c);
      gen(len);
      cur.pop_back();
    }
  };
  for (int len = 0; len <= m; ++len) gen(static_cast<std::size_t>(len));
  {
    std::vector<std::vector<Card>> all;
    for (auto& [seq, id] : index) all.push_back(seq);
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
    for (std::size_t i = 0; i < all.size(); ++i) index[all[i]] = static_cast<int>(i);
    out.contents = std::move(all);
  }
  const auto S = static_cast<Eigen::Index>(out.contents.size());
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(S, S);
  Eigen::VectorXd given = Eigen::VectorXd::Zero(S);
  for (StateIndex x = 0; x < space.size(); ++x) {
    const Configuration s = space.unrank(x);
    auto d1 = s.deck(1), d0 = s.deck(0);
    const int a = index.at(std::vector<Card>(d1.begin(), d1.end()));
    const int b = index.at(std::vector<Card>(d0.begin(), d0.end()));
    joint(a, b) += 1.0;
    given[a] += 1.0;
  }
  out.K = joint;
  for (Eigen::Index a = 0; a < S; ++a) out.K.row(a) /= given[a];
  out.marginal = given / static_cast<double>(space.size());
  return out;
}

std::vector<SpectrumEntry> K_spectrum(int m, int k, double cluster_tol) {
  const KMatrix km = build_K_matrix(m, k);
  // K is reversible for the one-deck marginal, so D^1/2 K D^-1/2 is symmetric
  const Eigen::VectorXd sq = km.marginal.array().sqrt();
  Eigen::MatrixXd sym = sq.asDiagonal() * km.K * sq.cwiseInverse().asDiagonal();
  sym = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  std::vector<double> values(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(values.begin(), values.end(), std::greater<>());
  std::vector<SpectrumEntry> out;
  for (double v : values) {
    if (!out.empty() && std::abs(out.back().value - v) <= cluster_tol) {
      ++out.back().multiplicity;
    } else {
      out.push_back({v, 1});
    }
  }
  return out;
}

std::optional<double> projector_average_bound(int m, const EigenOptions& options) {
  if (m == 0) return std::nullopt;
  const StateSpace space = checked_space(m, 3, 5000000, "--sparse-cap");
  std::vector<ProjectorTerm> terms;
  for (int d = 0; d < 3; ++d) {
    ProjectorTerm t = conditioning_classes(space, Conditioning::deck_content(d));
    std::fill(t.weight.begin(), t.weight.end(), 1.0 / 3.0);
    terms.push_back(std::move(t));
  }
  const auto N = static_cast<std::int64_t>(space.size());
  // I - P as a form; the top of P on mean-zero functions is 1 minus its bottom
  const OperatorMatrix op(OperatorKind::QuadraticForm, SparseMatrix(N, N), std::move(terms));
  const GapReport rep = spectral_gap(op, options);
  return 1.0 - rep.gap;
}

}  // namespace topswap
