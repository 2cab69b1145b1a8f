#include "topswap/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>

namespace topswap {

namespace {

void check_observable(const Observable& obs, int n, int k) {
  if (obs.id == ObservableId::StarPosition && k != 2)
    throw std::invalid_argument("star_position is defined for 2 decks only");
  if (obs.id == ObservableId::Custom) {
    const BigInt count = state_count(n, k);
    if (BigInt(obs.table.size()) != count)
      throw std::invalid_argument("custom observable table does not cover the state space");
  }
}

double mean_of(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
  double s = 0;
  for (std::size_t i = lo; i < hi; ++i) s += x[i];
  return s / static_cast<double>(hi - lo);
}

// rho(t) of x[lo, hi) around its own mean; nullopt for a constant segment.
std::optional<std::vector<double>> segment_acf(const std::vector<double>& x, std::size_t lo, std::size_t hi,
                                               std::int64_t max_lag) {
  const double m = mean_of(x, lo, hi);
  const auto len = static_cast<std::int64_t>(hi - lo);
  std::vector<double> c(std::min<std::int64_t>(max_lag, len - 1) + 1, 0.0);
  for (std::size_t t = 0; t < c.size(); ++t) {
    double s = 0;
    for (std::size_t i = lo; i + t < hi; ++i) s += (x[i] - m) * (x[i + t] - m);
    c[t] = s / static_cast<double>(len);
  }
  if (c[0] <= 0) return std::nullopt;
  for (std::size_t t = c.size(); t-- > 0;) c[t] /= c[0];
  return c;
}

// tau in lags from log-linear least squares on rho over [lo, hi]
double fit_tau(const std::vector<double>& rho, std::int64_t lo, std::int64_t hi) {
  std::vector<double> xs, ys;
  for (std::int64_t t = lo; t <= hi && t < static_cast<std::int64_t>(rho.size()); ++t)
    if (rho[t] > 0) {
      xs.push_back(static_cast<double>(t));
      ys.push_back(std::log(rho[t]));
    }
  if (xs.size() < 3) {
    const double r1 = rho.size() > 1 ? std::clamp(rho[1], 1e-12, 1.0 - 1e-12) : 1e-12;
    return -1.0 / std::log(r1);
  }
  const LinearFit f = least_squares(xs, ys);
  if (f.slope >= 0) throw NonConvergence("autocorrelation does not decay over the fit window");
  return -1.0 / f.slope;
}

}  // namespace

std::string Observable::name() const {
  switch (id) {
    case ObservableId::Deck1Size: return "deck1_size";
    case ObservableId::StarPosition: return "star_position";
    case ObservableId::IsDeck1Empty: return "is_deck1_empty";
    case ObservableId::AdjacencyCount: return "adjacency_count";
    case ObservableId::Custom: return "custom";
  }
  return "unknown";
}

std::optional<ObservableId> parse_observable_name(std::string_view name) {
  for (ObservableId id : {ObservableId::Deck1Size, ObservableId::StarPosition, ObservableId::IsDeck1Empty,
                          ObservableId::AdjacencyCount, ObservableId::Custom}) {
    std::string candidate = Observable{id, {}}.name();
    std::string lowered(name);
    for (char& c : lowered) c = c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lowered == candidate) return id;
  }
  return std::nullopt;
}

double evaluate(const Observable& obs, const Configuration& state, const StateSpace* space) {
  switch (obs.id) {
    case ObservableId::Deck1Size: return state.deck_size(0);
    case ObservableId::StarPosition:
      if (state.k() != 2) throw std::invalid_argument("star_position is defined for 2 decks only");
      return state.deck_size(0) + 1;
    case ObservableId::IsDeck1Empty: return state.deck_size(0) == 0 ? 1.0 : 0.0;
    case ObservableId::AdjacencyCount: {
      int count = 0;
      for (int d = 0; d < state.k(); ++d) {
        auto deck = state.deck(d);
        for (std::size_t h = 0; h + 1 < deck.size(); ++h)
          if (deck[h + 1] == deck[h] + 1) ++count;
      }
      return count;
    }
    case ObservableId::Custom:
      if (space == nullptr) throw std::invalid_argument("custom observable needs the state space");
      return obs.table.at(space->rank(state));
  }
  return 0;
}

Trajectory simulate(const SimulationConfig& config, const Observable& obs) {
  require_compatible(config.kernel, config.n, config.k);
  if (config.steps < 1) throw std::invalid_argument("steps must be at least 1");
  if (config.stride < 1) throw std::invalid_argument("stride must be at least 1");
  check_observable(obs, config.n, config.k);
  std::optional<StateSpace> space;
  if (obs.id == ObservableId::Custom) space.emplace(config.n, config.k);

  Rng rng(config.seed);
  Configuration state = config.start ? *config.start : sample_uniform(config.n, config.k, rng);
  if (state.n() != config.n || state.k() != config.k) throw std::invalid_argument("start state does not match (n, k)");

  Trajectory traj;
  traj.kernel = std::string(kernel_name(config.kernel.id));
  traj.observable = obs.name();
  traj.n = config.n;
  traj.k = config.k;
  traj.seed = config.seed;
  traj.steps = config.steps;
  traj.stride = config.stride;
  traj.uniformization_rate = uniformization_rate(config.kernel, config.n, config.k);
  traj.start_state = state.to_string();

  for (std::int64_t s = 0; s < config.burn_in; ++s) step(config.kernel, state, rng);
  const StateSpace* sp = space ? &*space : nullptr;
  traj.samples.reserve(static_cast<std::size_t>(config.steps / config.stride + 1));
  traj.samples.push_back(evaluate(obs, state, sp));
  for (std::int64_t s = 1; s <= config.steps; ++s) {
    step(config.kernel, state, rng);
    if (s % config.stride == 0) traj.samples.push_back(evaluate(obs, state, sp));
  }
  return traj;
}

std::vector<Trajectory> simulate_replicas(const SimulationConfig& config, const Observable& obs, int replicas,
                                          int workers) {
  if (replicas < 1) throw std::invalid_argument("need at least one replica");
  std::vector<Trajectory> out(replicas);
  const int threads = std::max(1, std::min(replicas, Parallelism{workers}.resolved()));
  auto run = [&](int t) {
    for (int r = t; r < replicas; r += threads) {
      SimulationConfig c = config;
      c.seed = Rng(config.seed).split(static_cast<std::uint64_t>(r)).stream();
      out[r] = simulate(c, obs);
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(run, t);
    for (auto& th : pool) th.join();
  }
  return out;
}

std::vector<StateIndex> sample_states(const SimulationConfig& config, std::int64_t samples) {
  require_compatible(config.kernel, config.n, config.k);
  const StateSpace space(config.n, config.k);
  Rng rng(config.seed);
  Configuration state = config.start ? *config.start : sample_uniform(config.n, config.k, rng);
  for (std::int64_t s = 0; s < config.burn_in; ++s) step(config.kernel, state, rng);
  std::vector<StateIndex> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (std::int64_t i = 0; i < samples; ++i) {
    for (std::int64_t s = 0; s < config.stride; ++s) step(config.kernel, state, rng);
    out.push_back(space.rank(state));
  }
  return out;
}

std::vector<double> autocorrelation(const std::vector<double>& x, std::int64_t max_lag) {
  if (x.size() < 2) throw std::invalid_argument("autocorrelation needs at least two samples");
  auto rho = segment_acf(x, 0, x.size(), max_lag);
  if (!rho) throw NonConvergence("observable is constant along the trajectory");
  return *rho;
}

RelaxationEstimate estimate_relaxation(const Trajectory& traj, const RelaxationOptions& options) {
  const auto& x = traj.samples;
  const auto N = static_cast<std::int64_t>(x.size());
  if (N < 100) throw std::invalid_argument("trajectory too short for a relaxation estimate");
  const double spacing = traj.sample_spacing();
  const std::int64_t max_lag = N / 10;

  // grow the lag range until rho drops below the threshold
  std::vector<double> rho;
  std::int64_t window = -1;
  for (std::int64_t cap = std::min<std::int64_t>(64, max_lag);; cap = std::min(cap * 4, max_lag)) {
    rho = autocorrelation(x, cap);
    for (std::int64_t t = 1; t < static_cast<std::int64_t>(rho.size()); ++t)
      if (rho[t] < options.window_threshold) {
        window = t;
        break;
      }
    if (window > 0 || cap == max_lag) break;
  }
  if (window < 0) throw NonConvergence("autocorrelation did not fall below the window threshold");

  RelaxationEstimate est;
  est.observable = traj.observable;
  est.window = window;
  est.fit_lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(window * options.fit_start_fraction)));
  est.fit_hi = window;
  est.tau = fit_tau(rho, est.fit_lo, est.fit_hi) * spacing;

  // batch means for the fit's standard error
  int batches = options.batches;
  while (batches > 2 && N / batches < 20 * window) --batches;
  std::vector<double> taus;
  for (int b = 0; b < batches; ++b) {
    const auto lo = static_cast<std::size_t>(N * b / batches), hi = static_cast<std::size_t>(N * (b + 1) / batches);
    auto r = segment_acf(x, lo, hi, window);
    if (!r) continue;
    try {
      taus.push_back(fit_tau(*r, est.fit_lo, est.fit_hi) * spacing);
    } catch (const NonConvergence&) {
    }
  }
  if (taus.size() >= 2) {
    const double m = std::accumulate(taus.begin(), taus.end(), 0.0) / static_cast<double>(taus.size());
    double ss = 0;
    for (double t : taus) ss += (t - m) * (t - m);
    est.stderr_tau = std::sqrt(ss / static_cast<double>(taus.size() - 1) / static_cast<double>(taus.size()));
  } else {
    est.stderr_tau = std::numeric_limits<double>::infinity();
  }

  // integrated autocorrelation with the self-consistent window M >= c * tau_int(M)
  double tau_int = 0.5;
  std::int64_t M = 0;
  for (std::int64_t t = 1;; ++t) {
    if (t >= static_cast<std::int64_t>(rho.size())) {
      if (static_cast<std::int64_t>(rho.size()) - 1 >= max_lag) break;
      rho = autocorrelation(x, std::min<std::int64_t>(max_lag, 2 * static_cast<std::int64_t>(rho.size())));
    }
    tau_int += rho[t];
    M = t;
    if (static_cast<double>(t) >= options.sokal_c * tau_int) break;
  }
  est.sokal_window = M;
  est.tau_int = tau_int * spacing;
  est.stderr_tau_int = est.tau_int * std::sqrt(2.0 * (2.0 * M + 1.0) / static_cast<double>(N));
  est.short_run = static_cast<double>(N) * spacing < 100.0 * est.tau;
  return est;
}

std::vector<TvPoint> exact_tv_curve(const Kernel& kernel, int n, int k, const std::vector<double>& initial, int t_max,
                                    const MatrixCaps& caps) {
  if (t_max < 0) throw std::invalid_argument("t_max must be nonnegative");
  const OperatorMatrix op = build_matrix(kernel, n, k, caps);
  const auto N = op.size();
  if (static_cast<std::int64_t>(initial.size()) != N) throw std::invalid_argument("initial law has the wrong size");
  const bool continuous = op.kind() == OperatorKind::Generator;
  const double rate = uniformization_rate(kernel, n, k);

  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(initial.data(), N);
  const double u = 1.0 / static_cast<double>(N);
  std::vector<TvPoint> out;
  for (int t = 0; t <= t_max; ++t) {
    out.push_back({continuous ? t / rate : static_cast<double>(t), 0.5 * (p.array() - u).abs().sum()});
    // both operators are symmetric, so the forward equation uses the same matrix
    if (continuous)
      p += op.apply(p) / rate;
    else
      p = op.apply(p);
  }
  return out;
}

std::vector<TvPoint> exact_tv_curve(const Kernel& kernel, int n, int k, const Configuration& start, int t_max,
                                    const MatrixCaps& caps) {
  const BigInt count = state_count(n, k);
  if (count > BigInt(caps.sparse)) throw CapExceeded("state count exceeds the sparse cap", "--sparse-cap");
  const StateSpace space(n, k);
  std::vector<double> initial(space.size(), 0.0);
  initial[space.rank(start)] = 1.0;
  return exact_tv_curve(kernel, n, k, initial, t_max, caps);
}

double chi_square_pvalue(const std::vector<double>& observed, const std::vector<double>& expected_prob) {
  if (observed.size() != expected_prob.size() || observed.empty())
    throw std::invalid_argument("chi-square: size mismatch");
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  double stat = 0;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected_prob[i] <= 0) {
      if (observed[i] > 0) return 0.0;
      continue;
    }
    const double e = total * expected_prob[i];
    stat += (observed[i] - e) * (observed[i] - e) / e;
    ++cells;
  }
  if (cells < 2) return 1.0;
  boost::math::chi_squared dist(cells - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least squares needs two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("least squares: all abscissae equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

ScanResult scaling_scan(const Kernel& kernel, std::vector<std::pair<int, int>> grid, ScanMode mode,
                        const ScanParams& params) {
  if (grid.empty()) throw std::invalid_argument("empty scan grid");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  ScanResult res;
  std::vector<double> xs, ys;
  for (const auto& [n, k] : grid) {
    ScanRow row;
    row.chain = std::string(kernel_name(kernel.id));
    row.n = n;
    row.k = k;
    row.mode = mode;
    if (mode == ScanMode::Exact) {
      const GapReport g = kernel_gap(kernel, n, k, params.caps, params.eigen, params.par);
      if (!g.converged) throw NonConvergence("eigensolver did not converge at (n=" + std::to_string(n) +
                                             ", k=" + std::to_string(k) + ")");
      row.states = g.state_count;
      row.gap = g.gap;
      row.relaxation_time = g.relaxation_time;
      row.residual = g.residual;
    } else {
      SimulationConfig c;
      c.kernel = kernel;
      c.n = n;
      c.k = k;
      c.steps = params.mc_steps;
      c.seed = params.seed;
      const RelaxationEstimate e = estimate_relaxation(simulate(c, params.mc_observable));
      const BigInt count = state_count(n, k);
      row.states = count <= BigInt(std::numeric_limits<StateIndex>::max()) ? count.convert_to<StateIndex>() : 0;
      row.relaxation_time = e.tau;
      row.gap = 1.0 / e.tau;
      row.residual = e.stderr_tau;
    }
    row.gap_times_nk = (n + k) * row.gap;
    row.tau_over_nk = row.relaxation_time / (n + k);
    xs.push_back(n + k);
    ys.push_back(row.relaxation_time);
    res.rows.push_back(row);
  }
  if (xs.size() >= 2 && *std::min_element(xs.begin(), xs.end()) != *std::max_element(xs.begin(), xs.end()))
    res.fit = least_squares(xs, ys);
  double lo = INFINITY, hi = 0;
  for (const auto& r : res.rows) {
    lo = std::min(lo, r.tau_over_nk);
    hi = std::max(hi, r.tau_over_nk);
  }
  res.max_over_min_tau_over_nk = hi / lo;
  return res;
}

}  // namespace topswap
