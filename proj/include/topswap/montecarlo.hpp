#pragma once

// Trajectory simulation of every kernel (generators through uniformization),
// autocorrelation-based relaxation estimates, exact total-variation curves and
// (n+k)-scaling scans.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "topswap/config_space.hpp"
#include "topswap/kernels.hpp"
#include "topswap/spectral.hpp"

namespace topswap {

enum class ObservableId {
  Deck1Size,
  StarPosition,    // 2 decks only
  IsDeck1Empty,
  AdjacencyCount,  // number of cards c with c+1 directly on top of c
  Custom,          // table indexed by state rank
};

struct Observable {
  ObservableId id = ObservableId::Deck1Size;
  std::vector<double> table;  // Custom only

  std::string name() const;
};

std::optional<ObservableId> parse_observable_name(std::string_view name);
double evaluate(const Observable& obs, const Configuration& state, const StateSpace* space = nullptr);

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulationConfig {
  Kernel kernel;
  int n = 0;
  int k = 2;
  std::int64_t steps = 0;
  std::uint64_t seed = 1;
  std::int64_t stride = 1;
  std::int64_t burn_in = 0;
  std::optional<Configuration> start;  // default: uniform draw (stationary start)
};

struct Trajectory {
  std::string kernel;
  std::string observable;
  int n = 0;
  int k = 0;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  std::int64_t stride = 1;
  double uniformization_rate = 1;  // steps per unit time; 1 for discrete kernels
  std::string start_state;
  std::vector<double> samples;     // samples[t] observed after t*stride steps

  /// Time units between consecutive samples.
  double sample_spacing() const { return static_cast<double>(stride) / uniformization_rate; }
};

Trajectory simulate(const SimulationConfig& config, const Observable& obs);

/// Independent replicas with seeds split from config.seed; run in parallel, returned in replica order.
std::vector<Trajectory> simulate_replicas(const SimulationConfig& config, const Observable& obs, int replicas,
                                          int workers = 0);

/// Ranks of visited states, sampled every `stride` steps after `burn_in`.
std::vector<StateIndex> sample_states(const SimulationConfig& config, std::int64_t samples);

struct RelaxationOptions {
  double window_threshold = 0.05;  // W = first lag with rho < threshold
  double fit_start_fraction = 0.25;
  int batches = 20;
  double sokal_c = 6.0;
};

struct RelaxationEstimate {
  std::string observable;
  double tau = 0;              // exponential fit, time units
  double stderr_tau = 0;       // batch means
  std::string method = "exponential-fit";
  std::int64_t window = 0;     // lags
  std::int64_t fit_lo = 0;
  std::int64_t fit_hi = 0;
  double tau_int = 0;          // integrated autocorrelation time, time units
  double stderr_tau_int = 0;
  std::int64_t sokal_window = 0;
  bool short_run = false;      // length < 100 tau
};

/// Autocorrelation at lags 0..max_lag.
std::vector<double> autocorrelation(const std::vector<double>& x, std::int64_t max_lag);

RelaxationEstimate estimate_relaxation(const Trajectory& traj, const RelaxationOptions& options = {});

struct TvPoint {
  double t;
  double tv;
};

/// TV distance to uniform after t = 0..t_max steps (discrete) or uniformized steps (generators,
/// reported in time units).
std::vector<TvPoint> exact_tv_curve(const Kernel& kernel, int n, int k, const Configuration& start, int t_max,
                                    const MatrixCaps& caps = {});
/// Same from an initial law indexed by state rank.
std::vector<TvPoint> exact_tv_curve(const Kernel& kernel, int n, int k, const std::vector<double>& initial, int t_max,
                                    const MatrixCaps& caps = {});

/// p-value of Pearson's chi-square statistic for counts against expected probabilities.
double chi_square_pvalue(const std::vector<double>& observed, const std::vector<double>& expected_prob);

enum class ScanMode { Exact, MonteCarlo };

struct ScanRow {
  std::string chain;
  int n = 0;
  int k = 0;
  StateIndex states = 0;  // 0 when not enumerated
  double gap = 0;
  double relaxation_time = 0;
  double gap_times_nk = 0;
  double tau_over_nk = 0;
  ScanMode mode = ScanMode::Exact;
  double residual = 0;    // eigensolver residual, or MC standard error
};

struct LinearFit {
  double intercept = 0;
  double slope = 0;
  double predict(double x) const { return intercept + slope * x; }
};

struct ScanResult {
  std::vector<ScanRow> rows;
  LinearFit fit;  // relaxation_time against n+k
  double max_over_min_tau_over_nk = 0;
};

struct ScanParams {
  MatrixCaps caps;
  EigenOptions eigen;
  Parallelism par;
  std::int64_t mc_steps = 1000000;
  std::uint64_t seed = 1;
  Observable mc_observable{ObservableId::AdjacencyCount, {}};
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

/// Rows ordered by n then k.
ScanResult scaling_scan(const Kernel& kernel, std::vector<std::pair<int, int>> grid, ScanMode mode,
                        const ScanParams& params = {});

}  // namespace topswap
