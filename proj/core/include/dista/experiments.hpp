#pragma once

#include "dista/graph.hpp"
#include "dista/objectives.hpp"
#include "dista/solvers.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <vector>

namespace dista {

// ---------------------------------------------------------------------------
// Seeding
// ---------------------------------------------------------------------------

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based child seed: depends only on (parent, keys), never on the
/// order in which children are requested.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> keys) noexcept;

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct SparseSignal {
  Vector x0;
  std::vector<std::size_t> support;  // sorted
  std::uint64_t seed = 0;
};

/// k-sparse signal: support drawn uniformly without replacement, nonzero
/// values i.i.d. N(0, 1).
SparseSignal generate_signal(std::size_t n, std::size_t k, std::uint64_t seed);

/// One m x n matrix per node with i.i.d. N(0, 1/m) entries; y_v left at zero.
std::vector<SensorData> generate_sensing(std::size_t nodes, std::size_t m, std::size_t n,
                                         std::uint64_t seed);

/// Sets y_v = A_v x0 for every node.
void measure(std::vector<SensorData>& sensors, const Vector& x0);

struct NoiseResult {
  std::vector<Vector> noisy;
  double sigma = 0.0;
  /// sum ||y_v||^2 / sum ||xi_v||^2; infinity when no noise was added.
  double realized_snr = 0.0;
};

/// Adds i.i.d. Gaussian noise with variance chosen so that
/// sum ||y_v||^2 / (M sigma^2) = target_snr, M the total measurement count.
/// An infinite target leaves the measurements untouched.
NoiseResult apply_noise(const std::vector<Vector>& clean, double target_snr, std::uint64_t seed);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

inline constexpr double kRecoveryThreshold = 1e-4;

struct MetricSet {
  double mse = 0.0;
  bool recovered = false;
  double snr_realized = 0.0;
};

/// MSE = sum_v ||x0 - x_v||^2 / (n |V|); recovered iff MSE < 1e-4.
MetricSet evaluate(const EstimateMatrix& X, const Vector& x0, double snr_realized = INFINITY);

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

struct TrialConfig {
  std::size_t n = 150;
  std::size_t k = 15;
  std::size_t m = 10;
  std::size_t nodes = 10;
  TopologySpec topology{};
  SolverKind solver = SolverKind::dista;
  double q = 0.5;
  double alpha = 1e-4;
  double tau = 0.02;
  double gamma = 1e-3;
  double rho = 1.0;
  /// Target SNR in dB; nullopt means noise-free.
  std::optional<double> snr_db;
  /// Forces y_v = 0 (debugging aid).
  bool zero_measurements = false;
  std::uint64_t seed = 1;
  TerminationCriteria termination{};
  StepsizePolicy stepsize_policy = StepsizePolicy::enforce;

  void validate() const;
};

/// A generated problem instance with its ground truth.
struct Instance {
  SparseSignal signal;
  std::vector<SensorData> sensors;
  double realized_snr = INFINITY;
};

/// Draws signal, matrices and noise for `config`, all from `config.seed`.
Instance generate_instance(const TrialConfig& config);

/// Runs the configured solver on an instance. Propagates solver errors.
SolverReport run_solver(const TrialConfig& config, const Instance& instance);

struct TrialOutcome {
  MetricSet metrics;
  int iterations = 0;
  bool converged = false;
  bool failed = false;
};

/// Generates and solves one trial; solver exceptions become failed,
/// non-recovered outcomes with NaN MSE.
TrialOutcome run_trial(const TrialConfig& config);

/// Seed of trial `trial` in the cell (m, nodes) under `master`.
std::uint64_t trial_seed(std::uint64_t master, std::size_t m, std::size_t nodes,
                         std::size_t trial) noexcept;

// ---------------------------------------------------------------------------
// Campaigns
// ---------------------------------------------------------------------------

/// Executes fn(0..count-1) on `workers` threads. Results must be keyed by
/// index by the caller; the first exception is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

struct PhaseCell {
  std::size_t m = 0;
  std::size_t nodes = 0;
  std::size_t trials = 0;
  std::size_t recovered = 0;
  std::size_t failures = 0;

  double recovery_rate() const noexcept {
    return trials ? static_cast<double>(recovered) / static_cast<double>(trials) : 0.0;
  }
};

struct PhaseGridResult {
  std::vector<std::size_t> m_values;
  std::vector<std::size_t> node_values;
  std::size_t trials = 0;
  /// Row-major over (m, nodes): cells[i * node_values.size() + j].
  std::vector<PhaseCell> cells;

  const PhaseCell& at(std::size_t m, std::size_t nodes) const;
};

PhaseGridResult phase_transition(const TrialConfig& base, const std::vector<std::size_t>& m_values,
                                 const std::vector<std::size_t>& node_values, std::size_t trials,
                                 std::size_t workers = 1);

struct SnrRow {
  SolverKind solver = SolverKind::dista;
  std::size_t m = 0;
  double snr_db = 0.0;
  std::size_t trials = 0;
  double mean_mse = 0.0;
  std::size_t failures = 0;
};

/// Mean MSE for every (solver, m, snr) triple at base.nodes nodes. Trials
/// share their signal and matrices across solvers and SNR levels.
std::vector<SnrRow> snr_sweep(const TrialConfig& base, const std::vector<double>& snr_db_values,
                              const std::vector<SolverKind>& solvers,
                              const std::vector<std::size_t>& m_values, std::size_t trials,
                              std::size_t workers = 1);

const SnrRow& find_row(const std::vector<SnrRow>& rows, SolverKind solver, std::size_t m,
                       double snr_db);

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_phase_csv(std::ostream& out, const PhaseGridResult& result);
void write_snr_csv(std::ostream& out, const std::vector<SnrRow>& rows);
void write_trace_csv(std::ostream& out, const SolverReport& report);

}  // namespace dista
