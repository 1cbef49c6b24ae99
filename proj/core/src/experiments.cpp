#include "dista/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

namespace dista {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent,
                          std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(parent);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k));
  return h;
}

namespace {

// Sub-streams of a trial seed.
enum : std::uint64_t { kSignalStream = 1, kSensingStream = 2, kNoiseStream = 3 };

}  // namespace

SparseSignal generate_signal(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) throw ParameterError("generate_signal: k exceeds n");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());

  std::normal_distribution<double> normal(0.0, 1.0);
  SparseSignal out{Vector::Zero(static_cast<Eigen::Index>(n)), idx, seed};
  for (std::size_t i : idx) out.x0[static_cast<Eigen::Index>(i)] = normal(rng);
  return out;
}

std::vector<SensorData> generate_sensing(std::size_t nodes, std::size_t m, std::size_t n,
                                         std::uint64_t seed) {
  if (m == 0 || n == 0) throw ParameterError("generate_sensing: m and n must be positive");
  std::vector<SensorData> out;
  out.reserve(nodes);
  const double sd = 1.0 / std::sqrt(static_cast<double>(m));
  for (std::size_t v = 0; v < nodes; ++v) {
    std::mt19937_64 rng(derive_seed(seed, {v}));
    std::normal_distribution<double> normal(0.0, sd);
    Matrix A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    // Fill row by row so the draw order is independent of storage order.
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      for (Eigen::Index c = 0; c < A.cols(); ++c) A(r, c) = normal(rng);
    }
    out.emplace_back(std::move(A), Vector::Zero(static_cast<Eigen::Index>(m)), v);
  }
  return out;
}

void measure(std::vector<SensorData>& sensors, const Vector& x0) {
  for (auto& s : sensors) {
    if (s.cols() != x0.size()) throw ShapeError("measure: signal length mismatch");
    s.y = s.A * x0;
  }
}

NoiseResult apply_noise(const std::vector<Vector>& clean, double target_snr,
                        std::uint64_t seed) {
  if (!(target_snr > 0.0)) throw ParameterError("apply_noise: target SNR must be positive");
  NoiseResult out{clean, 0.0, INFINITY};
  if (std::isinf(target_snr)) return out;

  double energy = 0.0;
  Eigen::Index count = 0;
  for (const auto& y : clean) {
    energy += y.squaredNorm();
    count += y.size();
  }
  if (count == 0 || energy == 0.0) {
    throw ParameterError("apply_noise: clean measurements carry no energy");
  }
  out.sigma = std::sqrt(energy / (static_cast<double>(count) * target_snr));

  double noise_energy = 0.0;
  for (std::size_t v = 0; v < clean.size(); ++v) {
    std::mt19937_64 rng(derive_seed(seed, {v}));
    std::normal_distribution<double> normal(0.0, out.sigma);
    for (Eigen::Index i = 0; i < clean[v].size(); ++i) {
      const double xi = normal(rng);
      out.noisy[v][i] += xi;
      noise_energy += xi * xi;
    }
  }
  out.realized_snr = energy / noise_energy;
  return out;
}

MetricSet evaluate(const EstimateMatrix& X, const Vector& x0, double snr_realized) {
  if (X.rows() != x0.size() || X.cols() == 0) throw ShapeError("evaluate: shape mismatch");
  const double mse = (X.colwise() - x0).squaredNorm() / static_cast<double>(X.size());
  return {mse, mse < kRecoveryThreshold, snr_realized};
}

void TrialConfig::validate() const {
  if (n == 0) throw ParameterError("n must be positive");
  if (k > n) throw ParameterError("k must not exceed n");
  if (m == 0) throw ParameterError("m must be at least 1");
  if (nodes == 0) throw ParameterError("nodes must be at least 1");
  if (!(q > 0.0 && q <= 1.0)) throw ParameterError("q must lie in (0, 1]");
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  if (!(tau > 0.0)) throw ParameterError("tau must be positive");
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  if (!(rho > 0.0)) throw ParameterError("rho must be positive");
  if (snr_db && std::isnan(*snr_db)) throw ParameterError("snr_db must be a number");
  termination.validate();
}

Instance generate_instance(const TrialConfig& config) {
  config.validate();
  Instance inst;
  inst.signal = generate_signal(config.n, config.k, derive_seed(config.seed, {kSignalStream}));
  inst.sensors = generate_sensing(config.nodes, config.m, config.n,
                                  derive_seed(config.seed, {kSensingStream}));
  if (config.zero_measurements) return inst;

  measure(inst.sensors, inst.signal.x0);
  if (config.snr_db && std::isfinite(*config.snr_db)) {
    std::vector<Vector> clean;
    clean.reserve(inst.sensors.size());
    for (const auto& s : inst.sensors) clean.push_back(s.y);
    const auto noise = apply_noise(
        clean, db_to_linear(*config.snr_db),
        derive_seed(config.seed, {kNoiseStream, std::bit_cast<std::uint64_t>(*config.snr_db)}));
    for (std::size_t v = 0; v < inst.sensors.size(); ++v) inst.sensors[v].y = noise.noisy[v];
    inst.realized_snr = noise.realized_snr;
  }
  return inst;
}

SolverReport run_solver(const TrialConfig& config, const Instance& instance) {
  const SensorSpan data(instance.sensors);
  switch (config.solver) {
    case SolverKind::ista:
      return ista_run(data, LassoParams{config.alpha, config.tau}, config.termination,
                      config.stepsize_policy);
    case SolverKind::dista:
      return dista_run(data, config.topology.build(config.nodes),
                       DistaParams::uniform(config.q, config.alpha, config.tau, config.nodes),
                       config.termination, config.stepsize_policy);
    case SolverKind::dsm:
      return dsm_run(data, config.topology.build(config.nodes),
                     DsmParams{config.gamma, config.alpha, config.tau}, config.termination);
    case SolverKind::admm:
      return admm_run(data, config.topology.build(config.nodes),
                      AdmmParams{config.rho, LassoParams{config.alpha, config.tau}},
                      config.termination);
  }
  throw ParameterError("run_solver: unknown solver");
}

TrialOutcome run_trial(const TrialConfig& config) {
  TrialOutcome out;
  try {
    const Instance inst = generate_instance(config);
    const SolverReport report = run_solver(config, inst);
    out.metrics = evaluate(report.X, inst.signal.x0, inst.realized_snr);
    out.iterations = report.iterations;
    out.converged = report.converged();
  } catch (const std::exception&) {
    out.failed = true;
    out.metrics = {NAN, false, NAN};
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t m, std::size_t nodes,
                         std::size_t trial) noexcept {
  return derive_seed(master, {m, nodes, trial});
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

const PhaseCell& PhaseGridResult::at(std::size_t m, std::size_t nodes) const {
  for (const auto& c : cells) {
    if (c.m == m && c.nodes == nodes) return c;
  }
  throw ParameterError("phase grid has no cell (m=" + std::to_string(m) +
                       ", nodes=" + std::to_string(nodes) + ")");
}

PhaseGridResult phase_transition(const TrialConfig& base, const std::vector<std::size_t>& m_values,
                                 const std::vector<std::size_t>& node_values, std::size_t trials,
                                 std::size_t workers) {
  if (trials == 0) throw ParameterError("phase_transition: trials must be at least 1");
  if (m_values.empty() || node_values.empty()) {
    throw ParameterError("phase_transition: empty grid axis");
  }
  base.validate();

  const std::size_t cols = node_values.size();
  const std::size_t cell_count = m_values.size() * cols;
  std::vector<TrialOutcome> outcomes(cell_count * trials);
  parallel_for(outcomes.size(), workers, [&](std::size_t job) {
    const std::size_t cell = job / trials;
    TrialConfig cfg = base;
    cfg.m = m_values[cell / cols];
    cfg.nodes = node_values[cell % cols];
    cfg.seed = trial_seed(base.seed, cfg.m, cfg.nodes, job % trials);
    outcomes[job] = run_trial(cfg);
  });

  PhaseGridResult result{m_values, node_values, trials, {}};
  result.cells.reserve(cell_count);
  for (std::size_t cell = 0; cell < cell_count; ++cell) {
    PhaseCell c{m_values[cell / cols], node_values[cell % cols], trials, 0, 0};
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& o = outcomes[cell * trials + t];
      if (o.metrics.recovered) ++c.recovered;
      if (o.failed) ++c.failures;
    }
    result.cells.push_back(c);
  }
  return result;
}

std::vector<SnrRow> snr_sweep(const TrialConfig& base, const std::vector<double>& snr_db_values,
                              const std::vector<SolverKind>& solvers,
                              const std::vector<std::size_t>& m_values, std::size_t trials,
                              std::size_t workers) {
  if (trials == 0) throw ParameterError("snr_sweep: trials must be at least 1");
  if (snr_db_values.empty() || solvers.empty() || m_values.empty()) {
    throw ParameterError("snr_sweep: empty sweep axis");
  }
  base.validate();

  std::vector<SnrRow> rows;
  for (SolverKind s : solvers) {
    for (std::size_t m : m_values) {
      for (double snr : snr_db_values) rows.push_back({s, m, snr, trials, 0.0, 0});
    }
  }

  std::vector<TrialOutcome> outcomes(rows.size() * trials);
  parallel_for(outcomes.size(), workers, [&](std::size_t job) {
    const SnrRow& row = rows[job / trials];
    TrialConfig cfg = base;
    cfg.solver = row.solver;
    cfg.m = row.m;
    cfg.snr_db = row.snr_db;
    cfg.seed = trial_seed(base.seed, row.m, base.nodes, job % trials);
    outcomes[job] = run_trial(cfg);
  });

  for (std::size_t r = 0; r < rows.size(); ++r) {
    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& o = outcomes[r * trials + t];
      sum += o.metrics.mse;
      if (o.failed) ++rows[r].failures;
    }
    rows[r].mean_mse = sum / static_cast<double>(trials);
  }
  return rows;
}

const SnrRow& find_row(const std::vector<SnrRow>& rows, SolverKind solver, std::size_t m,
                       double snr_db) {
  for (const auto& r : rows) {
    if (r.solver == solver && r.m == m && r.snr_db == snr_db) return r;
  }
  throw ParameterError("snr sweep has no row for " + std::string(to_string(solver)) +
                       " at m=" + std::to_string(m));
}

namespace {

// Shortest round-trip representation; locale-independent.
std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_phase_csv(std::ostream& out, const PhaseGridResult& result) {
  out << "m,nodes,trials,recovery_rate\n";
  for (const auto& c : result.cells) {
    out << c.m << ',' << c.nodes << ',' << c.trials << ',' << format_real(c.recovery_rate())
        << '\n';
  }
}

void write_snr_csv(std::ostream& out, const std::vector<SnrRow>& rows) {
  out << "solver,m,snr_db,trials,mean_mse\n";
  for (const auto& r : rows) {
    out << to_string(r.solver) << ',' << r.m << ',' << format_real(r.snr_db) << ','
        << r.trials << ',' << format_real(r.mean_mse) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const SolverReport& report) {
  out << "iter,objective,step_norm\n";
  for (std::size_t i = 0; i < report.objective.size(); ++i) {
    out << (i + 1) << ',' << format_real(report.objective[i]) << ','
        << format_real(report.step_norm[i]) << '\n';
  }
}

}  // namespace dista
