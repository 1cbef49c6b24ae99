#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace dista::cli {

namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "experiment", "n", "k", "m", "nodes", "topology", "solver", "q", "alpha", "tau",
      "gamma", "rho", "snr_db", "zero_measurements", "seed", "eps", "max_iter",
      "allow_stepsize_violation", "m_values", "node_values", "trials", "snr_db_values",
      "solvers", "sweep_m_values", "output", "workers"};
  return keys;
}

std::size_t get_count(const json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError("'" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

double get_real(const json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

std::vector<std::size_t> get_counts(const json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError("'" + key + "' must be a non-empty array");
  std::vector<std::size_t> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<std::int64_t>() < 1) {
      throw ConfigError("'" + key + "' entries must be positive integers");
    }
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

// Accepts a number or the string "inf".
double snr_value(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && v.get<std::string>() == "inf") return INFINITY;
  throw ConfigError("'" + key + "' entries must be numbers (dB) or \"inf\"");
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  RunConfig cfg;
  TrialConfig& t = cfg.trial;
  try {
    if (doc.contains("experiment")) {
      const auto kind = doc.at("experiment").get<std::string>();
      if (kind != "solve" && kind != "phase" && kind != "snr" && kind != "validate") {
        throw ConfigError("experiment must be solve, phase, snr or validate");
      }
      cfg.experiment = kind;
    }
    if (doc.contains("n")) t.n = get_count(doc, "n");
    if (doc.contains("k")) t.k = get_count(doc, "k");
    if (doc.contains("m")) t.m = get_count(doc, "m");
    if (doc.contains("nodes")) t.nodes = get_count(doc, "nodes");
    if (doc.contains("topology")) t.topology = TopologySpec::parse(doc.at("topology").get<std::string>());
    if (doc.contains("solver")) t.solver = parse_solver_kind(doc.at("solver").get<std::string>());
    if (doc.contains("q")) t.q = get_real(doc, "q");
    if (doc.contains("alpha")) t.alpha = get_real(doc, "alpha");
    if (doc.contains("tau")) t.tau = get_real(doc, "tau");
    if (doc.contains("gamma")) t.gamma = get_real(doc, "gamma");
    if (doc.contains("rho")) t.rho = get_real(doc, "rho");
    if (doc.contains("snr_db") && !doc.at("snr_db").is_null()) {
      const double snr = snr_value(doc.at("snr_db"), "snr_db");
      if (std::isfinite(snr)) t.snr_db = snr;
    }
    if (doc.contains("zero_measurements")) t.zero_measurements = doc.at("zero_measurements").get<bool>();
    if (doc.contains("seed")) t.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("eps")) t.termination.eps = get_real(doc, "eps");
    if (doc.contains("max_iter")) {
      const std::size_t it = get_count(doc, "max_iter");
      if (it > 100'000'000) throw ConfigError("max_iter is unreasonably large");
      t.termination.max_iter = static_cast<int>(it);
    }
    if (doc.contains("allow_stepsize_violation") && doc.at("allow_stepsize_violation").get<bool>()) {
      t.stepsize_policy = StepsizePolicy::allow;
    }
    if (doc.contains("m_values")) cfg.m_values = get_counts(doc, "m_values");
    if (doc.contains("node_values")) cfg.node_values = get_counts(doc, "node_values");
    if (doc.contains("trials")) cfg.trials = get_count(doc, "trials");
    if (doc.contains("snr_db_values")) {
      const auto& v = doc.at("snr_db_values");
      if (!v.is_array() || v.empty()) throw ConfigError("'snr_db_values' must be a non-empty array");
      cfg.snr_db_values.clear();
      for (const auto& e : v) cfg.snr_db_values.push_back(snr_value(e, "snr_db_values"));
    }
    if (doc.contains("solvers")) {
      const auto& v = doc.at("solvers");
      if (!v.is_array() || v.empty()) throw ConfigError("'solvers' must be a non-empty array");
      cfg.solvers.clear();
      for (const auto& e : v) cfg.solvers.push_back(parse_solver_kind(e.get<std::string>()));
    }
    if (doc.contains("sweep_m_values")) cfg.sweep_m_values = get_counts(doc, "sweep_m_values");
    if (doc.contains("output")) cfg.output = doc.at("output").get<std::string>();
    if (doc.contains("workers")) cfg.workers = get_count(doc, "workers");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (cfg.trials == 0) throw ConfigError("trials must be at least 1");
  if (cfg.workers == 0) throw ConfigError("workers must be at least 1");
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

void apply_overrides(RunConfig& config, const Overrides& overrides) {
  if (const char* env = std::getenv("DISTA_WORKERS"); env && *env) {
    char* end = nullptr;
    const unsigned long long w = std::strtoull(env, &end, 10);
    if (*end != '\0' || w == 0) throw ConfigError("DISTA_WORKERS must be a positive integer");
    config.workers = static_cast<std::size_t>(w);
  }
  if (overrides.seed) config.trial.seed = *overrides.seed;
  if (overrides.workers) {
    if (*overrides.workers == 0) throw ConfigError("--workers must be at least 1");
    config.workers = *overrides.workers;
  }
  if (overrides.output) config.output = *overrides.output;
}

namespace {

// Writes through a temporary sibling and renames on success, so a failed
// run never leaves a partial file at `path`.
bool write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& body, std::ostream& err) {
  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream file(tmp, std::ios::trunc);
    if (!file) {
      err << "error: cannot open '" << tmp.string() << "' for writing\n";
      return false;
    }
    body(file);
    file.flush();
    if (!file) {
      file.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      err << "error: failed writing '" << path.string() << "'\n";
      return false;
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    err << "error: cannot move output into '" << path.string() << "'\n";
    return false;
  }
  return true;
}

int emit(const RunConfig& config, const std::function<void(std::ostream&)>& body,
         std::ostream& out, std::ostream& err) {
  if (!config.output) {
    body(out);
    return kOk;
  }
  return write_atomically(*config.output, body, err) ? kOk : kIoError;
}

int report_stepsize(const StepsizeError& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  return kStepsizeViolation;
}

}  // namespace

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Instance inst;
  SolverReport report;
  try {
    inst = generate_instance(config.trial);
    report = run_solver(config.trial, inst);
  } catch (const StepsizeError& e) {
    return report_stepsize(e, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    err << "error: solver failed: " << e.what() << '\n';
    return kSolverError;
  }

  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  if (const int rc = emit(config, [&](std::ostream& o) { write_trace_csv(o, report); }, out, err);
      rc != kOk) {
    return rc;
  }
  const MetricSet metrics = evaluate(report.X, inst.signal.x0, inst.realized_snr);
  out << "solver=" << to_string(report.kind) << " iterations=" << report.iterations
      << " reason=" << to_string(report.reason) << std::setprecision(6)
      << " mse=" << metrics.mse << " recovered=" << (metrics.recovered ? "true" : "false")
      << " fixed_point_residual=" << report.fixed_point_residual << '\n';
  return kOk;
}

int cmd_phase(const RunConfig& config, std::ostream& out, std::ostream& err) {
  PhaseGridResult result;
  try {
    result = phase_transition(config.trial, config.m_values, config.node_values, config.trials,
                              config.workers);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverError;
  }
  return emit(config, [&](std::ostream& o) { write_phase_csv(o, result); }, out, err);
}

int cmd_snr(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<SnrRow> rows;
  try {
    rows = snr_sweep(config.trial, config.snr_db_values, config.solvers, config.sweep_m_values,
                     config.trials, config.workers);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverError;
  }
  return emit(config, [&](std::ostream& o) { write_snr_csv(o, rows); }, out, err);
}

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err,
                 const ConsensusMatrix* consensus_override) {
  const TrialConfig& t = config.trial;
  Instance inst;
  std::optional<ConsensusMatrix> built;
  try {
    inst = generate_instance(t);
    if (!consensus_override) built = t.topology.build(t.nodes);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  }
  const ConsensusMatrix& P = consensus_override ? *consensus_override : *built;
  auto verdict = [](bool ok) { return ok ? "PASS" : "FAIL"; };

  const auto steps = validate_stepsizes(inst.sensors, std::vector<double>(t.nodes, t.tau));
  out << std::setprecision(8);
  out << "stepsize check (tau = " << t.tau << ", need tau ||A_v||^2 < 1)\n";
  for (const auto& s : steps.nodes) {
    out << "  node " << s.node << ": ||A_v||^2 = " << s.norm_sq
        << "  tau*||A_v||^2 = " << s.tau * s.norm_sq << "  " << verdict(s.ok()) << '\n';
  }
  out << "stepsizes: " << verdict(steps.ok()) << '\n';

  const ConsensusCheck check = check_consensus(P);
  const Eigen::VectorXd row_sums = P.weights().rowwise().sum();
  out << "consensus matrix (" << P.node_count() << " nodes)\n";
  out << "  row sums: min " << row_sums.minCoeff() << " max " << row_sums.maxCoeff()
      << "  " << verdict(check.stochastic()) << '\n';
  out << "  symmetry: max |P - P^T| = " << check.max_asymmetry << "  "
      << verdict(check.symmetric()) << '\n';
  out << "  adapted: max off-graph weight = " << check.max_off_graph_weight << "  "
      << verdict(check.adapted()) << '\n';
  out << "  uniform regular: " << (P.is_uniform_regular() ? "yes" : "no") << '\n';

  constexpr std::uint64_t budget = 4096;
  out << "memory footprint at n = " << t.n << ", m = " << t.m << " (real values)\n";
  for (SolverKind kind : {SolverKind::dista, SolverKind::admm}) {
    out << "  " << to_string(kind) << ": " << memory_footprint(kind, t.n, t.m)
        << "  (max n within " << budget << " values: " << max_signal_length(kind, t.m, budget)
        << ")\n";
  }
  return kOk;
}

}  // namespace dista::cli
