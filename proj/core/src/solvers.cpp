#include "dista/solvers.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dista {

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "ista") return SolverKind::ista;
  if (name == "dista") return SolverKind::dista;
  if (name == "dsm") return SolverKind::dsm;
  if (name == "admm") return SolverKind::admm;
  throw ParameterError("unknown solver '" + std::string(name) +
                       "' (expected ista, dista, dsm or admm)");
}

std::string_view to_string(SolverKind kind) noexcept {
  switch (kind) {
    case SolverKind::ista: return "ista";
    case SolverKind::dista: return "dista";
    case SolverKind::dsm: return "dsm";
    case SolverKind::admm: return "admm";
  }
  return "unknown";
}

std::string_view to_string(TerminationReason reason) noexcept {
  return reason == TerminationReason::converged ? "converged" : "max_iter";
}

void TerminationCriteria::validate() const {
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  if (max_iter < 1) throw ParameterError("max_iter must be at least 1");
}

bool StepsizeReport::ok() const noexcept {
  for (const auto& n : nodes) {
    if (!n.ok()) return false;
  }
  return true;
}

std::vector<NodeStepsize> StepsizeReport::violations() const {
  std::vector<NodeStepsize> out;
  for (const auto& n : nodes) {
    if (!n.ok()) out.push_back(n);
  }
  return out;
}

namespace {

std::string describe(const std::vector<NodeStepsize>& violations) {
  std::ostringstream msg;
  msg << "stepsize condition tau_v ||A_v||^2 < 1 violated at node";
  msg << (violations.size() == 1 ? " " : "s ");
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) msg << ", ";
    msg << violations[i].node << " (tau ||A||^2 = "
        << violations[i].tau * violations[i].norm_sq << ")";
  }
  return msg.str();
}

}  // namespace

StepsizeError::StepsizeError(std::vector<NodeStepsize> violations)
    : std::invalid_argument(describe(violations)), violations_(std::move(violations)) {}

StepsizeReport validate_stepsizes(SensorSpan data, const std::vector<double>& tau) {
  if (tau.size() != data.size()) throw ShapeError("validate_stepsizes: one tau per node");
  StepsizeReport report;
  for (std::size_t v = 0; v < data.size(); ++v) {
    const double s = operator_norm(data[v].A);
    report.nodes.push_back({v, tau[v], s * s});
  }
  return report;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double normalized(double frob, const EstimateMatrix& X) {
  return frob / std::sqrt(static_cast<double>(X.size()));
}

void enforce(const StepsizeReport& report, StepsizePolicy policy) {
  if (policy == StepsizePolicy::enforce && !report.ok()) {
    throw StepsizeError(report.violations());
  }
}

Vector ista_step(const Vector& x, const StackedSystem& s, const LassoParams& p) {
  Vector next = gradient_step(x, s.A, s.y, p.tau);
  soft_threshold_inplace(next, p.lambda);
  return next;
}

double stacked_objective(const Vector& x, const StackedSystem& s, const LassoParams& p) {
  return (s.y - s.A * x).squaredNorm() + 2.0 * p.lambda / p.tau * x.lpNorm<1>();
}

void check_nodes(SensorSpan data, const ConsensusMatrix& P) {
  signal_dim(data);
  if (P.node_count() != data.size()) {
    throw ShapeError("consensus matrix has " + std::to_string(P.node_count()) +
                     " nodes but there are " + std::to_string(data.size()) + " sensors");
  }
}

Vector node_average(const EstimateMatrix& X) { return X.rowwise().mean(); }

}  // namespace

SolverReport ista_run(const StackedSystem& system, const LassoParams& p,
                      const TerminationCriteria& term, StepsizePolicy policy) {
  p.validate();
  term.validate();
  if (system.A.rows() != system.y.size()) throw ShapeError("ista_run: A and y disagree");
  const double s = operator_norm(system.A);
  enforce(StepsizeReport{{NodeStepsize{0, p.tau, s * s}}}, policy);

  const auto start = Clock::now();
  SolverReport report;
  report.kind = SolverKind::ista;
  Vector x = Vector::Zero(system.A.cols());
  for (int it = 1; it <= term.max_iter; ++it) {
    Vector next = ista_step(x, system, p);
    const double step = normalized((next - x).norm(), next);
    x = std::move(next);
    report.objective.push_back(stacked_objective(x, system, p));
    report.step_norm.push_back(step);
    report.iterations = it;
    if (step < term.eps) {
      report.reason = TerminationReason::converged;
      break;
    }
  }
  report.fixed_point_residual = (ista_step(x, system, p) - x).norm();
  report.X = x;
  report.wall_seconds = seconds_since(start);
  return report;
}

SolverReport ista_run(SensorSpan data, const LassoParams& p,
                      const TerminationCriteria& term, StepsizePolicy policy) {
  return ista_run(stack(data), p, term, policy);
}

EstimateMatrix dista_gamma(const EstimateMatrix& X, SensorSpan data,
                           const ConsensusMatrix& P, const DistaParams& p) {
  const Eigen::Index n = signal_dim(data);
  check_nodes(data, P);
  p.validate(data.size());
  if (X.rows() != n || X.cols() != static_cast<Eigen::Index>(data.size())) {
    throw ShapeError("dista_gamma: estimate matrix has wrong shape");
  }

  const EstimateMatrix Xbar = apply_consensus(X, P);
  const EstimateMatrix two_hop = apply_consensus(Xbar, P);
  EstimateMatrix out(n, X.cols());
  for (Eigen::Index v = 0; v < X.cols(); ++v) {
    const auto& node = data[static_cast<std::size_t>(v)];
    const Vector local = gradient_step(X.col(v), node.A, node.y,
                                       p.tau[static_cast<std::size_t>(v)]);
    Vector mixed = (1.0 - p.q) * two_hop.col(v) + p.q * local;
    soft_threshold_inplace(mixed, p.alpha);
    out.col(v) = mixed;
  }
  return out;
}

SolverReport dista_run(SensorSpan data, const ConsensusMatrix& P, const DistaParams& p,
                       const TerminationCriteria& term, StepsizePolicy policy) {
  const Eigen::Index n = signal_dim(data);
  check_nodes(data, P);
  p.validate(data.size());
  term.validate();
  enforce(validate_stepsizes(data, p), policy);

  const auto start = Clock::now();
  SolverReport report;
  report.kind = SolverKind::dista;
  if (!P.is_uniform_regular()) {
    report.warnings.emplace_back(
        "consensus matrix is not uniform on a regular graph; convergence is not guaranteed");
  }

  EstimateMatrix X = EstimateMatrix::Zero(n, static_cast<Eigen::Index>(data.size()));
  for (int it = 1; it <= term.max_iter; ++it) {
    EstimateMatrix next = dista_gamma(X, data, P, p);
    const double step = normalized((next - X).norm(), next);
    X = std::move(next);
    const double f = dista_functional(X, data, P, p);
    if (!std::isfinite(f)) {
      throw std::runtime_error("dista_run: objective diverged at iteration " +
                               std::to_string(it));
    }
    report.objective.push_back(f);
    report.step_norm.push_back(step);
    report.iterations = it;
    if (step < term.eps) {
      report.reason = TerminationReason::converged;
      break;
    }
  }
  report.fixed_point_residual = (dista_gamma(X, data, P, p) - X).norm();
  report.X = std::move(X);
  report.wall_seconds = seconds_since(start);
  return report;
}

void DsmParams::validate() const {
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  if (!(tau > 0.0)) throw ParameterError("tau must be positive");
}

namespace {

EstimateMatrix dsm_step(const EstimateMatrix& X, SensorSpan data, const ConsensusMatrix& P,
                        const DsmParams& p) {
  const double l1_weight = 2.0 * p.alpha / (p.tau * static_cast<double>(data.size()));
  EstimateMatrix out = apply_consensus(X, P);
  for (Eigen::Index v = 0; v < X.cols(); ++v) {
    const auto& node = data[static_cast<std::size_t>(v)];
    const auto xv = X.col(v);
    Vector g = 2.0 * (node.A.transpose() * (node.A * xv - node.y));
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] += l1_weight * sgn(xv[i]);
    out.col(v) -= p.gamma * g;
  }
  return out;
}

}  // namespace

SolverReport dsm_run(SensorSpan data, const ConsensusMatrix& P, const DsmParams& p,
                     const TerminationCriteria& term) {
  const Eigen::Index n = signal_dim(data);
  check_nodes(data, P);
  p.validate();
  term.validate();

  // J with lambda = alpha equals sum_v f_v at a common point.
  const LassoParams trace_params{p.alpha, p.tau};
  const auto start = Clock::now();
  SolverReport report;
  report.kind = SolverKind::dsm;
  EstimateMatrix X = EstimateMatrix::Zero(n, static_cast<Eigen::Index>(data.size()));
  for (int it = 1; it <= term.max_iter; ++it) {
    EstimateMatrix next = dsm_step(X, data, P, p);
    const double step = normalized((next - X).norm(), next);
    X = std::move(next);
    report.objective.push_back(lasso_objective(node_average(X), data, trace_params));
    report.step_norm.push_back(step);
    report.iterations = it;
    if (!std::isfinite(step)) {
      report.warnings.emplace_back("iterates diverged; reduce gamma");
      break;
    }
    if (step < term.eps) {
      report.reason = TerminationReason::converged;
      break;
    }
  }
  if (report.reason != TerminationReason::converged) {
    report.warnings.emplace_back("DSM did not converge (constant stepsize)");
  }
  report.fixed_point_residual = (dsm_step(X, data, P, p) - X).norm();
  report.X = std::move(X);
  report.wall_seconds = seconds_since(start);
  return report;
}

void AdmmParams::validate() const {
  if (!(rho > 0.0)) throw ParameterError("rho must be positive");
  lasso.validate();
}

namespace {

struct AdmmNode {
  Eigen::LLT<Matrix> factor;
  Vector aty;
};

struct AdmmState {
  EstimateMatrix X, Z, U;
};

void admm_step(AdmmState& s, const std::vector<AdmmNode>& cache, const ConsensusMatrix& P,
               double rho, double threshold) {
  for (Eigen::Index v = 0; v < s.X.cols(); ++v) {
    const auto& node = cache[static_cast<std::size_t>(v)];
    s.X.col(v) = node.factor.solve(node.aty + rho * (s.Z.col(v) - s.U.col(v)));
  }
  s.Z = apply_consensus(s.X + s.U, P);
  for (Eigen::Index v = 0; v < s.Z.cols(); ++v) soft_threshold_inplace(s.Z.col(v), threshold);
  s.U += s.X - s.Z;
}

}  // namespace

SolverReport admm_run(SensorSpan data, const ConsensusMatrix& P, const AdmmParams& p,
                      const TerminationCriteria& term) {
  const Eigen::Index n = signal_dim(data);
  check_nodes(data, P);
  p.validate();
  term.validate();

  const auto start = Clock::now();
  std::vector<AdmmNode> cache;
  cache.reserve(data.size());
  for (const auto& node : data) {
    Matrix gram = node.A.transpose() * node.A;
    gram.diagonal().array() += p.rho;
    AdmmNode entry{Eigen::LLT<Matrix>(gram), node.A.transpose() * node.y};
    if (entry.factor.info() != Eigen::Success) {
      throw std::runtime_error("admm_run: factorization failed at node " +
                               std::to_string(node.node_id));
    }
    cache.push_back(std::move(entry));
  }

  // Minimizing J/2 = sum_v 1/2 ||y_v - A_v x||^2 + (lambda / tau) ||x||_1:
  // the consensus prox threshold is (lambda / tau) / (|V| rho).
  const double threshold =
      p.lasso.lambda / p.lasso.tau / (static_cast<double>(data.size()) * p.rho);

  const auto nodes = static_cast<Eigen::Index>(data.size());
  AdmmState s{EstimateMatrix::Zero(n, nodes), EstimateMatrix::Zero(n, nodes),
              EstimateMatrix::Zero(n, nodes)};
  SolverReport report;
  report.kind = SolverKind::admm;
  for (int it = 1; it <= term.max_iter; ++it) {
    const EstimateMatrix previous = s.Z;
    admm_step(s, cache, P, p.rho, threshold);
    const double step = std::max(normalized((s.Z - previous).norm(), s.Z),
                                 normalized((s.X - s.Z).norm(), s.Z));
    report.objective.push_back(lasso_objective(node_average(s.Z), data, p.lasso));
    report.step_norm.push_back(step);
    report.iterations = it;
    if (step < term.eps) {
      report.reason = TerminationReason::converged;
      break;
    }
  }
  AdmmState probe = s;
  admm_step(probe, cache, P, p.rho, threshold);
  report.fixed_point_residual = (probe.Z - s.Z).norm();
  report.X = std::move(s.Z);
  report.wall_seconds = seconds_since(start);
  return report;
}

std::uint64_t memory_footprint(SolverKind kind, std::uint64_t n, std::uint64_t m) {
  if (n == 0 || m == 0) throw ParameterError("memory_footprint: n and m must be positive");
  switch (kind) {
    case SolverKind::dista: return 3 + m + m * n + 2 * n;
    case SolverKind::admm: return 2 + m + m * n + n * n + 3 * n;
    default:
      throw ParameterError("memory_footprint: no storage model for " +
                           std::string(to_string(kind)));
  }
}

std::uint64_t max_signal_length(SolverKind kind, std::uint64_t m, std::uint64_t budget) {
  // Both footprints are increasing in n.
  std::uint64_t lo = 0;
  std::uint64_t hi = budget + 1;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (memory_footprint(kind, mid, m) <= budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace dista
