#pragma once

#include "dista/graph.hpp"
#include "dista/numerics.hpp"
#include "dista/objectives.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dista {

enum class SolverKind { ista, dista, dsm, admm };

SolverKind parse_solver_kind(std::string_view name);
std::string_view to_string(SolverKind kind) noexcept;

/// Stop when ||X(t+1) - X(t)||_F / sqrt(n |V|) < eps, or after max_iter
/// iterations.
struct TerminationCriteria {
  double eps = 1e-8;
  int max_iter = 50000;

  void validate() const;
};

enum class TerminationReason { converged, max_iter };
std::string_view to_string(TerminationReason reason) noexcept;

/// Whether solvers refuse to start when tau_v ||A_v||_2^2 >= 1.
enum class StepsizePolicy { enforce, allow };

struct SolverReport {
  SolverKind kind = SolverKind::dista;
  /// Final node estimates, n x |V| (n x 1 for ISTA).
  EstimateMatrix X;
  int iterations = 0;
  TerminationReason reason = TerminationReason::max_iter;
  /// Objective after each iteration: F for DISTA, J at the node average
  /// for the others.
  std::vector<double> objective;
  /// Normalized step norm after each iteration.
  std::vector<double> step_norm;
  /// ||T X - X||_F for the solver's own update map T, evaluated at X.
  double fixed_point_residual = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;

  bool converged() const noexcept { return reason == TerminationReason::converged; }
};

struct NodeStepsize {
  std::size_t node = 0;
  double tau = 0.0;
  double norm_sq = 0.0;  // ||A_v||_2^2
  bool ok() const noexcept { return tau * norm_sq < 1.0; }
};

struct StepsizeReport {
  std::vector<NodeStepsize> nodes;

  bool ok() const noexcept;
  std::vector<NodeStepsize> violations() const;
};

/// Raised by the solvers when StepsizePolicy::enforce meets a violation.
class StepsizeError : public std::invalid_argument {
 public:
  explicit StepsizeError(std::vector<NodeStepsize> violations);
  const std::vector<NodeStepsize>& violations() const noexcept { return violations_; }

 private:
  std::vector<NodeStepsize> violations_;
};

/// Checks tau_v ||A_v||_2^2 < 1 for every node.
StepsizeReport validate_stepsizes(SensorSpan data, const std::vector<double>& tau);
inline StepsizeReport validate_stepsizes(SensorSpan data, const DistaParams& p) {
  return validate_stepsizes(data, p.tau);
}

/// Centralized ISTA: x(t+1) = eta_lambda(x + tau A^T (y - A x)), x(0) = 0.
SolverReport ista_run(const StackedSystem& system, const LassoParams& p,
                      const TerminationCriteria& term = {},
                      StepsizePolicy policy = StepsizePolicy::enforce);
SolverReport ista_run(SensorSpan data, const LassoParams& p,
                      const TerminationCriteria& term = {},
                      StepsizePolicy policy = StepsizePolicy::enforce);

/// One application of the DISTA map:
///   (Gamma X)_v = eta_alpha[(1 - q) (Xbar P^T)_v + q (x_v + tau_v A_v^T (y_v - A_v x_v))]
/// with Xbar = X P^T, so the consensus term averages over two hops.
EstimateMatrix dista_gamma(const EstimateMatrix& X, SensorSpan data,
                           const ConsensusMatrix& P, const DistaParams& p);

/// Iterates X(t+1) = Gamma X(t) from X(0) = 0. One iteration is one Gamma
/// application (an even plus an odd message round).
SolverReport dista_run(SensorSpan data, const ConsensusMatrix& P, const DistaParams& p,
                       const TerminationCriteria& term = {},
                       StepsizePolicy policy = StepsizePolicy::enforce);

struct DsmParams {
  double gamma = 1e-3;
  /// The local cost is f_v(x) = ||y_v - A_v x||^2 + 2 alpha / (tau |V|) ||x||_1.
  double alpha = 1e-4;
  double tau = 0.02;

  void validate() const;
};

/// Distributed subgradient method with constant stepsize:
///   x_v(t+1) = sum_w P_vw x_w(t) - gamma g_v(t).
SolverReport dsm_run(SensorSpan data, const ConsensusMatrix& P, const DsmParams& p,
                     const TerminationCriteria& term = {});

struct AdmmParams {
  double rho = 1.0;
  /// Target problem: minimize J(x) with these lambda and tau.
  LassoParams lasso;

  void validate() const;
};

/// Consensus ADMM for the Lasso. Each node caches a Cholesky factor of
/// (A_v^T A_v + rho I); the consensus variable is formed by neighborhood
/// averaging and soft thresholding. Reported estimates are the consensus
/// variables z_v.
SolverReport admm_run(SensorSpan data, const ConsensusMatrix& P, const AdmmParams& p,
                      const TerminationCriteria& term = {});

/// Number of real values a node stores for the given solver. Defined for
/// DISTA (3 + m + mn + 2n) and consensus ADMM (2 + m + mn + n^2 + 3n).
std::uint64_t memory_footprint(SolverKind kind, std::uint64_t n, std::uint64_t m);

/// Largest n whose footprint fits in `budget` stored values, 0 if none.
std::uint64_t max_signal_length(SolverKind kind, std::uint64_t m, std::uint64_t budget);

}  // namespace dista
