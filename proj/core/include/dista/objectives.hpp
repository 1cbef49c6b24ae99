#pragma once

#include "dista/graph.hpp"
#include "dista/numerics.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace dista {

/// Local sensing matrix A_v (m x n) and measurements y_v (m) held by node v.
struct SensorData {
  Matrix A;
  Vector y;
  std::size_t node_id = 0;

  SensorData() = default;
  /// Throws ShapeError when y does not match A's rows and ParameterError on
  /// non-finite entries.
  SensorData(Matrix A_, Vector y_, std::size_t id = 0);

  Eigen::Index rows() const noexcept { return A.rows(); }
  Eigen::Index cols() const noexcept { return A.cols(); }
};

using SensorSpan = std::span<const SensorData>;

/// Common signal dimension n of all nodes. Throws ShapeError on mismatch or
/// when the span is empty.
Eigen::Index signal_dim(SensorSpan data);

/// Stacks all nodes into one centralized system (A; y).
struct StackedSystem {
  Matrix A;
  Vector y;
};
StackedSystem stack(SensorSpan data);

/// Regularization lambda and stepsize tau of the centralized problem
///   J(x) = sum_v ||y_v - A_v x||^2 + (2 lambda / tau) ||x||_1.
struct LassoParams {
  double lambda = 1e-4;
  double tau = 0.02;

  void validate() const;
};

/// Temperature q, threshold alpha, and per-node stepsizes tau_v.
struct DistaParams {
  double q = 0.5;
  double alpha = 1e-4;
  std::vector<double> tau;

  static DistaParams uniform(double q, double alpha, double tau, std::size_t nodes);
  void validate(std::size_t nodes) const;
};

double lasso_objective(const Vector& x, SensorSpan data, const LassoParams& p);

/// F(X) = sum_v [ q ||y_v - A_v x_v||^2 + 2 alpha / tau_v ||x_v||_1
///               + (1 - q) / tau_v sum_w P_vw ||xbar_w - x_v||^2 ],
/// with xbar = X P^T.
///
/// The l1 weight 2 alpha / tau_v is the one whose proximal step is the
/// threshold eta_alpha used by dista_gamma, so F is non-increasing along
/// DISTA iterates and Fix(Gamma) minimizes F. At a consensus point
/// F(xbar, ..., xbar) = q J(xbar, lambda) when alpha = q lambda / |V|.
double dista_functional(const EstimateMatrix& X, SensorSpan data,
                        const ConsensusMatrix& P, const DistaParams& p);

/// Majorizing surrogate
///   F^S(X, C, B) = sum_v ( q ||A_v x_v - y_v||^2 + 2 alpha / tau_v ||x_v||_1
///                  + (1 - q) / (d tau_v) sum_{w in N_v} ||x_v - c_w||^2
///                  + q / tau_v ||x_v - b_v||^2 - q ||A_v (x_v - b_v)||^2 ).
/// F^S(X, X P^T, X) = F(X), and F^S >= F whenever tau_v ||A_v||^2 < 1.
/// Requires a regular topology.
double surrogate_functional(const EstimateMatrix& X, const EstimateMatrix& C,
                            const EstimateMatrix& B, SensorSpan data,
                            const ConsensusMatrix& P, const DistaParams& p);

/// Lasso optimality residual. With g = tau * sum_v A_v^T (y_v - A_v x):
/// max over i of |g_i - lambda sgn(x_i)| where x_i != 0 and
/// max(0, |g_i| - lambda) where x_i = 0. Zero iff x minimizes J.
double kkt_residual(const Vector& x, SensorSpan data, const LassoParams& p);

}  // namespace dista
