#include "dista/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dista {

SensorData::SensorData(Matrix A_, Vector y_, std::size_t id)
    : A(std::move(A_)), y(std::move(y_)), node_id(id) {
  if (A.rows() != y.size()) {
    std::ostringstream msg;
    msg << "SensorData: A has " << A.rows() << " rows but y has " << y.size()
        << " entries (node " << id << ")";
    throw ShapeError(msg.str());
  }
  if (!A.allFinite() || !y.allFinite()) {
    throw ParameterError("SensorData: non-finite entry at node " + std::to_string(id));
  }
}

Eigen::Index signal_dim(SensorSpan data) {
  if (data.empty()) throw ShapeError("no sensor data");
  const Eigen::Index n = data.front().cols();
  for (const auto& d : data) {
    if (d.cols() != n || d.rows() != d.y.size()) {
      throw ShapeError("sensor data disagree on signal dimension");
    }
  }
  return n;
}

StackedSystem stack(SensorSpan data) {
  const Eigen::Index n = signal_dim(data);
  Eigen::Index rows = 0;
  for (const auto& d : data) rows += d.rows();
  StackedSystem out{Matrix(rows, n), Vector(rows)};
  Eigen::Index r = 0;
  for (const auto& d : data) {
    out.A.middleRows(r, d.rows()) = d.A;
    out.y.segment(r, d.rows()) = d.y;
    r += d.rows();
  }
  return out;
}

void LassoParams::validate() const {
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  if (!(tau > 0.0)) throw ParameterError("tau must be positive");
}

DistaParams DistaParams::uniform(double q, double alpha, double tau, std::size_t nodes) {
  return DistaParams{q, alpha, std::vector<double>(nodes, tau)};
}

void DistaParams::validate(std::size_t nodes) const {
  if (!(q > 0.0 && q <= 1.0)) throw ParameterError("q must lie in (0, 1]");
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  if (tau.size() != nodes) {
    throw ShapeError("expected " + std::to_string(nodes) + " stepsizes, got " +
                     std::to_string(tau.size()));
  }
  for (double t : tau) {
    if (!(t > 0.0)) throw ParameterError("stepsizes must be positive");
  }
}

namespace {

void check_estimates(const EstimateMatrix& X, Eigen::Index n, std::size_t nodes,
                     const char* who) {
  if (X.rows() != n || X.cols() != static_cast<Eigen::Index>(nodes)) {
    std::ostringstream msg;
    msg << who << ": expected " << n << "x" << nodes << " estimates, got "
        << X.rows() << "x" << X.cols();
    throw ShapeError(msg.str());
  }
}

}  // namespace

double lasso_objective(const Vector& x, SensorSpan data, const LassoParams& p) {
  const Eigen::Index n = signal_dim(data);
  if (x.size() != n) throw ShapeError("lasso_objective: x has wrong length");
  double fit = 0.0;
  for (const auto& d : data) fit += (d.y - d.A * x).squaredNorm();
  return fit + 2.0 * p.lambda / p.tau * x.lpNorm<1>();
}

double dista_functional(const EstimateMatrix& X, SensorSpan data,
                        const ConsensusMatrix& P, const DistaParams& p) {
  const Eigen::Index n = signal_dim(data);
  const std::size_t nodes = data.size();
  if (P.node_count() != nodes) throw ShapeError("dista_functional: P does not match nodes");
  p.validate(nodes);
  check_estimates(X, n, nodes, "dista_functional");

  const EstimateMatrix Xbar = apply_consensus(X, P);
  const Matrix& W = P.weights();
  double total = 0.0;
  for (std::size_t v = 0; v < nodes; ++v) {
    const auto col = static_cast<Eigen::Index>(v);
    const auto xv = X.col(col);
    const double tau = p.tau[v];
    double spread = 0.0;
    for (std::size_t w = 0; w < nodes; ++w) {
      const double pw = W(col, static_cast<Eigen::Index>(w));
      if (pw != 0.0) spread += pw * (Xbar.col(static_cast<Eigen::Index>(w)) - xv).squaredNorm();
    }
    total += p.q * (data[v].y - data[v].A * xv).squaredNorm() +
             2.0 * p.alpha / tau * xv.lpNorm<1>() +
             (1.0 - p.q) / tau * spread;
  }
  return total;
}

double surrogate_functional(const EstimateMatrix& X, const EstimateMatrix& C,
                            const EstimateMatrix& B, SensorSpan data,
                            const ConsensusMatrix& P, const DistaParams& p) {
  const Eigen::Index n = signal_dim(data);
  const std::size_t nodes = data.size();
  if (P.node_count() != nodes) throw ShapeError("surrogate_functional: P does not match nodes");
  p.validate(nodes);
  check_estimates(X, n, nodes, "surrogate_functional");
  check_estimates(C, n, nodes, "surrogate_functional");
  check_estimates(B, n, nodes, "surrogate_functional");
  const auto degree = P.topology().regular_degree();
  if (!degree) throw ParameterError("surrogate_functional: topology is not regular");

  const double d = static_cast<double>(*degree);
  double total = 0.0;
  for (std::size_t v = 0; v < nodes; ++v) {
    const auto col = static_cast<Eigen::Index>(v);
    const auto xv = X.col(col);
    const Vector drift = xv - B.col(col);
    const double tau = p.tau[v];
    double spread = 0.0;
    for (std::size_t w : P.topology().neighbors(v)) {
      spread += (xv - C.col(static_cast<Eigen::Index>(w))).squaredNorm();
    }
    total += p.q * (data[v].A * xv - data[v].y).squaredNorm() +
             2.0 * p.alpha / tau * xv.lpNorm<1>() +
             (1.0 - p.q) / (d * tau) * spread +
             p.q / tau * drift.squaredNorm() -
             p.q * (data[v].A * drift).squaredNorm();
  }
  return total;
}

double kkt_residual(const Vector& x, SensorSpan data, const LassoParams& p) {
  const Eigen::Index n = signal_dim(data);
  if (x.size() != n) throw ShapeError("kkt_residual: x has wrong length");
  Vector g = Vector::Zero(n);
  for (const auto& d : data) g.noalias() += d.A.transpose() * (d.y - d.A * x);
  g *= p.tau;

  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = x[i] != 0.0 ? std::abs(g[i] - p.lambda * sgn(x[i]))
                                 : std::max(0.0, std::abs(g[i]) - p.lambda);
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace dista
