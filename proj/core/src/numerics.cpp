#include "dista/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dista {

Vector soft_threshold(const Vector& x, double alpha) {
  Vector out = x;
  soft_threshold_inplace(out, alpha);
  return out;
}

void soft_threshold_inplace(Eigen::Ref<Vector> x, double alpha) {
  if (!(alpha >= 0.0)) {
    throw ParameterError("soft_threshold: alpha must be nonnegative");
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = soft_threshold(x[i], alpha);
  }
}

Vector gradient_step(const Vector& x, const Matrix& A, const Vector& y,
                     double tau) {
  if (A.cols() != x.size() || A.rows() != y.size()) {
    std::ostringstream msg;
    msg << "gradient_step: A is " << A.rows() << "x" << A.cols()
        << ", x has " << x.size() << " entries, y has " << y.size();
    throw ShapeError(msg.str());
  }
  if (!(tau > 0.0)) throw ParameterError("gradient_step: tau must be positive");
  const Vector residual = y - A * x;
  return x + tau * (A.transpose() * residual);
}

namespace {

// Applies G = A^T A (or A A^T when `left` is set) without forming G.
Vector gram_apply(const Matrix& A, const Vector& v, bool left) {
  if (left) return A * (A.transpose() * v);
  return A.transpose() * (A * v);
}

// Deterministic fallback start when the all-ones vector lies in the kernel.
Vector fallback_start(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = std::sin(static_cast<double>(i) + 1.0) + 0.5;
  }
  return v.normalized();
}

}  // namespace

double operator_norm(const Matrix& A, PowerIterationOptions opts) {
  if (!(opts.tol > 0.0) || opts.max_iter <= 0) {
    throw ParameterError("operator_norm: tol and max_iter must be positive");
  }
  if (A.size() == 0) throw ParameterError("operator_norm: empty matrix");

  const bool left = A.rows() < A.cols();
  const Eigen::Index dim = left ? A.rows() : A.cols();

  Vector v = Vector::Ones(dim).normalized();
  Vector w = gram_apply(A, v, left);
  if (w.norm() == 0.0) {
    v = fallback_start(dim);
    w = gram_apply(A, v, left);
  }
  if (w.norm() == 0.0) {
    if (A.isZero(0.0)) throw ParameterError("operator_norm: zero matrix");
    // Both starts hit the kernel; walk the coordinate axes.
    for (Eigen::Index j = 0; j < dim && w.norm() == 0.0; ++j) {
      v = Vector::Unit(dim, j);
      w = gram_apply(A, v, left);
    }
  }

  // The eigen-residual r = ||G v - theta v|| bounds |theta - lambda| by r, and
  // the Rayleigh quotient error shrinks like r^2. Accept r <= tol * theta
  // outright, or r <= sqrt(tol) * theta once theta has stopped moving.
  const double loose = std::sqrt(opts.tol);
  double estimate = v.dot(w);
  for (int it = 0; it < opts.max_iter; ++it) {
    const double previous = estimate;
    v = w / w.norm();
    w = gram_apply(A, v, left);
    estimate = v.dot(w);
    const double r = (w - estimate * v).norm();
    const double scale = std::abs(estimate);
    if (r <= opts.tol * scale ||
        (r <= loose * scale && std::abs(estimate - previous) <= opts.tol * scale)) {
      return std::sqrt(estimate);
    }
  }
  throw EstimationError("operator_norm: power iteration did not converge",
                        std::sqrt(std::max(estimate, 0.0)));
}

double frobenius_norm(const Matrix& M) { return M.norm(); }

double l1_norm(const Vector& x) { return x.lpNorm<1>(); }

double l2_norm(const Vector& x) { return x.norm(); }

bool all_finite(const Matrix& M) { return M.allFinite(); }

bool all_finite(const Vector& x) { return x.allFinite(); }

}  // namespace dista
