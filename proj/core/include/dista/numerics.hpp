#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dista {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Columns are per-node estimates x_v, shape n x |V|.
using EstimateMatrix = Eigen::MatrixXd;

// Error taxonomy shared by every module.

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative estimator fails to reach its tolerance. Carries
/// the value of the last iterate so callers can decide whether to use it.
class EstimationError : public std::runtime_error {
 public:
  EstimationError(const std::string& what, double last_estimate)
      : std::runtime_error(what), last_estimate_(last_estimate) {}

  double last_estimate() const noexcept { return last_estimate_; }

 private:
  double last_estimate_;
};

/// Returns 1, 0 or -1; sgn(0) = 0.
constexpr double sgn(double x) noexcept {
  return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
}

/// Scalar soft threshold: sgn(x) * (|x| - alpha) when |x| > alpha, else 0.
inline double soft_threshold(double x, double alpha) noexcept {
  if (x > alpha) return x - alpha;
  if (x < -alpha) return x + alpha;
  return 0.0;
}

/// Elementwise soft-thresholding operator eta_alpha. Throws ParameterError
/// for negative alpha.
Vector soft_threshold(const Vector& x, double alpha);

/// In-place variant used on hot paths.
void soft_threshold_inplace(Eigen::Ref<Vector> x, double alpha);

/// x + tau * A^T (y - A x).
Vector gradient_step(const Vector& x, const Matrix& A, const Vector& y,
                     double tau);

struct PowerIterationOptions {
  double tol = 1e-10;
  int max_iter = 5000;
};

/// Largest singular value of A by power iteration on the smaller Gram
/// matrix (A^T A or A A^T), starting from the normalized all-ones vector.
/// Throws EstimationError if the relative change of the estimate does not
/// drop below tol within max_iter iterations.
double operator_norm(const Matrix& A, PowerIterationOptions opts = {});

double frobenius_norm(const Matrix& M);
double l1_norm(const Vector& x);
double l2_norm(const Vector& x);

/// True iff every entry is finite.
bool all_finite(const Matrix& M);
bool all_finite(const Vector& x);

}  // namespace dista
