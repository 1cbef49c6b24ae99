#pragma once

// Independent reference evaluations used only by tests. Everything here is
// written with explicit loops and never calls into the library's numerics.

#include "dista/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using dista::Matrix;
using dista::Vector;

inline Matrix gaussian_matrix(int rows, int cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = d(rng);
  return M;
}

inline Vector gaussian_vector(int n, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

inline double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

inline double shrink(double x, double a) {
  return std::abs(x) > a ? sign(x) * (std::abs(x) - a) : 0.0;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a,
                                              int sweeps = 100) {
  const std::size_t n = a.size();
  for (int s = 0; s < sweeps; ++s) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = sign(theta == 0.0 ? 1.0 : theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - sn * akq;
          a[k][q] = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - sn * aqk;
          a[q][k] = sn * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  return ev;
}

/// Largest singular value of A as sqrt of the top eigenvalue of A^T A.
inline double spectral_norm(const Matrix& A) {
  const int n = static_cast<int>(A.cols());
  std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < A.rows(); ++r) g[i][j] += A(r, i) * A(r, j);
  const auto ev = jacobi_eigenvalues(g);
  return std::sqrt(*std::max_element(ev.begin(), ev.end()));
}

inline Vector gradient_step(const Vector& x, const Matrix& A, const Vector& y, double tau) {
  std::vector<double> r(A.rows());
  for (int i = 0; i < A.rows(); ++i) {
    double ax = 0.0;
    for (int j = 0; j < A.cols(); ++j) ax += A(i, j) * x[j];
    r[i] = y[i] - ax;
  }
  Vector out(x.size());
  for (int j = 0; j < A.cols(); ++j) {
    double g = 0.0;
    for (int i = 0; i < A.rows(); ++i) g += A(i, j) * r[i];
    out[j] = x[j] + tau * g;
  }
  return out;
}

inline double sq_residual(const Matrix& A, const Vector& x, const Vector& y) {
  double s = 0.0;
  for (int i = 0; i < A.rows(); ++i) {
    double ax = 0.0;
    for (int j = 0; j < A.cols(); ++j) ax += A(i, j) * x[j];
    s += (y[i] - ax) * (y[i] - ax);
  }
  return s;
}

inline double l1(const Vector& x) {
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) s += std::abs(x[i]);
  return s;
}

inline double sq_dist(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

/// Column v of X P^T, i.e. sum_w P(v, w) X(:, w).
inline Vector mix(const Matrix& X, const Matrix& P, int v) {
  Vector out = Vector::Zero(X.rows());
  for (int w = 0; w < X.cols(); ++w)
    for (int i = 0; i < X.rows(); ++i) out[i] += P(v, w) * X(i, w);
  return out;
}

inline Matrix mix_all(const Matrix& X, const Matrix& P) {
  Matrix out(X.rows(), X.cols());
  for (int v = 0; v < X.cols(); ++v) out.col(v) = mix(X, P, v);
  return out;
}

struct Node {
  Matrix A;
  Vector y;
};

inline double lasso(const Vector& x, const std::vector<Node>& nodes, double lambda, double tau) {
  double s = 0.0;
  for (const auto& nd : nodes) s += sq_residual(nd.A, x, nd.y);
  return s + 2.0 * lambda / tau * l1(x);
}

/// Distributed functional with l1 weight 2 alpha / tau_v.
inline double dista_functional(const Matrix& X, const std::vector<Node>& nodes, const Matrix& P,
                               double q, double alpha, const std::vector<double>& tau) {
  const Matrix Xbar = mix_all(X, P);
  double total = 0.0;
  for (int v = 0; v < X.cols(); ++v) {
    const Vector xv = X.col(v);
    double spread = 0.0;
    for (int w = 0; w < X.cols(); ++w) spread += P(v, w) * sq_dist(Xbar.col(w), xv);
    total += q * sq_residual(nodes[v].A, xv, nodes[v].y) + 2.0 * alpha / tau[v] * l1(xv) +
             (1.0 - q) / tau[v] * spread;
  }
  return total;
}

inline Matrix gamma(const Matrix& X, const std::vector<Node>& nodes, const Matrix& P, double q,
                    double alpha, const std::vector<double>& tau) {
  const Matrix two_hop = mix_all(mix_all(X, P), P);
  Matrix out(X.rows(), X.cols());
  for (int v = 0; v < X.cols(); ++v) {
    const Vector g = gradient_step(X.col(v), nodes[v].A, nodes[v].y, tau[v]);
    for (int i = 0; i < X.rows(); ++i) {
      out(i, v) = shrink((1.0 - q) * two_hop(i, v) + q * g[i], alpha);
    }
  }
  return out;
}

/// Minimizer of f over [lo, hi] by dense grid then golden refinement.
inline double grid_argmin(const std::function<double(double)>& f, double lo, double hi,
                          int points = 200001) {
  double best = lo, best_val = f(lo);
  const double h = (hi - lo) / (points - 1);
  for (int i = 1; i < points; ++i) {
    const double x = lo + h * i;
    const double val = f(x);
    if (val < best_val) best_val = val, best = x;
  }
  double a = best - h, b = best + h;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double c = b - phi * (b - a), d = a + phi * (b - a);
    if (f(c) < f(d)) b = d; else a = c;
  }
  return 0.5 * (a + b);
}

/// Least squares restricted to `support` via Gaussian elimination on the
/// normal equations.
inline Vector least_squares_on_support(const Matrix& A, const Vector& y,
                                       const std::vector<std::size_t>& support) {
  const std::size_t k = support.size();
  std::vector<std::vector<double>> m(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      for (int r = 0; r < A.rows(); ++r) m[i][j] += A(r, support[i]) * A(r, support[j]);
    for (int r = 0; r < A.rows(); ++r) m[i][k] += A(r, support[i]) * y[r];
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    std::swap(m[c], m[piv]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (std::size_t j = c; j <= k; ++j) m[r][j] -= f * m[c][j];
    }
  }
  Vector x = Vector::Zero(A.cols());
  for (std::size_t i = 0; i < k; ++i) x[support[i]] = m[i][k] / m[i][i];
  return x;
}

}  // namespace oracle
