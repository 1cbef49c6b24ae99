#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dista/experiments.hpp"
#include "dista/objectives.hpp"
#include "dista/solvers.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <random>

using namespace dista;

namespace {

std::vector<SensorData> random_sensors(std::size_t nodes, int m, int n, std::mt19937_64& rng) {
  std::vector<SensorData> out;
  for (std::size_t v = 0; v < nodes; ++v) {
    out.emplace_back(oracle::gaussian_matrix(m, n, rng, 1.0 / std::sqrt(m)),
                     oracle::gaussian_vector(m, rng), v);
  }
  return out;
}

std::vector<oracle::Node> as_nodes(const std::vector<SensorData>& data) {
  std::vector<oracle::Node> out;
  for (const auto& d : data) out.push_back({d.A, d.y});
  return out;
}

// Stepsizes just under each node's bound.
std::vector<double> safe_steps(const std::vector<SensorData>& data, double frac = 0.95) {
  std::vector<double> tau;
  for (const auto& d : data) {
    const double s = oracle::spectral_norm(d.A);
    tau.push_back(frac / (s * s));
  }
  return tau;
}

Matrix sparse_random(int rows, int cols, std::mt19937_64& rng) {
  Matrix X = oracle::gaussian_matrix(rows, cols, rng);
  std::bernoulli_distribution keep(0.5);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (!keep(rng)) X(i, j) = 0.0;
  return X;
}

}  // namespace

TEST_CASE("lasso_objective") {
  std::mt19937_64 rng(1);
  const auto data = random_sensors(3, 4, 9, rng);
  const LassoParams p{0.3, 0.05};

  double y_energy = 0.0;
  for (const auto& d : data) y_energy += d.y.squaredNorm();
  CHECK(lasso_objective(Vector::Zero(9), data, p) == doctest::Approx(y_energy).epsilon(1e-14));

  auto clean = data;
  const Vector x0 = oracle::gaussian_vector(9, rng);
  for (auto& d : clean) d.y = d.A * x0;
  CHECK(lasso_objective(x0, clean, p) ==
        doctest::Approx(2.0 * 0.3 / 0.05 * x0.lpNorm<1>()).epsilon(1e-12));

  for (int t = 0; t < 20; ++t) {
    const Vector x = oracle::gaussian_vector(9, rng);
    const double expected = oracle::lasso(x, as_nodes(data), p.lambda, p.tau);
    CHECK(std::abs(lasso_objective(x, data, p) - expected) <= 1e-12 * (1.0 + expected));
  }
  CHECK_THROWS_AS(lasso_objective(Vector::Zero(8), data, p), ShapeError);
}

TEST_CASE("dista_functional") {
  std::mt19937_64 rng(2);

  SUBCASE("zero estimates and zero data") {
    std::vector<SensorData> data;
    for (std::size_t v = 0; v < 4; ++v) data.emplace_back(Matrix::Ones(2, 5), Vector::Zero(2), v);
    CHECK(dista_functional(Matrix::Zero(5, 4), data, build_complete(4),
                           DistaParams::uniform(0.5, 0.1, 0.1, 4)) == 0.0);
  }
  SUBCASE("matches a per-term oracle") {
    const auto data = random_sensors(5, 3, 8, rng);
    const auto P = build_d_regular(5, 3);
    const DistaParams p{0.4, 0.02, safe_steps(data)};
    for (int t = 0; t < 20; ++t) {
      const Matrix X = oracle::gaussian_matrix(8, 5, rng);
      const double expected = oracle::dista_functional(X, as_nodes(data), P.weights(), p.q,
                                                       p.alpha, p.tau);
      CHECK(std::abs(dista_functional(X, data, P, p) - expected) <= 1e-12 * (1.0 + expected));
    }
  }
  SUBCASE("consensus collapse with alpha = q lambda / |V|") {
    const std::size_t nodes = 6;
    const auto data = random_sensors(nodes, 4, 10, rng);
    const double q = 0.3, lambda = 0.07, tau = 0.04;
    const auto p = DistaParams::uniform(q, q * lambda / static_cast<double>(nodes), tau, nodes);
    for (const auto& P : {build_complete(nodes), build_d_regular(nodes, 3)}) {
      for (int t = 0; t < 20; ++t) {
        const Vector xbar = oracle::gaussian_vector(10, rng);
        const double f = dista_functional(xbar.replicate(1, nodes), data, P, p);
        const double j = lasso_objective(xbar, data, {lambda, tau});
        CHECK(std::abs(f - q * j) <= 1e-10 * (1.0 + std::abs(j)));
      }
    }
  }
  SUBCASE("single node collapses with alpha = q lambda") {
    const auto data = random_sensors(1, 4, 10, rng);
    const Vector x = oracle::gaussian_vector(10, rng);
    const double f = dista_functional(x, data, build_complete(1),
                                      DistaParams::uniform(0.6, 0.6 * 0.2, 0.05, 1));
    CHECK(f == doctest::Approx(0.6 * lasso_objective(x, data, {0.2, 0.05})).epsilon(1e-12));
  }
  SUBCASE("errors") {
    const auto data = random_sensors(3, 3, 8, rng);
    const auto p = DistaParams::uniform(0.5, 0.1, 0.1, 3);
    CHECK_THROWS_AS(dista_functional(Matrix::Zero(8, 2), data, build_complete(3), p), ShapeError);
    CHECK_THROWS_AS(dista_functional(Matrix::Zero(8, 3), data, build_complete(2), p), ShapeError);
    CHECK_THROWS_AS(dista_functional(Matrix::Zero(8, 3), data, build_complete(3),
                                     DistaParams::uniform(1.5, 0.1, 0.1, 3)),
                    ParameterError);
  }
}

namespace {

void check_surrogate(const ConsensusMatrix& P, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t nodes = 5;
  const auto data = random_sensors(nodes, 3, 8, rng);
  const DistaParams p{0.35, 0.05, safe_steps(data)};
  {
    // Touches F at (X, X P^T, X).
    {
      for (int t = 0; t < 50; ++t) {
        const Matrix X = sparse_random(8, 5, rng);
        const double f = dista_functional(X, data, P, p);
        const double s = surrogate_functional(X, apply_consensus(X, P), X, data, P, p);
        CHECK(std::abs(s - f) <= 1e-10 * std::abs(f));
      }
    }
    // B = X drops the last two summands.
    {
      const Matrix X = oracle::gaussian_matrix(8, 5, rng);
      const Matrix C = oracle::gaussian_matrix(8, 5, rng);
      const double d = static_cast<double>(*P.topology().regular_degree());
      double expected = 0.0;
      for (std::size_t v = 0; v < nodes; ++v) {
        const Vector xv = X.col(static_cast<int>(v));
        double spread = 0.0;
        for (std::size_t w : P.topology().neighbors(v)) {
          spread += oracle::sq_dist(xv, C.col(static_cast<int>(w)));
        }
        expected += p.q * oracle::sq_residual(data[v].A, xv, data[v].y) +
                    2.0 * p.alpha / p.tau[v] * oracle::l1(xv) +
                    (1.0 - p.q) / (d * p.tau[v]) * spread;
      }
      CHECK(surrogate_functional(X, C, X, data, P, p) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
    // Majorizes F.
    {
      for (int t = 0; t < 300; ++t) {
        const Matrix X = oracle::gaussian_matrix(8, 5, rng);
        const Matrix C = oracle::gaussian_matrix(8, 5, rng);
        const Matrix B = oracle::gaussian_matrix(8, 5, rng);
        const double f = dista_functional(X, data, P, p);
        REQUIRE(surrogate_functional(X, C, B, data, P, p) >= f * (1.0 - 1e-12));
      }
    }
    // Partial minimizers in C, B and X. C = X P^T is the C-minimizer only for
    // a common stepsize.
    {
      const auto& tv = p.tau;
      const auto p = DistaParams::uniform(0.35, 0.05, *std::min_element(tv.begin(), tv.end()),
                                          nodes);
      std::normal_distribution<double> nudge(0.0, 1e-3);
      for (int t = 0; t < 30; ++t) {
        const Matrix X = oracle::gaussian_matrix(8, 5, rng);
        const Matrix C = apply_consensus(X, P);
        const Matrix B = oracle::gaussian_matrix(8, 5, rng);
        const double base_c = surrogate_functional(X, C, B, data, P, p);
        const double base_b = surrogate_functional(X, C, X, data, P, p);
        for (int v = 0; v < 5; ++v) {
          Matrix Cp = C;
          for (int i = 0; i < 8; ++i) Cp(i, v) += nudge(rng);
          REQUIRE(surrogate_functional(X, Cp, B, data, P, p) >= base_c);

          Matrix Bp = X;
          for (int i = 0; i < 8; ++i) Bp(i, v) += nudge(rng);
          REQUIRE(surrogate_functional(X, C, Bp, data, P, p) >= base_b);
        }

        // The x-minimizer of F^S(., C, B) is eta_alpha of the mixed point.
        Matrix Xstar(8, 5);
        const Matrix cbar = apply_consensus(C, P);
        for (int v = 0; v < 5; ++v) {
          const Vector g = oracle::gradient_step(B.col(v), data[v].A, data[v].y, p.tau[v]);
          for (int i = 0; i < 8; ++i) {
            Xstar(i, v) = oracle::shrink((1.0 - p.q) * cbar(i, v) + p.q * g[i], p.alpha);
          }
        }
        const double at_min = surrogate_functional(Xstar, C, B, data, P, p);
        for (int k = 0; k < 10; ++k) {
          Matrix Xp = Xstar;
          for (int i = 0; i < 8; ++i)
            for (int v = 0; v < 5; ++v) Xp(i, v) += nudge(rng);
          REQUIRE(surrogate_functional(Xp, C, B, data, P, p) >= at_min);
        }
      }
    }
  }

}

}  // namespace

TEST_CASE("surrogate_functional on the complete graph") { check_surrogate(build_complete(5), 3); }

TEST_CASE("surrogate_functional on a ring") { check_surrogate(build_d_regular(5, 3), 4); }

TEST_CASE("surrogate_functional rejects irregular topologies") {
  std::mt19937_64 rng(5);
  const auto data = random_sensors(5, 3, 8, rng);
  const DistaParams p{0.35, 0.05, safe_steps(data)};
  {
    std::vector<std::vector<bool>> adj(5, std::vector<bool>(5, false));
    adj[0][1] = true;
    const Topology topo(adj);
    const auto P = ConsensusMatrix::from_weights(Matrix::Identity(5, 5), topo);
    const Matrix X = Matrix::Zero(8, 5);
    CHECK_THROWS_AS(surrogate_functional(X, X, X, data, P, p), ParameterError);
  }
}

TEST_CASE("kkt_residual") {
  std::mt19937_64 rng(4);

  SUBCASE("zero data") {
    std::vector<SensorData> data;
    for (std::size_t v = 0; v < 2; ++v) {
      data.emplace_back(oracle::gaussian_matrix(3, 6, rng), Vector::Zero(3), v);
    }
    CHECK(kkt_residual(Vector::Zero(6), data, {0.1, 0.2}) == 0.0);
  }
  SUBCASE("zero solution regime") {
    const auto data = random_sensors(3, 4, 12, rng);
    const double tau = 0.1;
    Vector aty = Vector::Zero(12);
    for (const auto& d : data) aty += d.A.transpose() * d.y;
    const double lambda_max = tau * aty.lpNorm<Eigen::Infinity>();
    CHECK(kkt_residual(Vector::Zero(12), data, {lambda_max, tau}) == 0.0);
    CHECK(kkt_residual(Vector::Zero(12), data, {1.01 * lambda_max, tau}) == 0.0);
    CHECK(kkt_residual(Vector::Zero(12), data, {0.9 * lambda_max, tau}) > 0.0);
  }
  SUBCASE("ISTA solution satisfies the optimality conditions") {
    const auto signal = generate_signal(20, 2, 99);
    auto data = generate_sensing(3, 8, 20, 100);
    measure(data, signal.x0);
    const double s = operator_norm(stack(data).A);
    const LassoParams p{0.01, 0.9 / (s * s)};
    const auto report = ista_run(data, p, {1e-13, 200000});
    CHECK(report.converged());
    CHECK(kkt_residual(report.X.col(0), data, p) < 1e-6);
  }
}
