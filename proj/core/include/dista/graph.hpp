#pragma once

#include "dista/numerics.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dista {

/// Symmetric graph on nodes 0..N-1. Every node carries a self-loop.
class Topology {
 public:
  /// Builds from an adjacency relation; missing self-loops are added and the
  /// relation is symmetrized.
  explicit Topology(std::vector<std::vector<bool>> adjacency);

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  bool has_edge(std::size_t v, std::size_t w) const { return adjacency_.at(v).at(w); }

  /// Sorted neighbor list of v, v itself included.
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return neighbors_.at(v); }

  /// Common degree d if every node has the same number of neighbors.
  std::optional<std::size_t> regular_degree() const;

 private:
  std::vector<std::vector<bool>> adjacency_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

/// Row-stochastic matrix P adapted to a Topology.
class ConsensusMatrix {
 public:
  /// Wraps raw weights without checking stochasticity or symmetry; use
  /// check_consensus() to audit. Only shape and finiteness are enforced.
  static ConsensusMatrix from_weights(Matrix weights, Topology topology);

  const Matrix& weights() const noexcept { return weights_; }
  const Topology& topology() const noexcept { return topology_; }
  std::size_t node_count() const noexcept { return topology_.node_count(); }

  /// True when P is symmetric with weight exactly 1/d on every edge of a
  /// d-regular topology, the regime where DISTA convergence is proven.
  bool is_uniform_regular() const;

 private:
  ConsensusMatrix(Matrix weights, Topology topology)
      : weights_(std::move(weights)), topology_(std::move(topology)) {}

  Matrix weights_;
  Topology topology_;
};

/// Complete graph with self-loops, P_ij = 1/N.
ConsensusMatrix build_complete(std::size_t node_count);

/// Circulant ring lattice: node v is linked to itself and the (d-1)/2
/// nearest nodes on each side. d counts the self-loop, so it must be odd and
/// at most N. Weights are 1/d on edges.
ConsensusMatrix build_d_regular(std::size_t node_count, std::size_t degree);

/// Returns X P^T: column v is sum_w P_vw x_w.
EstimateMatrix apply_consensus(const EstimateMatrix& X, const ConsensusMatrix& P);

struct ConsensusCheck {
  double max_row_sum_error = 0.0;
  double min_entry = 0.0;
  double max_asymmetry = 0.0;
  /// Largest |P_vw| over pairs that are not edges.
  double max_off_graph_weight = 0.0;

  bool stochastic(double tol = 1e-12) const { return max_row_sum_error <= tol && min_entry >= 0.0; }
  bool symmetric(double tol = 0.0) const { return max_asymmetry <= tol; }
  bool adapted() const { return max_off_graph_weight == 0.0; }
  bool ok() const { return stochastic() && symmetric() && adapted(); }
};

ConsensusCheck check_consensus(const ConsensusMatrix& P);

/// Topology selector used by configs: "complete" or "ring-regular(d)".
struct TopologySpec {
  enum class Kind { complete, ring_regular };
  Kind kind = Kind::complete;
  std::size_t degree = 0;

  static TopologySpec parse(std::string_view text);
  std::string to_string() const;
  ConsensusMatrix build(std::size_t node_count) const;
};

}  // namespace dista
