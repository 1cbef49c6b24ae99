#include "dista/graph.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <sstream>

namespace dista {

Topology::Topology(std::vector<std::vector<bool>> adjacency)
    : adjacency_(std::move(adjacency)) {
  const std::size_t n = adjacency_.size();
  for (const auto& row : adjacency_) {
    if (row.size() != n) throw ShapeError("Topology: adjacency must be square");
  }
  for (std::size_t v = 0; v < n; ++v) {
    adjacency_[v][v] = true;
    for (std::size_t w = v + 1; w < n; ++w) {
      const bool linked = adjacency_[v][w] || adjacency_[w][v];
      adjacency_[v][w] = linked;
      adjacency_[w][v] = linked;
    }
  }
  neighbors_.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w = 0; w < n; ++w) {
      if (adjacency_[v][w]) neighbors_[v].push_back(w);
    }
  }
}

std::optional<std::size_t> Topology::regular_degree() const {
  if (neighbors_.empty()) return std::nullopt;
  const std::size_t d = neighbors_.front().size();
  for (const auto& nb : neighbors_) {
    if (nb.size() != d) return std::nullopt;
  }
  return d;
}

ConsensusMatrix ConsensusMatrix::from_weights(Matrix weights, Topology topology) {
  const auto n = static_cast<Eigen::Index>(topology.node_count());
  if (weights.rows() != n || weights.cols() != n) {
    throw ShapeError("ConsensusMatrix: weights must be N x N for the topology");
  }
  if (!weights.allFinite()) throw ParameterError("ConsensusMatrix: non-finite weight");
  return ConsensusMatrix(std::move(weights), std::move(topology));
}

bool ConsensusMatrix::is_uniform_regular() const {
  const auto d = topology_.regular_degree();
  if (!d) return false;
  const double w = 1.0 / static_cast<double>(*d);
  const std::size_t n = node_count();
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u = 0; u < n; ++u) {
      const double expected = topology_.has_edge(v, u) ? w : 0.0;
      if (weights_(v, u) != expected) return false;
    }
  }
  return true;
}

ConsensusMatrix build_complete(std::size_t node_count) {
  if (node_count == 0) throw ParameterError("build_complete: N must be at least 1");
  std::vector<std::vector<bool>> adj(node_count, std::vector<bool>(node_count, true));
  const auto n = static_cast<Eigen::Index>(node_count);
  Matrix weights = Matrix::Constant(n, n, 1.0 / static_cast<double>(node_count));
  return ConsensusMatrix::from_weights(std::move(weights), Topology(std::move(adj)));
}

ConsensusMatrix build_d_regular(std::size_t node_count, std::size_t degree) {
  if (node_count == 0) throw ParameterError("build_d_regular: N must be at least 1");
  if (degree == 0 || degree % 2 == 0) {
    throw ParameterError("build_d_regular: degree must be odd (self-loop included)");
  }
  if (degree > node_count) throw ParameterError("build_d_regular: degree exceeds N");

  const std::size_t half = (degree - 1) / 2;
  std::vector<std::vector<bool>> adj(node_count, std::vector<bool>(node_count, false));
  for (std::size_t v = 0; v < node_count; ++v) {
    for (std::size_t s = 0; s <= half; ++s) {
      adj[v][(v + s) % node_count] = true;
      adj[v][(v + node_count - s) % node_count] = true;
    }
  }
  Topology topo(std::move(adj));
  const auto n = static_cast<Eigen::Index>(node_count);
  const double w = 1.0 / static_cast<double>(degree);
  Matrix weights = Matrix::Zero(n, n);
  for (std::size_t v = 0; v < node_count; ++v) {
    for (std::size_t u : topo.neighbors(v)) {
      weights(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) = w;
    }
  }
  return ConsensusMatrix::from_weights(std::move(weights), std::move(topo));
}

EstimateMatrix apply_consensus(const EstimateMatrix& X, const ConsensusMatrix& P) {
  if (X.cols() != P.weights().rows()) {
    std::ostringstream msg;
    msg << "apply_consensus: X has " << X.cols() << " columns, P is "
        << P.weights().rows() << "x" << P.weights().cols();
    throw ShapeError(msg.str());
  }
  return X * P.weights().transpose();
}

ConsensusCheck check_consensus(const ConsensusMatrix& P) {
  const Matrix& W = P.weights();
  ConsensusCheck out;
  out.max_row_sum_error = (W.rowwise().sum().array() - 1.0).abs().maxCoeff();
  out.min_entry = W.minCoeff();
  out.max_asymmetry = (W - W.transpose()).cwiseAbs().maxCoeff();
  const std::size_t n = P.node_count();
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w = 0; w < n; ++w) {
      if (!P.topology().has_edge(w, v)) {
        out.max_off_graph_weight = std::max(
            out.max_off_graph_weight,
            std::abs(W(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w))));
      }
    }
  }
  return out;
}

TopologySpec TopologySpec::parse(std::string_view text) {
  if (text == "complete") return {Kind::complete, 0};
  constexpr std::string_view prefix = "ring-regular(";
  if (text.size() > prefix.size() + 1 && text.substr(0, prefix.size()) == prefix &&
      text.back() == ')') {
    const auto digits = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    std::size_t d = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
    if (ec == std::errc{} && ptr == digits.data() + digits.size()) {
      return {Kind::ring_regular, d};
    }
  }
  throw ParameterError("topology must be 'complete' or 'ring-regular(d)', got '" +
                       std::string(text) + "'");
}

std::string TopologySpec::to_string() const {
  if (kind == Kind::complete) return "complete";
  return "ring-regular(" + std::to_string(degree) + ")";
}

ConsensusMatrix TopologySpec::build(std::size_t node_count) const {
  if (kind == Kind::complete) return build_complete(node_count);
  return build_d_regular(node_count, degree);
}

}  // namespace dista
