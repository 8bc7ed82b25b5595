#include "stcl/graph.hpp"

#include <stdexcept>
#include <string>

namespace stcl {

StateGraph build_state_graph(const TransitionKernel& kernel,
                             const StationaryDist& pi, double tol) {
  const auto report = check_reversibility(kernel, pi, tol);
  if (!report.reversible)
    throw std::invalid_argument(
        "build_state_graph: kernel is not reversible, max detailed-balance "
        "violation " +
        std::to_string(report.max_violation));
  if ((pi.pi.array() <= 0.0).any())
    throw std::invalid_argument(
        "build_state_graph: pi has zero entries, D^{-1/2} undefined");

  StateGraph graph;
  Mat a = pi.pi.asDiagonal() * kernel.probs;
  graph.adjacency = 0.5 * (a + a.transpose());
  graph.degree = pi.pi;
  const Vec inv_sqrt = pi.pi.cwiseSqrt().cwiseInverse();
  graph.norm_adjacency =
      inv_sqrt.asDiagonal() * graph.adjacency * inv_sqrt.asDiagonal();
  // Keep Abar exactly symmetric despite the two diagonal scalings.
  graph.norm_adjacency =
      (0.5 * (graph.norm_adjacency + graph.norm_adjacency.transpose())).eval();
  graph.norm_laplacian =
      Mat::Identity(kernel.n_states, kernel.n_states) - graph.norm_adjacency;
  return graph;
}

double frobenius_norm_sq(const StateGraph& graph) {
  return graph.norm_adjacency.squaredNorm();
}

}  // namespace stcl
