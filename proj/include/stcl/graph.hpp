#pragma once

#include "stcl/chains.hpp"
#include "stcl/types.hpp"

namespace stcl {

// State graph of a reversible chain: A_ij = pi_i P(i,j), D = diag(pi),
// Abar = D^{-1/2} A D^{-1/2}, Lbar = I - Abar. Immutable after build.
struct StateGraph {
  Mat adjacency;       // A, symmetric
  Vec degree;          // diagonal of D, equals pi
  Mat norm_adjacency;  // Abar
  Mat norm_laplacian;  // Lbar, stored so Abar + Lbar = I exactly
};

// Requires a reversible kernel (checked at `tol`) and strictly positive pi.
// A is symmetrized as (A + A^T)/2 after the check so downstream eigensolves
// see an exactly symmetric matrix.
StateGraph build_state_graph(const TransitionKernel& kernel,
                             const StationaryDist& pi, double tol = 1e-10);

// Sum of squared entries of Abar; the constant offsetting the contrastive
// loss from the matrix-factorization loss.
double frobenius_norm_sq(const StateGraph& graph);

}  // namespace stcl
