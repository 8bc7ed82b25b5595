#pragma once

#include "stcl/types.hpp"

#include <string>
#include <vector>

namespace stcl {

// Row-stochastic transition matrix over N discrete states.
struct TransitionKernel {
  Index n_states = 0;
  Mat probs;  // N x N, rows sum to 1
};

struct StationaryDist {
  Vec pi;
};

// M state-index sequences of length T sampled from a kernel.
struct TrajectoryEnsemble {
  std::vector<std::vector<Index>> sequences;
  std::uint64_t seed = 0;
  std::string kernel_id;
};

enum class GridMode { DegreeWalk, MetropolisUniform };

enum class InitMode { Stationary, Uniform, Fixed };

struct ReversibilityReport {
  bool reversible = false;
  double max_violation = 0.0;
};

// Throws if rows do not sum to 1 within 1e-12 or any entry is negative.
void validate_kernel(const TransitionKernel& kernel);

// Nearest-neighbor ring walk: P(i, i+-1 mod n) = (1-laziness)/2,
// P(i, i) = laziness. Symmetric, hence doubly stochastic.
TransitionKernel build_ring_chain(Index n, double laziness);

// DegreeWalk: uniform step to each grid neighbor (stationary ~ degree).
// MetropolisUniform: Metropolis-Hastings adjustment of the degree walk so
// the stationary distribution is exactly uniform. Laziness mixes in a
// self-loop on top of either mode.
TransitionKernel build_grid_chain(Index rows, Index cols, GridMode mode,
                                  double laziness = 0.0);

// Random symmetric weight matrix with expected edge density `density`,
// row-normalized. Reversible by construction with pi_i ~ row sums of W.
// Retries until the support graph is connected (bounded retries).
TransitionKernel build_random_reversible_chain(Index n, double density,
                                               std::uint64_t seed);

// Power iteration on the lazified kernel (P + I)/2 to tolerance `tol`.
// Throws on non-convergence within max_iters.
StationaryDist stationary_distribution(const TransitionKernel& kernel,
                                       double tol = 1e-12,
                                       int max_iters = 2000000);

// Detailed-balance check: max |pi_i P(i,j) - pi_j P(j,i)| <= tol.
ReversibilityReport check_reversibility(const TransitionKernel& kernel,
                                        const StationaryDist& pi, double tol);

// M chains of length T with a per-chain seed derived from (seed, chain),
// so results are independent of sampling order. `fixed_state` is only
// read in Fixed mode.
TrajectoryEnsemble sample_trajectories(const TransitionKernel& kernel,
                                       InitMode init, Index fixed_state,
                                       Index m, Index t, std::uint64_t seed);

}  // namespace stcl
