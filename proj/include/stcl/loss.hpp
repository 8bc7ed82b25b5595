#pragma once

#include "stcl/chains.hpp"
#include "stcl/graph.hpp"
#include "stcl/types.hpp"

#include <vector>

namespace stcl {

// N x k representation matrix, rows are per-state embeddings.
using EmbeddingRows = Mat;

// Positive pairs are consecutive-step pairs, negatives are (approximately)
// independent draws from the stationary marginal. Optional weights turn the
// Monte-Carlo mean into an exact weighted enumeration.
struct TransitionBatch {
  std::vector<std::pair<Index, Index>> positives;
  std::vector<std::pair<Index, Index>> negatives;
  Vec pos_weights;  // empty means uniform
  Vec neg_weights;
};

enum class NegativeMode { InBatchCross, IndependentResample };

// || Abar - D^{1/2} Z Z^T D^{1/2} ||_F^2
double population_mf_loss(const StateGraph& graph, const EmbeddingRows& z);

// -2 sum_ij pi_i P(i,j) z_i^T z_j + sum_ij pi_i pi_j (z_i^T z_j)^2.
// Equals population_mf_loss minus ||Abar||_F^2.
double population_contrastive_loss(const StateGraph& graph,
                                   const EmbeddingRows& z);

// -2 * weighted mean over positives of z_i^T z_j
// + weighted mean over negatives of (z_a^T z_b)^2
double empirical_contrastive_loss(const TransitionBatch& batch,
                                  const EmbeddingRows& z);

// Exact gradients with respect to every entry of z.
Mat population_loss_gradient(const StateGraph& graph, const EmbeddingRows& z);
Mat empirical_loss_gradient(const TransitionBatch& batch,
                            const EmbeddingRows& z);

// All N^2 pairs with exact weights pi_i P(i,j) (positives) and pi_i pi_j
// (negatives); feeding this to empirical_contrastive_loss reproduces the
// population value through the pairwise code path.
TransitionBatch exhaustive_batch(const TransitionKernel& kernel,
                                 const StationaryDist& pi);

// Seeded stream of batches over a trajectory ensemble. Positives are
// uniform draws from the pooled consecutive pairs; negatives follow
// `mode`. `burn_in` drops that many leading states from each sequence.
class BatchSampler {
 public:
  BatchSampler(const TrajectoryEnsemble& ensemble, Index batch_size,
               NegativeMode mode, std::uint64_t seed, Index burn_in = 0);

  TransitionBatch next();

  Index pooled_pair_count() const {
    return static_cast<Index>(pairs_.size());
  }

 private:
  std::vector<std::pair<Index, Index>> pairs_;  // pooled consecutive pairs
  std::vector<Index> states_;                   // pooled observed states
  Index batch_size_;
  NegativeMode mode_;
  Rng rng_;
};

}  // namespace stcl
