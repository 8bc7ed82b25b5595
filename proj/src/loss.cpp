#include "stcl/loss.hpp"

#include <stdexcept>

namespace stcl {

namespace {

void check_rows(const StateGraph& graph, const EmbeddingRows& z) {
  if (z.rows() != graph.norm_adjacency.rows())
    throw std::invalid_argument("loss: embedding rows must match graph states");
}

double weight_at(const Vec& w, std::size_t i) {
  return w.size() == 0 ? 1.0 : w[static_cast<Index>(i)];
}

double total_weight(const Vec& w, std::size_t count) {
  return w.size() == 0 ? static_cast<double>(count) : w.sum();
}

}  // namespace

double population_mf_loss(const StateGraph& graph, const EmbeddingRows& z) {
  check_rows(graph, z);
  const Mat scaled = graph.degree.cwiseSqrt().asDiagonal() * z;
  return (graph.norm_adjacency - scaled * scaled.transpose()).squaredNorm();
}

double population_contrastive_loss(const StateGraph& graph,
                                   const EmbeddingRows& z) {
  check_rows(graph, z);
  const Mat gram = z * z.transpose();
  const double positive_term =
      -2.0 * graph.adjacency.cwiseProduct(gram).sum();
  const Mat weighted =
      graph.degree.asDiagonal() * gram.cwiseProduct(gram) *
      graph.degree.asDiagonal();
  return positive_term + weighted.sum();
}

double empirical_contrastive_loss(const TransitionBatch& batch,
                                  const EmbeddingRows& z) {
  if (batch.positives.empty() || batch.negatives.empty())
    throw std::invalid_argument(
        "empirical_contrastive_loss: batch needs positives and negatives");
  double pos = 0.0;
  for (std::size_t p = 0; p < batch.positives.size(); ++p) {
    const auto [i, j] = batch.positives[p];
    pos += weight_at(batch.pos_weights, p) * z.row(i).dot(z.row(j));
  }
  double neg = 0.0;
  for (std::size_t q = 0; q < batch.negatives.size(); ++q) {
    const auto [a, b] = batch.negatives[q];
    const double s = z.row(a).dot(z.row(b));
    neg += weight_at(batch.neg_weights, q) * s * s;
  }
  return -2.0 * pos / total_weight(batch.pos_weights, batch.positives.size()) +
         neg / total_weight(batch.neg_weights, batch.negatives.size());
}

Mat population_loss_gradient(const StateGraph& graph, const EmbeddingRows& z) {
  check_rows(graph, z);
  const Mat core = z.transpose() * graph.degree.asDiagonal() * z;  // k x k
  return -4.0 * graph.adjacency * z +
         4.0 * graph.degree.asDiagonal() * z * core;
}

Mat empirical_loss_gradient(const TransitionBatch& batch,
                            const EmbeddingRows& z) {
  if (batch.positives.empty() || batch.negatives.empty())
    throw std::invalid_argument(
        "empirical_loss_gradient: batch needs positives and negatives");
  Mat grad = Mat::Zero(z.rows(), z.cols());
  const double wp = total_weight(batch.pos_weights, batch.positives.size());
  for (std::size_t p = 0; p < batch.positives.size(); ++p) {
    const auto [i, j] = batch.positives[p];
    const double w = weight_at(batch.pos_weights, p) / wp;
    grad.row(i) -= 2.0 * w * z.row(j);
    grad.row(j) -= 2.0 * w * z.row(i);
  }
  const double wn = total_weight(batch.neg_weights, batch.negatives.size());
  for (std::size_t q = 0; q < batch.negatives.size(); ++q) {
    const auto [a, b] = batch.negatives[q];
    const double w = weight_at(batch.neg_weights, q) / wn;
    const double s = z.row(a).dot(z.row(b));
    grad.row(a) += 2.0 * w * s * z.row(b);
    grad.row(b) += 2.0 * w * s * z.row(a);
  }
  return grad;
}

TransitionBatch exhaustive_batch(const TransitionKernel& kernel,
                                 const StationaryDist& pi) {
  const Index n = kernel.n_states;
  TransitionBatch batch;
  std::vector<double> pos_w, neg_w;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double joint = pi.pi[i] * kernel.probs(i, j);
      if (joint > 0.0) {
        batch.positives.emplace_back(i, j);
        pos_w.push_back(joint);
      }
      batch.negatives.emplace_back(i, j);
      neg_w.push_back(pi.pi[i] * pi.pi[j]);
    }
  batch.pos_weights = Eigen::Map<const Vec>(pos_w.data(),
                                            static_cast<Index>(pos_w.size()));
  batch.neg_weights = Eigen::Map<const Vec>(neg_w.data(),
                                            static_cast<Index>(neg_w.size()));
  return batch;
}

BatchSampler::BatchSampler(const TrajectoryEnsemble& ensemble,
                           Index batch_size, NegativeMode mode,
                           std::uint64_t seed, Index burn_in)
    : batch_size_(batch_size), mode_(mode), rng_(seed) {
  if (batch_size < 2 && mode == NegativeMode::InBatchCross)
    throw std::invalid_argument(
        "BatchSampler: in-batch-cross negatives need batch_size >= 2");
  if (batch_size < 1)
    throw std::invalid_argument("BatchSampler: batch_size must be positive");
  for (const auto& seq : ensemble.sequences) {
    const Index len = static_cast<Index>(seq.size());
    for (Index t = burn_in; t + 1 < len; ++t)
      pairs_.emplace_back(seq[static_cast<std::size_t>(t)],
                          seq[static_cast<std::size_t>(t + 1)]);
    for (Index t = burn_in; t < len; ++t)
      states_.push_back(seq[static_cast<std::size_t>(t)]);
  }
  if (pairs_.empty())
    throw std::invalid_argument(
        "BatchSampler: ensemble has no transitions after burn-in");
}

TransitionBatch BatchSampler::next() {
  TransitionBatch batch;
  batch.positives.reserve(static_cast<std::size_t>(batch_size_));
  for (Index b = 0; b < batch_size_; ++b)
    batch.positives.push_back(
        pairs_[static_cast<std::size_t>(rng_.uniform_index(pooled_pair_count()))]);

  batch.negatives.reserve(static_cast<std::size_t>(batch_size_));
  if (mode_ == NegativeMode::InBatchCross) {
    for (Index b = 0; b < batch_size_; ++b) {
      // Pair with another batch element's first state, never itself as an
      // instance (equal states may still collide by chance).
      Index other = rng_.uniform_index(batch_size_ - 1);
      if (other >= b) ++other;
      batch.negatives.emplace_back(
          batch.positives[static_cast<std::size_t>(b)].first,
          batch.positives[static_cast<std::size_t>(other)].first);
    }
  } else {
    const Index pool = static_cast<Index>(states_.size());
    for (Index b = 0; b < batch_size_; ++b) {
      const Index a = states_[static_cast<std::size_t>(rng_.uniform_index(pool))];
      const Index c = states_[static_cast<std::size_t>(rng_.uniform_index(pool))];
      batch.negatives.emplace_back(a, c);
    }
  }
  return batch;
}

}  // namespace stcl
