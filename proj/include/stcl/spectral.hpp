#pragma once

#include "stcl/graph.hpp"
#include "stcl/types.hpp"

namespace stcl {

// Full symmetric eigendecomposition, eigenvalues sorted descending.
// Sign convention: each eigenvector's largest-magnitude entry is positive.
struct EigenBasis {
  Mat vectors;  // N x N, columns are eigenvectors
  Vec values;   // descending
};

enum class EmbeddingKind { ClosedFormMinimizer, RawEigenvectors, Pca };

struct SpectralEmbedding {
  Mat matrix;  // N x k, rows are per-state embeddings
  EmbeddingKind kind = EmbeddingKind::RawEigenvectors;
  bool degenerate_ties = false;  // PCA cut fell inside a tied singular block
};

// Principal angles between two column spans, plus the orthogonal-Procrustes
// residual min_Q ||a - b Q||_F. Angles sorted ascending.
struct AlignmentReport {
  Vec principal_angles;
  double mean_angle = 0.0;
  double procrustes_residual = 0.0;
};

// Rejects input that is not symmetric within 1e-10.
EigenBasis eig_sym(const Mat& matrix);

// Z* = D^{-1/2} U_k max(Lambda_k, 0)^{1/2} with the top-k eigenpairs of
// Abar. Negative eigenvalues are clipped: Z Z^T is PSD, so they are
// unrepresentable and the best PSD rank-k fit zeroes them.
SpectralEmbedding closed_form_minimizer(const StateGraph& graph, Index k);

// Mean-centers rows and projects onto the top-k right singular directions.
SpectralEmbedding pca_embedding(const Mat& observations, Index k);

// Rejects rank-deficient inputs (reports effective ranks in the message).
AlignmentReport subspace_alignment(const SpectralEmbedding& a,
                                   const SpectralEmbedding& b);

}  // namespace stcl
