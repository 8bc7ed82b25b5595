#include "stcl/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stcl {

namespace {

// Largest-magnitude entry positive; first such entry wins ties.
void fix_column_signs(Mat& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    Index idx;
    m.col(j).cwiseAbs().maxCoeff(&idx);
    if (m(idx, j) < 0.0) m.col(j) = -m.col(j);
  }
}

}  // namespace

EigenBasis eig_sym(const Mat& matrix) {
  if (matrix.rows() != matrix.cols())
    throw std::invalid_argument("eig_sym: matrix must be square");
  const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10)
    throw std::invalid_argument("eig_sym: input asymmetric by " +
                                std::to_string(asym));
  Eigen::SelfAdjointEigenSolver<Mat> solver(0.5 *
                                            (matrix + matrix.transpose()));
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eig_sym: eigensolver failed");

  const Index n = matrix.rows();
  EigenBasis basis;
  basis.values = solver.eigenvalues().reverse();
  basis.vectors = solver.eigenvectors().rowwise().reverse();
  (void)n;
  fix_column_signs(basis.vectors);
  return basis;
}

SpectralEmbedding closed_form_minimizer(const StateGraph& graph, Index k) {
  const Index n = graph.norm_adjacency.rows();
  if (k < 1 || k > n)
    throw std::invalid_argument("closed_form_minimizer: k must be in [1, N]");
  const EigenBasis basis = eig_sym(graph.norm_adjacency);
  const Vec clipped = basis.values.head(k).cwiseMax(0.0).cwiseSqrt();
  SpectralEmbedding embedding;
  embedding.kind = EmbeddingKind::ClosedFormMinimizer;
  embedding.matrix = graph.degree.cwiseSqrt().cwiseInverse().asDiagonal() *
                     basis.vectors.leftCols(k) * clipped.asDiagonal();
  return embedding;
}

SpectralEmbedding pca_embedding(const Mat& observations, Index k) {
  const Index n = observations.rows();
  const Index d = observations.cols();
  if (k < 1 || k > std::min(n, d))
    throw std::invalid_argument("pca_embedding: k must be in [1, min(N, d)]");
  Mat centered = observations.rowwise() - observations.colwise().mean();
  Eigen::BDCSVD<Mat> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();

  Mat components = svd.matrixV().leftCols(k);
  fix_column_signs(components);

  SpectralEmbedding embedding;
  embedding.kind = EmbeddingKind::Pca;
  embedding.matrix = centered * components;
  if (k < sv.size() && sv[0] > 0.0 &&
      std::abs(sv[k - 1] - sv[k]) <= 1e-9 * sv[0])
    embedding.degenerate_ties = true;
  return embedding;
}

AlignmentReport subspace_alignment(const SpectralEmbedding& a,
                                   const SpectralEmbedding& b) {
  if (a.matrix.rows() != b.matrix.rows() || a.matrix.cols() != b.matrix.cols())
    throw std::invalid_argument("subspace_alignment: shape mismatch");
  const Index k = a.matrix.cols();

  auto orthobasis = [k](const Mat& x, const char* name) {
    Eigen::BDCSVD<Mat> svd(x, Eigen::ComputeThinU);
    const Vec& sv = svd.singularValues();
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
      if (sv[i] > 1e-10 * sv[0]) ++rank;
    if (rank < k)
      throw std::invalid_argument(
          std::string("subspace_alignment: ") + name +
          " is rank-deficient (effective rank " + std::to_string(rank) +
          " < k = " + std::to_string(k) + ")");
    return Mat(svd.matrixU().leftCols(k));
  };
  const Mat qa = orthobasis(a.matrix, "first embedding");
  const Mat qb = orthobasis(b.matrix, "second embedding");

  Eigen::BDCSVD<Mat> cross(qa.transpose() * qb);
  AlignmentReport report;
  report.principal_angles = Vec(k);
  for (Index i = 0; i < k; ++i) {
    const double c = std::clamp(cross.singularValues()[i], -1.0, 1.0);
    // Descending cosines give ascending angles.
    report.principal_angles[i] = std::acos(c);
  }
  report.mean_angle = report.principal_angles.mean();

  Eigen::BDCSVD<Mat> procrustes(b.matrix.transpose() * a.matrix);
  const double residual_sq = a.matrix.squaredNorm() + b.matrix.squaredNorm() -
                             2.0 * procrustes.singularValues().sum();
  report.procrustes_residual = std::sqrt(std::max(0.0, residual_sq));
  return report;
}

}  // namespace stcl
