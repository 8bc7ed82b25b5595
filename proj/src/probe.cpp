#include "stcl/probe.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace stcl {

Vec r_squared(const Mat& predictions, const Mat& targets) {
  if (predictions.rows() != targets.rows() ||
      predictions.cols() != targets.cols())
    throw std::invalid_argument("r_squared: shape mismatch");
  const Index q = targets.cols();
  Vec result(q);
  for (Index c = 0; c < q; ++c) {
    const double mean = targets.col(c).mean();
    const double ss_tot = (targets.col(c).array() - mean).square().sum();
    if (ss_tot <= 0.0)
      throw std::invalid_argument("r_squared: target column " +
                                  std::to_string(c) + " has zero variance");
    const double ss_res = (targets.col(c) - predictions.col(c)).squaredNorm();
    result[c] = 1.0 - ss_res / ss_tot;
  }
  return result;
}

ProbeResult fit_linear_probe(const Mat& embedding, const ProbeTask& task,
                             bool intercept) {
  if (embedding.rows() != task.targets.rows())
    throw std::invalid_argument(
        "fit_linear_probe: embedding rows must match task rows");
  Mat design = embedding;
  if (intercept) {
    design.conservativeResize(Eigen::NoChange, design.cols() + 1);
    design.col(design.cols() - 1).setOnes();
  }
  Eigen::BDCSVD<Mat> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  ProbeResult result;
  result.weights = svd.solve(task.targets);
  result.predictions = design * result.weights;
  result.r_squared = r_squared(result.predictions, task.targets);
  result.mean_r_squared = result.r_squared.mean();
  return result;
}

}  // namespace stcl
