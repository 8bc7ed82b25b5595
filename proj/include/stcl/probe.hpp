#pragma once

#include "stcl/tasks.hpp"
#include "stcl/types.hpp"

namespace stcl {

struct ProbeResult {
  Mat weights;        // k x q (plus intercept row last, when enabled)
  Mat predictions;    // N x q
  Vec r_squared;      // per target column
  double mean_r_squared = 0.0;
};

// 1 - SS_res / SS_tot per column. Throws on zero-variance target columns.
Vec r_squared(const Mat& predictions, const Mat& targets);

// Least squares on frozen embeddings; minimum-norm solution under rank
// deficiency (relative singular-value cutoff 1e-10).
ProbeResult fit_linear_probe(const Mat& embedding, const ProbeTask& task,
                             bool intercept = true);

}  // namespace stcl
