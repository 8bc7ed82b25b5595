#include "stcl/chains.hpp"

#include <cmath>
#include <stdexcept>

namespace stcl {

namespace {

// Inverse-CDF draw from one kernel row.
Index sample_row(const Mat& probs, Index row, double u) {
  double acc = 0.0;
  Index last_positive = -1;
  for (Index j = 0; j < probs.cols(); ++j) {
    const double p = probs(row, j);
    if (p > 0.0) last_positive = j;
    acc += p;
    if (u < acc) return j;
  }
  // Rounding pushed u past the accumulated mass.
  if (last_positive < 0)
    throw std::runtime_error("sample_row: all-zero kernel row");
  return last_positive;
}

Index sample_dist(const Vec& p, double u) {
  double acc = 0.0;
  Index last_positive = 0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) last_positive = i;
    acc += p[i];
    if (u < acc) return i;
  }
  return last_positive;
}

bool connected(const Mat& w) {
  const Index n = w.rows();
  std::vector<char> seen(n, 0);
  std::vector<Index> stack{0};
  seen[0] = 1;
  Index count = 1;
  while (!stack.empty()) {
    const Index i = stack.back();
    stack.pop_back();
    for (Index j = 0; j < n; ++j) {
      if (!seen[j] && i != j && w(i, j) > 0.0) {
        seen[j] = 1;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count == n;
}

void apply_laziness(Mat& p, double laziness) {
  if (laziness == 0.0) return;
  const Index n = p.rows();
  p *= (1.0 - laziness);
  p.diagonal().array() += laziness;
  (void)n;
}

}  // namespace

void validate_kernel(const TransitionKernel& kernel) {
  if (kernel.probs.rows() != kernel.n_states ||
      kernel.probs.cols() != kernel.n_states)
    throw std::invalid_argument("kernel: shape mismatch");
  if ((kernel.probs.array() < 0.0).any())
    throw std::invalid_argument("kernel: negative transition probability");
  const Vec row_sums = kernel.probs.rowwise().sum();
  if (((row_sums.array() - 1.0).abs() > 1e-12).any())
    throw std::invalid_argument("kernel: rows must sum to 1 within 1e-12");
}

TransitionKernel build_ring_chain(Index n, double laziness) {
  if (n < 3) throw std::invalid_argument("build_ring_chain: need n >= 3");
  if (laziness < 0.0 || laziness >= 1.0)
    throw std::invalid_argument("build_ring_chain: laziness must be in [0,1)");
  TransitionKernel kernel{n, Mat::Zero(n, n)};
  const double step = (1.0 - laziness) / 2.0;
  for (Index i = 0; i < n; ++i) {
    kernel.probs(i, (i + 1) % n) += step;
    kernel.probs(i, (i + n - 1) % n) += step;
    kernel.probs(i, i) += laziness;
  }
  validate_kernel(kernel);
  return kernel;
}

TransitionKernel build_grid_chain(Index rows, Index cols, GridMode mode,
                                  double laziness) {
  if (rows < 1 || cols < 1 || rows * cols < 2)
    throw std::invalid_argument("build_grid_chain: grid must have >= 2 states");
  if (laziness < 0.0 || laziness >= 1.0)
    throw std::invalid_argument("build_grid_chain: laziness must be in [0,1)");
  const Index n = rows * cols;
  auto id = [cols](Index r, Index c) { return r * cols + c; };

  std::vector<std::vector<Index>> nbrs(n);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      auto& list = nbrs[id(r, c)];
      if (r > 0) list.push_back(id(r - 1, c));
      if (r + 1 < rows) list.push_back(id(r + 1, c));
      if (c > 0) list.push_back(id(r, c - 1));
      if (c + 1 < cols) list.push_back(id(r, c + 1));
    }

  TransitionKernel kernel{n, Mat::Zero(n, n)};
  for (Index i = 0; i < n; ++i) {
    const double deg_i = static_cast<double>(nbrs[i].size());
    double out_mass = 0.0;
    for (Index j : nbrs[i]) {
      double p;
      if (mode == GridMode::DegreeWalk) {
        p = 1.0 / deg_i;
      } else {
        // Metropolis-Hastings over a uniform target with the degree walk
        // as proposal: accept with min(1, deg_i/deg_j).
        p = std::min(1.0 / deg_i, 1.0 / static_cast<double>(nbrs[j].size()));
      }
      kernel.probs(i, j) = p;
      out_mass += p;
    }
    kernel.probs(i, i) = 1.0 - out_mass;
  }
  apply_laziness(kernel.probs, laziness);
  validate_kernel(kernel);
  return kernel;
}

TransitionKernel build_random_reversible_chain(Index n, double density,
                                               std::uint64_t seed) {
  if (n < 2)
    throw std::invalid_argument("build_random_reversible_chain: need n >= 2");
  if (density <= 0.0 || density > 1.0)
    throw std::invalid_argument(
        "build_random_reversible_chain: density must be in (0,1]");
  constexpr int kMaxRetries = 100;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    Mat w = Mat::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j) {
        if (rng.uniform() < density) {
          const double weight = 0.1 + rng.uniform();
          w(i, j) = weight;
          w(j, i) = weight;
        }
      }
    if (!connected(w)) continue;
    TransitionKernel kernel{n, Mat(n, n)};
    const Vec row_sums = w.rowwise().sum();
    kernel.probs = row_sums.cwiseInverse().asDiagonal() * w;
    validate_kernel(kernel);
    return kernel;
  }
  throw std::runtime_error(
      "build_random_reversible_chain: no connected graph after 100 retries; "
      "increase density");
}

StationaryDist stationary_distribution(const TransitionKernel& kernel,
                                       double tol, int max_iters) {
  validate_kernel(kernel);
  const Index n = kernel.n_states;
  // Iterate on (P + I)/2: same stationary vector, but aperiodic even for
  // periodic chains (e.g. the non-lazy even ring).
  Vec pi = Vec::Constant(n, 1.0 / static_cast<double>(n));
  for (int iter = 0; iter < max_iters; ++iter) {
    Vec next = 0.5 * (kernel.probs.transpose() * pi + pi);
    next /= next.sum();
    const double diff = (next - pi).cwiseAbs().maxCoeff();
    pi = next;
    if (diff <= tol) {
      const double residual =
          (kernel.probs.transpose() * pi - pi).cwiseAbs().maxCoeff();
      if (residual > 1e-10)
        throw std::runtime_error(
            "stationary_distribution: converged iterate is not stationary "
            "(chain may be reducible)");
      return StationaryDist{pi};
    }
  }
  throw std::runtime_error(
      "stationary_distribution: power iteration did not converge (chain may "
      "be periodic or reducible)");
}

ReversibilityReport check_reversibility(const TransitionKernel& kernel,
                                        const StationaryDist& pi, double tol) {
  const Mat flow = pi.pi.asDiagonal() * kernel.probs;
  const double violation = (flow - flow.transpose()).cwiseAbs().maxCoeff();
  return ReversibilityReport{violation <= tol, violation};
}

TrajectoryEnsemble sample_trajectories(const TransitionKernel& kernel,
                                       InitMode init, Index fixed_state,
                                       Index m, Index t, std::uint64_t seed) {
  validate_kernel(kernel);
  if (t < 2) throw std::invalid_argument("sample_trajectories: need t >= 2");
  if (m < 1) throw std::invalid_argument("sample_trajectories: need m >= 1");
  if (init == InitMode::Fixed &&
      (fixed_state < 0 || fixed_state >= kernel.n_states))
    throw std::invalid_argument("sample_trajectories: fixed state out of range");

  Vec pi;
  if (init == InitMode::Stationary)
    pi = stationary_distribution(kernel).pi;

  TrajectoryEnsemble ensemble;
  ensemble.seed = seed;
  ensemble.sequences.resize(static_cast<std::size_t>(m));
  for (Index c = 0; c < m; ++c) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    auto& seq = ensemble.sequences[static_cast<std::size_t>(c)];
    seq.resize(static_cast<std::size_t>(t));
    Index state;
    switch (init) {
      case InitMode::Stationary:
        state = sample_dist(pi, rng.uniform());
        break;
      case InitMode::Uniform:
        state = rng.uniform_index(kernel.n_states);
        break;
      default:
        state = fixed_state;
    }
    seq[0] = state;
    for (Index step = 1; step < t; ++step) {
      state = sample_row(kernel.probs, state, rng.uniform());
      seq[static_cast<std::size_t>(step)] = state;
    }
  }
  return ensemble;
}

}  // namespace stcl
