#include "stcl/chains.hpp"
#include "stcl/graph.hpp"
#include "stcl/spectral.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace stcl;

namespace {

// Independent oracle: iterate pi^T P directly on the raw kernel (with a lazy
// damping to handle periodic chains) until the residual is tiny.
Vec power_iteration_oracle(const TransitionKernel& kernel) {
  const Index n = kernel.n_states;
  Vec pi = Vec::Constant(n, 1.0 / static_cast<double>(n));
  for (int iter = 0; iter < 1000000; ++iter) {
    Vec next = 0.5 * (kernel.probs.transpose() * pi + pi);
    next /= next.sum();
    if ((next - pi).cwiseAbs().maxCoeff() < 1e-14) return next;
    pi = next;
  }
  return pi;
}

TransitionKernel unidirectional_cycle(Index n) {
  TransitionKernel kernel{n, Mat::Zero(n, n)};
  for (Index i = 0; i < n; ++i) kernel.probs(i, (i + 1) % n) = 1.0;
  return kernel;
}

}  // namespace

TEST_CASE("ring chain n=4 has 0.5 on both neighbors") {
  const auto kernel = build_ring_chain(4, 0.0);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) {
      const bool neighbor = (j == (i + 1) % 4) || (j == (i + 3) % 4);
      CHECK(kernel.probs(i, j) == doctest::Approx(neighbor ? 0.5 : 0.0));
    }
}

TEST_CASE("ring chain rejects bad arguments") {
  CHECK_THROWS_AS(build_ring_chain(2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_ring_chain(10, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_ring_chain(10, -0.1), std::invalid_argument);
}

TEST_CASE("ring n=100 is doubly stochastic with uniform stationary") {
  const auto kernel = build_ring_chain(100, 0.0);
  const Vec oracle = power_iteration_oracle(kernel);
  CHECK((oracle.array() - 0.01).abs().maxCoeff() < 1e-12);
  const auto pi = stationary_distribution(kernel);
  CHECK((pi.pi - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("lazy ring Abar has circulant spectrum 0.1 + 0.9 cos(2 pi j / 100)") {
  const auto kernel = build_ring_chain(100, 0.1);
  const auto pi = stationary_distribution(kernel);
  const auto graph = build_state_graph(kernel, pi);
  const auto basis = eig_sym(graph.norm_adjacency);

  std::vector<double> expected;
  for (int j = 0; j < 100; ++j)
    expected.push_back(0.1 + 0.9 * std::cos(2.0 * std::numbers::pi * j / 100.0));
  std::sort(expected.begin(), expected.end(), std::greater<>());
  for (Index j = 0; j < 100; ++j)
    CHECK(basis.values[j] ==
          doctest::Approx(expected[static_cast<std::size_t>(j)]).epsilon(1e-9));
}

TEST_CASE("grid degree walk: corner stationary mass is 2/398 on 11x10") {
  const auto kernel = build_grid_chain(11, 10, GridMode::DegreeWalk);
  const auto pi = stationary_distribution(kernel);
  // pi_i = deg(i) / (2|E|) with |E| = 11*9 + 10*10 = 199.
  CHECK(pi.pi[0] == doctest::Approx(2.0 / 398.0).epsilon(1e-10));
  const Vec oracle = power_iteration_oracle(kernel);
  CHECK((pi.pi - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("grid metropolis 2x2 is uniform") {
  const auto kernel = build_grid_chain(2, 2, GridMode::MetropolisUniform);
  const auto pi = stationary_distribution(kernel);
  CHECK((pi.pi.array() - 0.25).abs().maxCoeff() < 1e-12);
}

TEST_CASE("grid metropolis 11x10 is reversible with uniform pi") {
  const auto kernel = build_grid_chain(11, 10, GridMode::MetropolisUniform);
  StationaryDist uniform{Vec::Constant(110, 1.0 / 110.0)};
  const auto report = check_reversibility(kernel, uniform, 1e-10);
  CHECK(report.reversible);
  const auto pi = stationary_distribution(kernel);
  CHECK((pi.pi.array() - 1.0 / 110.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("grid rejects 1x1") {
  CHECK_THROWS_AS(build_grid_chain(1, 1, GridMode::DegreeWalk),
                  std::invalid_argument);
}

TEST_CASE("random reversible chain: positivity, reversibility, determinism") {
  const auto kernel = build_random_reversible_chain(20, 0.3, 7);
  const auto pi = stationary_distribution(kernel);
  const auto report = check_reversibility(kernel, pi, 1e-10);
  CHECK(report.reversible);

  const auto again = build_random_reversible_chain(20, 0.3, 7);
  CHECK((kernel.probs - again.probs).cwiseAbs().maxCoeff() == 0.0);

  const auto tiny = build_random_reversible_chain(2, 1.0, 3);
  CHECK(tiny.probs(0, 1) > 0.0);
  CHECK(tiny.probs(1, 0) > 0.0);
}

TEST_CASE("generated kernels have unit row sums and detailed balance") {
  const std::vector<TransitionKernel> kernels = {
      build_ring_chain(17, 0.0),
      build_ring_chain(30, 0.25),
      build_grid_chain(4, 5, GridMode::DegreeWalk),
      build_grid_chain(4, 5, GridMode::MetropolisUniform, 0.1),
      build_random_reversible_chain(12, 0.4, 11),
  };
  for (const auto& kernel : kernels) {
    CHECK((kernel.probs.rowwise().sum().array() - 1.0).abs().maxCoeff() <=
          1e-12);
    const auto pi = stationary_distribution(kernel);
    CHECK(check_reversibility(kernel, pi, 1e-10).reversible);
  }
}

TEST_CASE("stationary distribution of lazy ring is uniform") {
  const auto kernel = build_ring_chain(100, 0.1);
  const auto pi = stationary_distribution(kernel);
  CHECK((pi.pi.array() - 0.01).abs().maxCoeff() < 1e-10);
  CHECK((kernel.probs.transpose() * pi.pi - pi.pi).cwiseAbs().maxCoeff() <
        1e-10);
}

TEST_CASE("check_reversibility flags the unidirectional cycle") {
  const auto cycle = unidirectional_cycle(3);
  StationaryDist uniform{Vec::Constant(3, 1.0 / 3.0)};
  const auto report = check_reversibility(cycle, uniform, 1e-10);
  CHECK_FALSE(report.reversible);
  CHECK(report.max_violation == doctest::Approx(1.0 / 3.0));

  const auto sym = build_ring_chain(6, 0.0);
  StationaryDist u6{Vec::Constant(6, 1.0 / 6.0)};
  const auto ok = check_reversibility(sym, u6, 1e-10);
  CHECK(ok.reversible);
  CHECK(ok.max_violation == 0.0);
}

TEST_CASE("trajectories start at fixed state and step to ring neighbors") {
  const auto kernel = build_ring_chain(4, 0.0);
  const auto ensemble =
      sample_trajectories(kernel, InitMode::Fixed, 0, 1, 3, 42);
  REQUIRE(ensemble.sequences.size() == 1);
  const auto& seq = ensemble.sequences[0];
  REQUIRE(seq.size() == 3);
  CHECK(seq[0] == 0);
  for (std::size_t t = 0; t + 1 < seq.size(); ++t)
    CHECK(kernel.probs(seq[t], seq[t + 1]) > 0.0);
}

TEST_CASE("long stationary ensemble visits states near-uniformly") {
  const auto kernel = build_ring_chain(100, 0.1);
  const auto ensemble =
      sample_trajectories(kernel, InitMode::Stationary, 0, 100, 10000, 123);
  Vec counts = Vec::Zero(100);
  double total = 0.0;
  for (const auto& seq : ensemble.sequences)
    for (const Index s : seq) {
      counts[s] += 1.0;
      total += 1.0;
    }
  counts /= total;
  CHECK((counts.array() - 0.01).abs().sum() < 0.06);
}

TEST_CASE("sampling is deterministic under a fixed seed") {
  const auto kernel = build_ring_chain(10, 0.2);
  const auto a = sample_trajectories(kernel, InitMode::Uniform, 0, 4, 50, 9);
  const auto b = sample_trajectories(kernel, InitMode::Uniform, 0, 4, 50, 9);
  CHECK(a.sequences == b.sequences);
}

TEST_CASE("empirical transition frequencies converge to pi_i P(i,j)") {
  const auto kernel = build_ring_chain(10, 0.1);
  const auto pi = stationary_distribution(kernel);
  const auto ensemble =
      sample_trajectories(kernel, InitMode::Stationary, 0, 1, 1000000, 77);
  Mat freq = Mat::Zero(10, 10);
  const auto& seq = ensemble.sequences[0];
  for (std::size_t t = 0; t + 1 < seq.size(); ++t)
    freq(seq[t], seq[t + 1]) += 1.0;
  freq /= static_cast<double>(seq.size() - 1);
  const Mat expected = pi.pi.asDiagonal() * kernel.probs;
  CHECK((freq - expected).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("sample_trajectories validates arguments") {
  const auto kernel = build_ring_chain(5, 0.0);
  CHECK_THROWS_AS(sample_trajectories(kernel, InitMode::Fixed, 0, 1, 1, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_trajectories(kernel, InitMode::Fixed, 0, 0, 5, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_trajectories(kernel, InitMode::Fixed, 7, 1, 5, 0),
                  std::invalid_argument);
}
