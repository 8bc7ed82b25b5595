#include <Eigen/Dense>
#include "stcl/chains.hpp"
#include "stcl/graph.hpp"
#include "stcl/probe.hpp"
#include "stcl/spectral.hpp"
#include "stcl/tasks.hpp"

#include <doctest.h>

#include <cmath>

using namespace stcl;

namespace {

StateGraph ring_graph(Index n, double laziness) {
  const auto kernel = build_ring_chain(n, laziness);
  const auto pi = stationary_distribution(kernel);
  return build_state_graph(kernel, pi);
}

Mat random_orthogonal(Index k, std::uint64_t seed) {
  Rng rng(seed);
  Mat m(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) m(i, j) = rng.normal();
  return Eigen::HouseholderQR<Mat>(m).householderQ();
}

}  // namespace

TEST_CASE("ring pose task n=4 gives the four axis points") {
  const auto task = ring_pose_task(4);
  Mat expected(4, 2);
  expected << 1, 0, 0, 1, -1, 0, 0, -1;
  CHECK((task.targets - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("ring pose targets lie in the span of eigenvectors 2 and 3") {
  const auto graph = ring_graph(100, 0.0);
  const auto basis = eig_sym(graph.norm_adjacency);
  const auto task = ring_pose_task(100);
  const Mat span = basis.vectors.middleCols(1, 2);  // the first Fourier pair
  const Mat residual =
      task.targets - span * (span.transpose() * task.targets);
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("k=3 exact spectral embedding probes ring pose exactly") {
  const auto graph = ring_graph(100, 0.1);
  const auto embedding = closed_form_minimizer(graph, 3);
  const auto result = fit_linear_probe(embedding.matrix, ring_pose_task(100));
  CHECK(result.mean_r_squared == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("grid 2x2 coordinates are centered") {
  const auto task = grid_coordinate_task(2, 2);
  Mat expected(4, 2);
  expected << -0.5, -0.5, 0.5, -0.5, -0.5, 0.5, 0.5, 0.5;
  CHECK((task.targets - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("grid probe quality grows with k on nested eigenbases") {
  const auto kernel = build_grid_chain(11, 10, GridMode::MetropolisUniform);
  const auto pi = stationary_distribution(kernel);
  const auto graph = build_state_graph(kernel, pi);
  const auto task = grid_coordinate_task(11, 10);

  const auto k8 = fit_linear_probe(closed_form_minimizer(graph, 8).matrix, task);
  const auto k2 = fit_linear_probe(closed_form_minimizer(graph, 2).matrix, task);
  CHECK(k8.mean_r_squared >= 0.9);
  CHECK(k2.mean_r_squared < k8.mean_r_squared);

  // Monotonicity across a nested sweep.
  double previous = -1.0;
  for (Index k = 1; k <= 10; ++k) {
    const auto r =
        fit_linear_probe(closed_form_minimizer(graph, k).matrix, task);
    CHECK(r.mean_r_squared >= previous - 1e-9);
    previous = r.mean_r_squared;
  }
}

TEST_CASE("one-hot observations are standard basis vectors") {
  const auto model = make_one_hot_model(5);
  const Vec v = observe(model, 3);
  CHECK(v[3] == 1.0);
  CHECK(v.sum() == 1.0);
  CHECK_THROWS_AS(observe(model, 5), std::invalid_argument);
}

TEST_CASE("noise-free coordinate model reproduces the centered coordinates") {
  const auto task = grid_coordinate_task(3, 3);
  const auto model = make_coordinate_noise_model(task.targets, 0, 0.0, 1);
  CHECK((observation_matrix(model) - task.targets).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("observations are deterministic per state and seed") {
  const auto task = grid_coordinate_task(4, 4);
  const auto model = make_coordinate_noise_model(task.targets, 8, 1.0, 7);
  const Vec a = observe(model, 5);
  const Vec b = observe(model, 5);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  const auto other = make_coordinate_noise_model(task.targets, 8, 1.0, 8);
  CHECK((a - observe(other, 5)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("PCA probe degrades monotonically with observation noise") {
  const auto task = grid_coordinate_task(11, 10);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    double previous = 2.0;
    for (double noise : {0.0, 0.5, 1.0}) {
      const auto model =
          make_coordinate_noise_model(task.targets, 16, noise, seed);
      Mat obs = observation_matrix(model);
      // At noise 0 the nuisance columns are all-zero; PCA still works.
      const auto embedding = pca_embedding(obs, 8);
      const auto result = fit_linear_probe(embedding.matrix, task);
      CHECK(result.mean_r_squared < previous + 1e-9);
      previous = result.mean_r_squared;
    }
    CHECK(previous < 1.0 - 1e-6);
  }
}

TEST_CASE("probe is exact on span-contained targets") {
  const auto graph = ring_graph(60, 0.2);
  const auto embedding = closed_form_minimizer(graph, 6);
  Rng rng(12);
  Mat w(6, 2);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 2; ++j) w(i, j) = rng.normal();
  ProbeTask task{"synthetic", embedding.matrix * w};
  const auto result = fit_linear_probe(embedding.matrix, task);
  CHECK(result.mean_r_squared == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("probe of orthogonal targets scores zero") {
  // Embedding spans e_1..e_3; targets live on e_5 with zero mean.
  Mat z = Mat::Zero(8, 3);
  z(0, 0) = z(1, 1) = z(2, 2) = 1.0;
  Mat y = Mat::Zero(8, 1);
  y(4, 0) = 1.0;
  y(5, 0) = -1.0;
  const auto result = fit_linear_probe(z, ProbeTask{"orthogonal", y});
  CHECK(result.mean_r_squared == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("r_squared handles the trivial cases") {
  Mat y(4, 2);
  y << 1, 2, 3, 4, 5, 6, 7, 8;
  CHECK((r_squared(y, y).array() - 1.0).abs().maxCoeff() < 1e-15);

  Mat means(4, 2);
  means.col(0).setConstant(y.col(0).mean());
  means.col(1).setConstant(y.col(1).mean());
  CHECK(r_squared(means, y).cwiseAbs().maxCoeff() < 1e-15);

  Mat half = means;
  half.row(0) = y.row(0);
  half.row(1) = y.row(1);
  const Vec r = r_squared(half, y);
  CHECK(r.minCoeff() > 0.0);
  CHECK(r.maxCoeff() < 1.0);

  Mat flat = Mat::Zero(4, 1);
  CHECK_THROWS_AS(r_squared(flat, flat), std::invalid_argument);
}

TEST_CASE("probe R^2 is invariant under embedding rotation") {
  const auto graph = ring_graph(50, 0.1);
  const auto embedding = closed_form_minimizer(graph, 5);
  const auto task = ring_pose_task(50);
  const auto base = fit_linear_probe(embedding.matrix, task);
  const Mat rotated = embedding.matrix * random_orthogonal(5, 77);
  const auto turned = fit_linear_probe(rotated, task);
  CHECK((base.r_squared - turned.r_squared).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rank-deficient designs get the minimum-norm solution") {
  // Constant column collides with the intercept; the solve must not blow up.
  Mat z(5, 2);
  z.col(0).setOnes();
  z.col(1) << 1, 2, 3, 4, 5;
  ProbeTask task{"line", z.col(1)};
  const auto result = fit_linear_probe(z, task, true);
  CHECK(result.mean_r_squared == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(result.weights.cwiseAbs().maxCoeff() < 1e3);
}
