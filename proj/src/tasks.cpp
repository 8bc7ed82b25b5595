#include "stcl/tasks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stcl {

namespace {

// Nuisance amplitude and additive noise are both expressed relative to the
// clean features' RMS, so noise_scale = 1 means unit signal-to-noise.
double clean_rms(const Mat& clean) {
  const Mat centered = clean.rowwise() - clean.colwise().mean();
  const double ms = centered.squaredNorm() /
                    static_cast<double>(centered.size());
  return std::sqrt(ms);
}

}  // namespace

ProbeTask ring_pose_task(Index n) {
  if (n < 3) throw std::invalid_argument("ring_pose_task: need n >= 3");
  ProbeTask task;
  task.name = "ring-pose";
  task.targets = Mat(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double theta =
        2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    task.targets(i, 0) = std::cos(theta);
    task.targets(i, 1) = std::sin(theta);
  }
  return task;
}

ProbeTask grid_coordinate_task(Index rows, Index cols) {
  if (rows < 2 || cols < 2)
    throw std::invalid_argument("grid_coordinate_task: need rows, cols >= 2");
  ProbeTask task;
  task.name = "grid-coordinates";
  task.targets = Mat(rows * cols, 2);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      task.targets(r * cols + c, 0) = static_cast<double>(c);
      task.targets(r * cols + c, 1) = static_cast<double>(r);
    }
  task.targets.rowwise() -= task.targets.colwise().mean().eval();
  return task;
}

ObservationModel make_one_hot_model(Index n_states) {
  if (n_states < 1)
    throw std::invalid_argument("make_one_hot_model: need n_states >= 1");
  ObservationModel model;
  model.kind = ObservationKind::OneHot;
  model.n_states = n_states;
  return model;
}

ObservationModel make_coordinate_noise_model(const Mat& clean,
                                             Index nuisance_dims,
                                             double noise_scale,
                                             std::uint64_t seed) {
  if (clean.rows() < 1 || clean.cols() < 1)
    throw std::invalid_argument(
        "make_coordinate_noise_model: clean feature map is empty");
  if (nuisance_dims < 0 || noise_scale < 0.0)
    throw std::invalid_argument(
        "make_coordinate_noise_model: invalid nuisance/noise settings");
  ObservationModel model;
  model.kind = ObservationKind::CoordinateNoise;
  model.n_states = clean.rows();
  model.clean = clean;
  model.nuisance_dims = nuisance_dims;
  model.noise_scale = noise_scale;
  model.seed = seed;
  return model;
}

Index observation_dim(const ObservationModel& model) {
  return model.kind == ObservationKind::OneHot
             ? model.n_states
             : model.clean.cols() + model.nuisance_dims;
}

Vec observe(const ObservationModel& model, Index state) {
  if (state < 0 || state >= model.n_states)
    throw std::invalid_argument("observe: state index out of range");
  if (model.kind == ObservationKind::OneHot) {
    Vec v = Vec::Zero(model.n_states);
    v[state] = 1.0;
    return v;
  }
  const Index c = model.clean.cols();
  Vec v(c + model.nuisance_dims);
  const double amplitude = model.noise_scale * clean_rms(model.clean);
  Rng rng(derive_seed(model.seed, static_cast<std::uint64_t>(state)));
  for (Index d = 0; d < c; ++d)
    v[d] = model.clean(state, d) + amplitude * rng.normal();
  for (Index d = 0; d < model.nuisance_dims; ++d)
    v[c + d] = amplitude * rng.normal();
  return v;
}

Mat observation_matrix(const ObservationModel& model) {
  Mat x(model.n_states, observation_dim(model));
  for (Index i = 0; i < model.n_states; ++i) x.row(i) = observe(model, i);
  return x;
}

}  // namespace stcl
