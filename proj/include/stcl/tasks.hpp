#pragma once

#include "stcl/types.hpp"

#include <string>

namespace stcl {

// Per-state regression targets for linear probing.
struct ProbeTask {
  std::string name;
  Mat targets;  // N x q
};

enum class ObservationKind { OneHot, CoordinateNoise };

// Deterministic per-state feature emitter. One-hot emits e_i (d = N).
// CoordinateNoise emits the clean per-state features plus additive noise,
// concatenated with nuisance dimensions. Nuisance values are scaled to the
// clean features' per-dimension RMS so they compete with the signal in PCA.
struct ObservationModel {
  ObservationKind kind = ObservationKind::OneHot;
  Index n_states = 0;
  Mat clean;  // N x c clean feature map (CoordinateNoise only)
  Index nuisance_dims = 0;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;
};

// Targets (cos(2*pi*i/n), sin(2*pi*i/n)); the angle-pose task.
ProbeTask ring_pose_task(Index n);

// Mean-centered (col, row) coordinates of each grid state.
ProbeTask grid_coordinate_task(Index rows, Index cols);

ObservationModel make_one_hot_model(Index n_states);
ObservationModel make_coordinate_noise_model(const Mat& clean,
                                             Index nuisance_dims,
                                             double noise_scale,
                                             std::uint64_t seed);

Index observation_dim(const ObservationModel& model);
Vec observe(const ObservationModel& model, Index state);

// Stacked observe(model, i) for all states; rows are states.
Mat observation_matrix(const ObservationModel& model);

}  // namespace stcl
