#pragma once

#include "stcl/graph.hpp"
#include "stcl/loss.hpp"
#include "stcl/tasks.hpp"
#include "stcl/types.hpp"

#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace stcl {

// Desk-scale encoders: a per-state embedding table, or a linear map applied
// to observation features. With one-hot observations the two coincide.
struct Encoder {
  enum class Kind { Tabular, Linear };
  Kind kind = Kind::Tabular;
  Mat weights;  // N x k (tabular) or d x k (linear)
};

enum class TrainMode { Population, Empirical };
enum class OptimizerKind { GradientDescent, Momentum };

struct TrainConfig {
  double learning_rate = 0.1;
  Index steps = 1000;
  Index batch_size = 1024;
  OptimizerKind optimizer = OptimizerKind::GradientDescent;
  double beta = 0.9;  // momentum coefficient
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::Population;
  Index eval_every = 100;
  Index burn_in = 0;
  NegativeMode negative_mode = NegativeMode::InBatchCross;
};

struct TrainReport {
  std::vector<std::pair<Index, double>> loss_curve;  // contrastive scale
  double final_population_loss = std::numeric_limits<double>::quiet_NaN();
  Index wall_steps = 0;
};

// Loss blew past the divergence threshold even after learning-rate backoff.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Encoder make_tabular_encoder(Index n_states, Index k);
Encoder make_linear_encoder(Index input_dim, Index k);

Vec encode(const Encoder& encoder, Index state);
Vec encode(const Encoder& encoder, const Vec& features);

// Embedding rows for all states. Linear encoders need the observation model.
Mat encode_all(const Encoder& encoder, Index n_states,
               const ObservationModel* obs = nullptr);

// Population mode: full-batch descent on the exact contrastive loss.
std::pair<Encoder, TrainReport> train_stcl(const StateGraph& graph,
                                           Encoder encoder,
                                           const TrainConfig& config,
                                           const ObservationModel* obs =
                                               nullptr);

// Empirical mode: seeded minibatch descent over a trajectory ensemble.
// If `graph` is given, the exact population loss of the result is reported.
std::pair<Encoder, TrainReport> train_stcl(const TrajectoryEnsemble& ensemble,
                                           Index n_states, Encoder encoder,
                                           const TrainConfig& config,
                                           const ObservationModel* obs =
                                               nullptr,
                                           const StateGraph* graph = nullptr);

}  // namespace stcl
