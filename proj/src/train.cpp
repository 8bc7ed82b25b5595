#include "stcl/train.hpp"

#include <cmath>
#include <string>

namespace stcl {

namespace {

constexpr double kDivergenceThreshold = 1e6;
constexpr int kMaxLrHalvings = 5;

void seeded_init(Mat& weights, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x1417ULL));
  for (Index i = 0; i < weights.rows(); ++i)
    for (Index j = 0; j < weights.cols(); ++j)
      weights(i, j) = 1e-2 * rng.normal();
}

// Z = 0 is a stationary point of the loss; an all-zero encoder would never
// move, so it gets the seeded small-magnitude init instead.
void ensure_initialized(Encoder& encoder, std::uint64_t seed) {
  if (encoder.weights.size() == 0)
    throw std::invalid_argument("train_stcl: encoder has no weights");
  if (encoder.weights.cwiseAbs().maxCoeff() == 0.0)
    seeded_init(encoder.weights, seed);
}

bool diverged(double loss) {
  return !std::isfinite(loss) || std::abs(loss) > kDivergenceThreshold;
}

struct StepState {
  Mat velocity;
};

void apply_update(Encoder& encoder, const Mat& grad_w,
                  const TrainConfig& config, double lr, StepState& state) {
  if (config.optimizer == OptimizerKind::Momentum) {
    state.velocity = config.beta * state.velocity + grad_w;
    encoder.weights -= lr * state.velocity;
  } else {
    encoder.weights -= lr * grad_w;
  }
}

Mat features_or_throw(const Encoder& encoder, Index n_states,
                      const ObservationModel* obs) {
  if (encoder.kind == Encoder::Kind::Tabular) {
    if (encoder.weights.rows() != n_states)
      throw std::invalid_argument(
          "train_stcl: tabular encoder rows must match state count");
    return Mat();
  }
  if (obs == nullptr)
    throw std::invalid_argument(
        "train_stcl: linear encoder requires an observation model");
  const Mat x = observation_matrix(*obs);
  if (x.rows() != n_states || x.cols() != encoder.weights.rows())
    throw std::invalid_argument(
        "train_stcl: observation matrix does not match encoder dimensions");
  return x;
}

}  // namespace

Encoder make_tabular_encoder(Index n_states, Index k) {
  if (n_states < 1 || k < 1)
    throw std::invalid_argument("make_tabular_encoder: invalid dimensions");
  return Encoder{Encoder::Kind::Tabular, Mat::Zero(n_states, k)};
}

Encoder make_linear_encoder(Index input_dim, Index k) {
  if (input_dim < 1 || k < 1)
    throw std::invalid_argument("make_linear_encoder: invalid dimensions");
  return Encoder{Encoder::Kind::Linear, Mat::Zero(input_dim, k)};
}

Vec encode(const Encoder& encoder, Index state) {
  if (encoder.kind != Encoder::Kind::Tabular)
    throw std::invalid_argument("encode: state indexing needs a tabular encoder");
  if (state < 0 || state >= encoder.weights.rows())
    throw std::invalid_argument("encode: state index out of range");
  return encoder.weights.row(state);
}

Vec encode(const Encoder& encoder, const Vec& features) {
  if (encoder.kind != Encoder::Kind::Linear)
    throw std::invalid_argument("encode: feature input needs a linear encoder");
  if (features.size() != encoder.weights.rows())
    throw std::invalid_argument("encode: feature dimension mismatch");
  return encoder.weights.transpose() * features;
}

Mat encode_all(const Encoder& encoder, Index n_states,
               const ObservationModel* obs) {
  if (encoder.kind == Encoder::Kind::Tabular) {
    if (encoder.weights.rows() != n_states)
      throw std::invalid_argument("encode_all: state count mismatch");
    return encoder.weights;
  }
  if (obs == nullptr)
    throw std::invalid_argument(
        "encode_all: linear encoder requires an observation model");
  return observation_matrix(*obs) * encoder.weights;
}

std::pair<Encoder, TrainReport> train_stcl(const StateGraph& graph,
                                           Encoder encoder,
                                           const TrainConfig& config,
                                           const ObservationModel* obs) {
  if (config.mode != TrainMode::Population)
    throw std::invalid_argument(
        "train_stcl(graph, ...): config mode must be population");
  if (config.learning_rate < 0.0 || config.steps < 1)
    throw std::invalid_argument("train_stcl: invalid learning rate or steps");
  const Index n = graph.norm_adjacency.rows();
  const Mat x = features_or_throw(encoder, n, obs);
  const Mat initial = encoder.weights;

  double lr = config.learning_rate;
  for (int attempt = 0; attempt <= kMaxLrHalvings; ++attempt) {
    encoder.weights = initial;
    ensure_initialized(encoder, config.seed);
    StepState state{Mat::Zero(encoder.weights.rows(), encoder.weights.cols())};
    TrainReport report;
    bool blew_up = false;

    for (Index step = 0; step <= config.steps; ++step) {
      const Mat z = encoder.kind == Encoder::Kind::Tabular
                        ? encoder.weights
                        : Mat(x * encoder.weights);
      if (step % config.eval_every == 0 || step == config.steps) {
        const double loss = population_contrastive_loss(graph, z);
        if (diverged(loss)) {
          blew_up = true;
          break;
        }
        report.loss_curve.emplace_back(step, loss);
      }
      if (step == config.steps) break;
      Mat grad = population_loss_gradient(graph, z);
      if (encoder.kind == Encoder::Kind::Linear) grad = x.transpose() * grad;
      apply_update(encoder, grad, config, lr, state);
      report.wall_steps = step + 1;
    }
    if (!blew_up) {
      const Mat z = encoder.kind == Encoder::Kind::Tabular
                        ? encoder.weights
                        : Mat(x * encoder.weights);
      report.final_population_loss = population_mf_loss(graph, z);
      return {std::move(encoder), std::move(report)};
    }
    lr *= 0.5;
  }
  throw DivergenceError(
      "train_stcl: population loss exceeded " +
      std::to_string(kDivergenceThreshold) + " even after " +
      std::to_string(kMaxLrHalvings) +
      " learning-rate halvings; try a smaller learning rate");
}

std::pair<Encoder, TrainReport> train_stcl(const TrajectoryEnsemble& ensemble,
                                           Index n_states, Encoder encoder,
                                           const TrainConfig& config,
                                           const ObservationModel* obs,
                                           const StateGraph* graph) {
  if (config.mode != TrainMode::Empirical)
    throw std::invalid_argument(
        "train_stcl(ensemble, ...): config mode must be empirical");
  if (config.learning_rate < 0.0 || config.steps < 1)
    throw std::invalid_argument("train_stcl: invalid learning rate or steps");
  const Mat x = features_or_throw(encoder, n_states, obs);
  const Mat initial = encoder.weights;

  double lr = config.learning_rate;
  for (int attempt = 0; attempt <= kMaxLrHalvings; ++attempt) {
    encoder.weights = initial;
    ensure_initialized(encoder, config.seed);
    StepState state{Mat::Zero(encoder.weights.rows(), encoder.weights.cols())};
    BatchSampler sampler(ensemble, config.batch_size, config.negative_mode,
                         derive_seed(config.seed, 0xba7cULL), config.burn_in);
    TrainReport report;
    bool blew_up = false;

    for (Index step = 0; step < config.steps; ++step) {
      const TransitionBatch batch = sampler.next();
      const Mat z = encoder.kind == Encoder::Kind::Tabular
                        ? encoder.weights
                        : Mat(x * encoder.weights);
      if (step % config.eval_every == 0 || step + 1 == config.steps) {
        const double loss = empirical_contrastive_loss(batch, z);
        if (diverged(loss)) {
          blew_up = true;
          break;
        }
        report.loss_curve.emplace_back(step, loss);
      }
      Mat grad = empirical_loss_gradient(batch, z);
      if (encoder.kind == Encoder::Kind::Linear) grad = x.transpose() * grad;
      apply_update(encoder, grad, config, lr, state);
      report.wall_steps = step + 1;
    }
    if (!blew_up) {
      if (graph != nullptr) {
        const Mat z = encoder.kind == Encoder::Kind::Tabular
                          ? encoder.weights
                          : Mat(x * encoder.weights);
        report.final_population_loss = population_mf_loss(*graph, z);
      }
      return {std::move(encoder), std::move(report)};
    }
    lr *= 0.5;
  }
  throw DivergenceError(
      "train_stcl: empirical loss exceeded " +
      std::to_string(kDivergenceThreshold) + " even after " +
      std::to_string(kMaxLrHalvings) +
      " learning-rate halvings; try a smaller learning rate");
}

}  // namespace stcl
