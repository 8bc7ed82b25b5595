// Experiment runner: builds chains, spectra, trained embeddings and probe
// reports from a JSON config, emitting CSV/JSON artifacts.

#include "stcl/chains.hpp"
#include "stcl/graph.hpp"
#include "stcl/io.hpp"
#include "stcl/loss.hpp"
#include "stcl/probe.hpp"
#include "stcl/spectral.hpp"
#include "stcl/tasks.hpp"
#include "stcl/train.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using stcl::Index;
using stcl::Json;
using stcl::Mat;
using stcl::Vec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void reject_unknown_keys(const Json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
  if (!obj.is_object())
    throw ConfigError("config: " + path + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key))
      throw ConfigError("config: unknown key '" + path + "." + key + "'");
}

template <typename T>
T get_or(const Json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

struct EnvironmentSpec {
  std::string kind;  // ring | grid | random
  Index n = 0;
  double laziness = 0.0;
  Index rows = 0, cols = 0;
  std::string grid_mode = "metropolis-uniform";
  double density = 0.0;
  std::uint64_t seed = 0;
};

struct SamplingSpec {
  Index m = 10;
  Index t = 10000;
  std::uint64_t seed = 1;
  Index burn_in = 0;
  std::string init = "stationary";
  Index fixed_state = 0;
};

struct ObservationSpec {
  std::string kind = "one-hot";
  Index nuisance_dims = 0;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;
};

struct CompareSpec {
  std::vector<Index> budgets;
  std::vector<std::uint64_t> seeds;
  bool include_exact = false;
  std::uint64_t embedding_seed = 5;
};

struct ExperimentConfig {
  EnvironmentSpec environment;
  Index k = 8;
  std::string method = "exact-spectral";
  std::vector<std::string> methods;
  SamplingSpec sampling;
  stcl::TrainConfig training;
  std::string encoder_kind = "tabular";
  std::string task = "none";
  ObservationSpec observation;
  CompareSpec compare;
  fs::path output_dir = "out";
};

EnvironmentSpec parse_environment(const Json& j) {
  EnvironmentSpec env;
  env.kind = j.at("kind").get<std::string>();
  if (env.kind == "ring") {
    reject_unknown_keys(j, "environment", {"kind", "n", "laziness"});
    env.n = j.at("n").get<Index>();
    env.laziness = get_or(j, "laziness", 0.0);
  } else if (env.kind == "grid") {
    reject_unknown_keys(j, "environment",
                        {"kind", "rows", "cols", "mode", "laziness"});
    env.rows = j.at("rows").get<Index>();
    env.cols = j.at("cols").get<Index>();
    env.grid_mode = get_or<std::string>(j, "mode", "metropolis-uniform");
    if (env.grid_mode != "degree-walk" && env.grid_mode != "metropolis-uniform")
      throw ConfigError("config: unknown grid mode '" + env.grid_mode + "'");
    env.laziness = get_or(j, "laziness", 0.0);
  } else if (env.kind == "random") {
    reject_unknown_keys(j, "environment", {"kind", "n", "density", "seed"});
    env.n = j.at("n").get<Index>();
    env.density = j.at("density").get<double>();
    env.seed = get_or<std::uint64_t>(j, "seed", 0);
  } else {
    throw ConfigError("config: unknown environment kind '" + env.kind + "'");
  }
  return env;
}

SamplingSpec parse_sampling(const Json& j) {
  reject_unknown_keys(j, "sampling",
                      {"m", "t", "seed", "burn_in", "init", "fixed_state"});
  SamplingSpec spec;
  spec.m = get_or<Index>(j, "m", spec.m);
  spec.t = get_or<Index>(j, "t", spec.t);
  spec.seed = get_or<std::uint64_t>(j, "seed", spec.seed);
  spec.burn_in = get_or<Index>(j, "burn_in", spec.burn_in);
  spec.init = get_or<std::string>(j, "init", spec.init);
  spec.fixed_state = get_or<Index>(j, "fixed_state", spec.fixed_state);
  if (spec.init != "stationary" && spec.init != "uniform" &&
      spec.init != "fixed")
    throw ConfigError("config: unknown sampling init '" + spec.init + "'");
  return spec;
}

stcl::TrainConfig parse_training(const Json& j) {
  reject_unknown_keys(j, "training",
                      {"learning_rate", "steps", "batch_size", "optimizer",
                       "beta", "seed", "mode", "eval_every", "negative_mode"});
  stcl::TrainConfig config;
  config.learning_rate = get_or(j, "learning_rate", config.learning_rate);
  config.steps = get_or<Index>(j, "steps", config.steps);
  config.batch_size = get_or<Index>(j, "batch_size", config.batch_size);
  config.beta = get_or(j, "beta", config.beta);
  config.seed = get_or<std::uint64_t>(j, "seed", config.seed);
  config.eval_every = get_or<Index>(j, "eval_every", config.eval_every);
  const auto optimizer =
      get_or<std::string>(j, "optimizer", "plain-gradient-descent");
  if (optimizer == "plain-gradient-descent")
    config.optimizer = stcl::OptimizerKind::GradientDescent;
  else if (optimizer == "momentum")
    config.optimizer = stcl::OptimizerKind::Momentum;
  else
    throw ConfigError("config: unknown optimizer '" + optimizer + "'");
  const auto mode = get_or<std::string>(j, "mode", "population");
  if (mode == "population")
    config.mode = stcl::TrainMode::Population;
  else if (mode == "empirical")
    config.mode = stcl::TrainMode::Empirical;
  else
    throw ConfigError("config: unknown training mode '" + mode + "'");
  const auto negatives =
      get_or<std::string>(j, "negative_mode", "in-batch-cross");
  if (negatives == "in-batch-cross")
    config.negative_mode = stcl::NegativeMode::InBatchCross;
  else if (negatives == "independent-resample")
    config.negative_mode = stcl::NegativeMode::IndependentResample;
  else
    throw ConfigError("config: unknown negative mode '" + negatives + "'");
  if (config.learning_rate <= 0.0)
    throw ConfigError("config: training.learning_rate must be positive");
  if (config.steps < 1) throw ConfigError("config: training.steps must be >= 1");
  return config;
}

ExperimentConfig parse_config(const Json& j) {
  reject_unknown_keys(j, "<root>",
                      {"environment", "embedding", "sampling", "training",
                       "encoder", "task", "observation", "compare",
                       "output_dir"});
  ExperimentConfig config;
  config.environment = parse_environment(j.at("environment"));
  if (j.contains("embedding")) {
    const Json& e = j.at("embedding");
    reject_unknown_keys(e, "embedding", {"k", "method", "methods"});
    config.k = get_or<Index>(e, "k", config.k);
    config.method = get_or<std::string>(e, "method", config.method);
    config.methods =
        get_or<std::vector<std::string>>(e, "methods", {config.method});
  } else {
    config.methods = {config.method};
  }
  if (j.contains("sampling"))
    config.sampling = parse_sampling(j.at("sampling"));
  if (j.contains("training"))
    config.training = parse_training(j.at("training"));
  config.encoder_kind = get_or<std::string>(j, "encoder", "tabular");
  if (config.encoder_kind != "tabular" && config.encoder_kind != "linear")
    throw ConfigError("config: unknown encoder kind '" + config.encoder_kind +
                      "'");
  config.task = get_or<std::string>(j, "task", "none");
  if (config.task != "none" && config.task != "ring-pose" &&
      config.task != "grid-coordinates")
    throw ConfigError("config: unknown task '" + config.task + "'");
  if (j.contains("observation")) {
    const Json& o = j.at("observation");
    reject_unknown_keys(o, "observation",
                        {"kind", "nuisance_dims", "noise_scale", "seed"});
    config.observation.kind = get_or<std::string>(o, "kind", "one-hot");
    if (config.observation.kind != "one-hot" &&
        config.observation.kind != "coordinate-noise")
      throw ConfigError("config: unknown observation kind '" +
                        config.observation.kind + "'");
    config.observation.nuisance_dims = get_or<Index>(o, "nuisance_dims", 0);
    config.observation.noise_scale = get_or(o, "noise_scale", 0.0);
    config.observation.seed = get_or<std::uint64_t>(o, "seed", 0);
  }
  if (j.contains("compare")) {
    const Json& c = j.at("compare");
    reject_unknown_keys(c, "compare",
                        {"budgets", "seeds", "include_exact", "embedding_seed"});
    config.compare.budgets = get_or<std::vector<Index>>(c, "budgets", {});
    config.compare.seeds =
        get_or<std::vector<std::uint64_t>>(c, "seeds", {1, 2, 3});
    config.compare.include_exact = get_or(c, "include_exact", false);
    config.compare.embedding_seed =
        get_or<std::uint64_t>(c, "embedding_seed", 5);
  }
  config.output_dir = get_or<std::string>(j, "output_dir", "out");
  return config;
}

struct Environment {
  stcl::TransitionKernel kernel;
  stcl::StationaryDist pi;
  stcl::StateGraph graph;
  std::string id;
};

Environment build_environment(const EnvironmentSpec& spec) {
  Environment env;
  if (spec.kind == "ring") {
    env.kernel = stcl::build_ring_chain(spec.n, spec.laziness);
    env.id = "ring-" + std::to_string(spec.n);
  } else if (spec.kind == "grid") {
    const auto mode = spec.grid_mode == "degree-walk"
                          ? stcl::GridMode::DegreeWalk
                          : stcl::GridMode::MetropolisUniform;
    env.kernel =
        stcl::build_grid_chain(spec.rows, spec.cols, mode, spec.laziness);
    env.id = "grid-" + std::to_string(spec.rows) + "x" +
             std::to_string(spec.cols);
  } else {
    env.kernel =
        stcl::build_random_reversible_chain(spec.n, spec.density, spec.seed);
    env.id = "random-" + std::to_string(spec.n);
  }
  env.pi = stcl::stationary_distribution(env.kernel);
  env.graph = stcl::build_state_graph(env.kernel, env.pi);
  return env;
}

stcl::TrajectoryEnsemble sample_from(const Environment& env,
                                     const SamplingSpec& spec) {
  stcl::InitMode init = stcl::InitMode::Stationary;
  if (spec.init == "uniform") init = stcl::InitMode::Uniform;
  if (spec.init == "fixed") init = stcl::InitMode::Fixed;
  auto ensemble = stcl::sample_trajectories(env.kernel, init, spec.fixed_state,
                                            spec.m, spec.t, spec.seed);
  ensemble.kernel_id = env.id;
  return ensemble;
}

stcl::ProbeTask build_task(const ExperimentConfig& config) {
  if (config.task == "ring-pose")
    return stcl::ring_pose_task(config.environment.n);
  if (config.task == "grid-coordinates")
    return stcl::grid_coordinate_task(config.environment.rows,
                                      config.environment.cols);
  throw ConfigError("config: this command requires a task");
}

stcl::ObservationModel build_observation_model(const ExperimentConfig& config,
                                               Index n_states) {
  if (config.observation.kind == "one-hot")
    return stcl::make_one_hot_model(n_states);
  // Coordinate-noise observations use the probe task's clean coordinates.
  const stcl::ProbeTask task = build_task(config);
  return stcl::make_coordinate_noise_model(
      task.targets, config.observation.nuisance_dims,
      config.observation.noise_scale, config.observation.seed);
}

void write_json(const fs::path& path, const Json& j) {
  stcl::write_text_file(path, j.dump(2) + "\n");
}

Mat loss_curve_matrix(const stcl::TrainReport& report, double mode_code) {
  Mat curve(static_cast<Index>(report.loss_curve.size()), 3);
  for (Index i = 0; i < curve.rows(); ++i) {
    curve(i, 0) = static_cast<double>(report.loss_curve[i].first);
    curve(i, 1) = report.loss_curve[i].second;
    curve(i, 2) = mode_code;
  }
  return curve;
}

std::pair<stcl::Encoder, stcl::TrainReport> run_training(
    const ExperimentConfig& config, const Environment& env) {
  const Index n = env.kernel.n_states;
  std::optional<stcl::ObservationModel> obs;
  stcl::Encoder encoder;
  if (config.encoder_kind == "linear") {
    obs = build_observation_model(config, n);
    encoder = stcl::make_linear_encoder(stcl::observation_dim(*obs), config.k);
  } else {
    encoder = stcl::make_tabular_encoder(n, config.k);
  }
  const stcl::ObservationModel* obs_ptr = obs ? &*obs : nullptr;
  if (config.training.mode == stcl::TrainMode::Population)
    return stcl::train_stcl(env.graph, std::move(encoder), config.training,
                            obs_ptr);
  const auto ensemble = sample_from(env, config.sampling);
  auto result = stcl::train_stcl(ensemble, n, std::move(encoder),
                                 config.training, obs_ptr, &env.graph);
  return result;
}

int cmd_spectrum(const ExperimentConfig& config, bool quiet) {
  const Environment env = build_environment(config.environment);
  const stcl::EigenBasis basis = stcl::eig_sym(env.graph.norm_adjacency);
  const Index k = std::min(config.k, env.kernel.n_states);

  fs::create_directories(config.output_dir);
  std::vector<std::string> header;
  for (Index j = 0; j < k; ++j) header.push_back("u" + std::to_string(j + 1));
  stcl::write_csv(config.output_dir / "spectrum.csv", header,
                  basis.vectors.leftCols(k));
  stcl::write_csv(config.output_dir / "eigenvalues.csv", {"lambda"},
                  basis.values.head(k));

  Json summary{{"environment", env.id},
               {"n_states", env.kernel.n_states},
               {"k", k},
               {"top_eigenvalue", basis.values[0]},
               {"frobenius_norm_sq", stcl::frobenius_norm_sq(env.graph)}};
  write_json(config.output_dir / "spectrum_summary.json", summary);
  if (!quiet)
    std::cout << "spectrum: wrote " << k << " eigenvectors for " << env.id
              << " to " << config.output_dir.string() << "\n";
  return kExitOk;
}

int cmd_train(const ExperimentConfig& config, bool quiet) {
  const Environment env = build_environment(config.environment);
  auto [encoder, report] = run_training(config, env);

  fs::create_directories(config.output_dir);
  write_json(config.output_dir / "encoder.json", stcl::to_json(encoder));
  const double mode_code =
      config.training.mode == stcl::TrainMode::Population ? 0.0 : 1.0;
  stcl::write_csv(config.output_dir / "loss_curve.csv",
                  {"step", "loss", "mode"}, loss_curve_matrix(report, mode_code));

  const auto optimum = stcl::closed_form_minimizer(env.graph, config.k);
  const double optimal_loss = stcl::population_mf_loss(env.graph, optimum.matrix);
  Json summary{{"environment", env.id},
               {"k", config.k},
               {"wall_steps", report.wall_steps},
               {"final_population_loss", report.final_population_loss},
               {"closed_form_loss", optimal_loss}};
  write_json(config.output_dir / "train_summary.json", summary);
  if (!quiet)
    std::cout << "train: final population loss "
              << stcl::format_double(report.final_population_loss)
              << " (closed form " << stcl::format_double(optimal_loss)
              << ")\n";
  return kExitOk;
}

int cmd_probe(const ExperimentConfig& config, bool quiet) {
  const Environment env = build_environment(config.environment);
  const stcl::ProbeTask task = build_task(config);
  fs::create_directories(config.output_dir);

  Json results = Json::array();
  for (const std::string& method : config.methods) {
    Mat embedding;
    if (method == "exact-spectral") {
      embedding = stcl::closed_form_minimizer(env.graph, config.k).matrix;
    } else if (method == "pca") {
      const auto obs = build_observation_model(config, env.kernel.n_states);
      embedding =
          stcl::pca_embedding(stcl::observation_matrix(obs), config.k).matrix;
    } else if (method == "stcl-population" || method == "stcl-empirical") {
      ExperimentConfig train_config = config;
      train_config.training.mode = method == "stcl-population"
                                       ? stcl::TrainMode::Population
                                       : stcl::TrainMode::Empirical;
      auto [encoder, report] = run_training(train_config, env);
      std::optional<stcl::ObservationModel> obs;
      if (encoder.kind == stcl::Encoder::Kind::Linear)
        obs = build_observation_model(config, env.kernel.n_states);
      embedding = stcl::encode_all(encoder, env.kernel.n_states,
                                   obs ? &*obs : nullptr);
    } else if (method == "ground-truth") {
      embedding = task.targets;
    } else {
      throw ConfigError("config: unknown embedding method '" + method + "'");
    }

    const auto probe = stcl::fit_linear_probe(embedding, task);
    results.push_back(
        {{"method", method},
         {"r_squared_mean", probe.mean_r_squared},
         {"r_squared",
          std::vector<double>(probe.r_squared.data(),
                              probe.r_squared.data() + probe.r_squared.size())}});

    Mat table(task.targets.rows(), 2 * task.targets.cols());
    table << probe.predictions, task.targets;
    std::vector<std::string> header;
    for (Index c = 0; c < task.targets.cols(); ++c)
      header.push_back("pred" + std::to_string(c + 1));
    for (Index c = 0; c < task.targets.cols(); ++c)
      header.push_back("target" + std::to_string(c + 1));
    stcl::write_csv(config.output_dir / ("predictions_" + method + ".csv"),
                    header, table);
    if (!quiet)
      std::cout << "probe: " << method << " R^2 "
                << stcl::format_double(probe.mean_r_squared) << "\n";
  }
  Json summary{{"environment", env.id}, {"task", task.name},
               {"k", config.k},       {"results", results}};
  write_json(config.output_dir / "probe_summary.json", summary);
  return kExitOk;
}

int cmd_compare_losses(const ExperimentConfig& config, bool quiet) {
  if (config.compare.budgets.empty())
    throw ConfigError("config: compare.budgets must be non-empty");
  const Environment env = build_environment(config.environment);
  const Index n = env.kernel.n_states;

  stcl::Rng rng(stcl::derive_seed(config.compare.embedding_seed, 0x2eedULL));
  Mat z(n, config.k);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < config.k; ++j) z(i, j) = rng.normal();

  const double population = stcl::population_contrastive_loss(env.graph, z);
  std::vector<std::array<double, 5>> rows;

  auto add_row = [&](double budget, double seed, double empirical) {
    const double rel = std::abs(empirical - population) / std::abs(population);
    rows.push_back({budget, seed, empirical, population, rel});
  };

  if (config.compare.include_exact) {
    const auto batch = stcl::exhaustive_batch(env.kernel, env.pi);
    add_row(0.0, -1.0, stcl::empirical_contrastive_loss(batch, z));
  }
  for (const Index budget : config.compare.budgets) {
    double sum = 0.0;
    for (const std::uint64_t seed : config.compare.seeds) {
      const auto ensemble = stcl::sample_trajectories(
          env.kernel, stcl::InitMode::Stationary, 0, 1, budget, seed);
      // One deterministic batch covering every observed transition.
      stcl::TransitionBatch batch;
      const auto& seq = ensemble.sequences[0];
      for (std::size_t t = 0; t + 1 < seq.size(); ++t)
        batch.positives.emplace_back(seq[t], seq[t + 1]);
      stcl::Rng neg_rng(stcl::derive_seed(seed, 0x4e9aULL));
      const Index pool = static_cast<Index>(seq.size());
      for (std::size_t q = 0; q < 4 * batch.positives.size(); ++q)
        batch.negatives.emplace_back(
            seq[static_cast<std::size_t>(neg_rng.uniform_index(pool))],
            seq[static_cast<std::size_t>(neg_rng.uniform_index(pool))]);
      const double empirical = stcl::empirical_contrastive_loss(batch, z);
      add_row(static_cast<double>(budget), static_cast<double>(seed),
              empirical);
      sum += empirical;
    }
    add_row(static_cast<double>(budget), -1.0,
            sum / static_cast<double>(config.compare.seeds.size()));
  }

  Mat table(static_cast<Index>(rows.size()), 5);
  for (Index i = 0; i < table.rows(); ++i)
    for (Index c = 0; c < 5; ++c)
      table(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
  fs::create_directories(config.output_dir);
  stcl::write_csv(
      config.output_dir / "compare_losses.csv",
      {"budget", "seed", "empirical_loss", "population_loss", "relative_error"},
      table);
  if (!quiet)
    std::cout << "compare-losses: population loss "
              << stcl::format_double(population) << ", " << rows.size()
              << " rows\n";
  return kExitOk;
}

int cmd_experiment(const ExperimentConfig& config, bool quiet) {
  int rc = cmd_spectrum(config, quiet);
  if (rc != kExitOk) return rc;
  rc = cmd_train(config, quiet);
  if (rc != kExitOk) return rc;
  return cmd_probe(config, quiet);
}

int dispatch(const std::string& command, const fs::path& config_path,
             const std::optional<std::string>& out_override,
             const std::optional<std::uint64_t>& seed_override, bool quiet) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot open config " << config_path << "\n";
    return kExitIo;
  }
  Json raw;
  try {
    raw = Json::parse(in);
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    ExperimentConfig config = parse_config(raw);
    if (out_override) config.output_dir = *out_override;
    if (seed_override) {
      config.sampling.seed = *seed_override;
      config.training.seed = *seed_override;
      config.compare.embedding_seed = *seed_override;
    }
    if (command == "spectrum") return cmd_spectrum(config, quiet);
    if (command == "train") return cmd_train(config, quiet);
    if (command == "probe") return cmd_probe(config, quiet);
    if (command == "compare-losses") return cmd_compare_losses(config, quiet);
    return cmd_experiment(config, quiet);
  } catch (const stcl::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    if (what.rfind("io:", 0) == 0) {
      std::cerr << "io error: " << what << "\n";
      return kExitIo;
    }
    std::cerr << "divergence: " << what << "\n";
    return kExitDivergence;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral temporal contrastive learning experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_override;
  std::optional<std::uint64_t> seed_override;
  bool quiet = false;

  std::vector<CLI::App*> subs;
  for (const char* name :
       {"spectrum", "train", "probe", "compare-losses", "experiment"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON experiment config")
        ->required();
    sub->add_option("--out", out_override, "output directory override");
    sub->add_option("--seed", seed_override, "seed override");
    sub->add_flag("--quiet", quiet, "suppress progress output");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  return dispatch(command, config_path, out_override, seed_override, quiet);
}
