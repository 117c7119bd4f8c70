#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mecoff/actor.hpp"
#include "mecoff/baselines.hpp"
#include "mecoff/channel.hpp"
#include "mecoff/critic.hpp"
#include "mecoff/errors.hpp"

namespace mecoff {

struct DrlOptions {
  double learning_rate = 0.01;
  std::size_t batch_size = 128;
  std::size_t memory_capacity = 1024;
  int train_interval = 10;  // delta
  int candidate_count = 16;  // B
  std::vector<int> hidden_layers = {160, 120, 80};
};

/// Everything one experiment run needs; JSON file fields override the
/// defaults, command-line flags override the file.
struct ExperimentConfig {
  std::string graph_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  long epochs = 21000;
  long warmup = 20000;
  int eval_realizations = 50;
  int eval_interval = 50;  // epochs between policy evaluations after warm-up
  bool one_climb = true;
  std::vector<std::string> baselines = {"exhaustive", "gibbs", "all_local", "all_edge"};
  std::size_t path_cap = 10000;
  std::string checkpoint;  // optional: reuse a trained policy

  EnvParams env;
  DrlOptions drl;
  SolveOptions critic;
  GibbsOptions gibbs;
  ExhaustiveOptions exhaustive;

  void validate() const {
    if (graph_path.empty()) throw ConfigError("config needs a 'graph' file path");
    if (epochs <= warmup)
      throw ConfigError("epochs (" + std::to_string(epochs) + ") must exceed warmup (" +
                        std::to_string(warmup) + ")");
    if (eval_realizations < 1) throw ConfigError("eval_realizations must be >= 1");
    if (eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
    if (drl.candidate_count < 2 || drl.candidate_count % 2 != 0)
      throw ConfigError("candidate_count must be even and >= 2");
    if (drl.train_interval < 1) throw ConfigError("train_interval must be >= 1");
    if (drl.memory_capacity == 0 || drl.batch_size == 0)
      throw ConfigError("memory_capacity and batch_size must be positive");
    env.validate();
  }
};

namespace detail {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  detail::read_field(j, "graph", c.graph_path);
  detail::read_field(j, "out_dir", c.out_dir);
  detail::read_field(j, "seed", c.seed);
  detail::read_field(j, "epochs", c.epochs);
  detail::read_field(j, "warmup", c.warmup);
  detail::read_field(j, "eval_realizations", c.eval_realizations);
  detail::read_field(j, "eval_interval", c.eval_interval);
  detail::read_field(j, "one_climb", c.one_climb);
  detail::read_field(j, "baselines", c.baselines);
  detail::read_field(j, "path_cap", c.path_cap);
  detail::read_field(j, "checkpoint", c.checkpoint);

  if (j.contains("env")) {
    const auto& e = j.at("env");
    detail::read_field(e, "bandwidth_hz", c.env.bandwidth_hz);
    detail::read_field(e, "noise_power_w", c.env.noise_power_w);
    detail::read_field(e, "p_md_w", c.env.p_md_w);
    detail::read_field(e, "p_ap_w", c.env.p_ap_w);
    detail::read_field(e, "antenna_gain", c.env.antenna_gain);
    detail::read_field(e, "carrier_hz", c.env.carrier_hz);
    detail::read_field(e, "distance_m", c.env.distance_m);
    detail::read_field(e, "pathloss_exp", c.env.pathloss_exp);
    detail::read_field(e, "rician_los_fraction", c.env.rician_los_fraction);
    detail::read_field(e, "ud_correlation", c.env.ud_correlation);
    detail::read_field(e, "f_edge_min_hz", c.env.f_edge_min_hz);
    detail::read_field(e, "f_edge_max_hz", c.env.f_edge_max_hz);
    detail::read_field(e, "f_peak_hz", c.env.f_peak_hz);
    detail::read_field(e, "kappa", c.env.kappa);
    detail::read_field(e, "beta_e", c.env.beta_e);
    if (j.at("env").contains("beta_e") && !j.at("env").contains("beta_t"))
      c.env.beta_t = 1.0 - c.env.beta_e;
    detail::read_field(e, "beta_t", c.env.beta_t);
  }
  if (j.contains("drl")) {
    const auto& d = j.at("drl");
    detail::read_field(d, "learning_rate", c.drl.learning_rate);
    detail::read_field(d, "batch_size", c.drl.batch_size);
    detail::read_field(d, "memory_capacity", c.drl.memory_capacity);
    detail::read_field(d, "train_interval", c.drl.train_interval);
    detail::read_field(d, "candidate_count", c.drl.candidate_count);
    detail::read_field(d, "hidden_layers", c.drl.hidden_layers);
  }
  if (j.contains("critic")) {
    const auto& s = j.at("critic");
    detail::read_field(s, "tol", c.critic.tol);
    detail::read_field(s, "max_iters", c.critic.max_iters);
    detail::read_field(s, "eps0_scale", c.critic.eps0_scale);
  }
  if (j.contains("gibbs")) {
    const auto& g = j.at("gibbs");
    detail::read_field(g, "sweeps", c.gibbs.sweeps);
    detail::read_field(g, "initial_temperature", c.gibbs.initial_temperature);
    detail::read_field(g, "decay", c.gibbs.decay);
  }
  if (j.contains("exhaustive")) {
    const auto& x = j.at("exhaustive");
    detail::read_field(x, "max_tasks", c.exhaustive.max_tasks);
    detail::read_field(x, "parallel", c.exhaustive.parallel);
  }
  c.gibbs.solve = c.critic;
  c.exhaustive.solve = c.critic;
  return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw ConfigError("config file " + path + " is not valid JSON: " + ex.what());
  }
  return experiment_config_from_json(j);
}

}  // namespace mecoff
