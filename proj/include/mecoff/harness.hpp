#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mecoff/actor.hpp"
#include "mecoff/baselines.hpp"
#include "mecoff/checkpoint.hpp"
#include "mecoff/config.hpp"
#include "mecoff/errors.hpp"

namespace mecoff {

/// One metrics line: loss fields are present on training epochs, evaluation
/// fields on evaluation epochs (both when they coincide).
struct MetricsRow {
  long epoch = 0;
  std::optional<double> loss;
  std::optional<double> moving_avg_loss;  // window of 15 training losses
  std::optional<double> eta_drl;
  std::optional<double> eta_opt;
  std::optional<double> chi;  // 1 - (eta_drl - eta_opt) / eta_opt
};

inline constexpr const char* kMetricsHeader = "epoch,loss,moving_avg_loss,eta_drl,eta_opt,chi";

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string format_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

}  // namespace detail

inline std::string metrics_row_csv(const MetricsRow& r) {
  std::ostringstream line;
  line << r.epoch << ',' << detail::format_cell(r.loss) << ','
       << detail::format_cell(r.moving_avg_loss) << ',' << detail::format_cell(r.eta_drl) << ','
       << detail::format_cell(r.eta_opt) << ',' << detail::format_cell(r.chi);
  return line.str();
}

/// Aggregated means and standard deviations with a fixed CSV schema.
/// Evaluation statistics ignore rows from the warm-up phase.
struct Summary {
  struct Stat {
    std::string metric;
    long count = 0;
    double mean = 0.0;
    double stddev = 0.0;
  };
  std::vector<Stat> stats;

  std::string to_csv() const {
    std::string out = "metric,count,mean,stddev\n";
    for (const Stat& s : stats) {
      out += s.metric + ',' + std::to_string(s.count) + ',' + detail::format_double(s.mean) +
             ',' + detail::format_double(s.stddev) + '\n';
    }
    return out;
  }

  std::string to_text() const {
    std::ostringstream out;
    out << "metric            count        mean      stddev\n";
    for (const Stat& s : stats) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%-16s %6ld %11.5g %11.5g\n", s.metric.c_str(), s.count,
                    s.mean, s.stddev);
      out << buf;
    }
    return out.str();
  }
};

inline Summary emit_summary(const std::vector<MetricsRow>& rows, long warmup) {
  auto accumulate = [&](auto getter, bool post_warmup_only) {
    long n = 0;
    double mean = 0.0, m2 = 0.0;
    for (const MetricsRow& r : rows) {
      if (post_warmup_only && r.epoch < warmup) continue;
      const std::optional<double> v = getter(r);
      if (!v) continue;
      ++n;
      const double d = *v - mean;
      mean += d / static_cast<double>(n);
      m2 += d * (*v - mean);
    }
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    return Summary::Stat{"", n, mean, std::sqrt(var)};
  };
  Summary summary;
  auto add = [&](const char* name, auto getter, bool post_only) {
    Summary::Stat s = accumulate(getter, post_only);
    s.metric = name;
    summary.stats.push_back(std::move(s));
  };
  add("loss", [](const MetricsRow& r) { return r.loss; }, false);
  add("eta_drl", [](const MetricsRow& r) { return r.eta_drl; }, true);
  add("eta_opt", [](const MetricsRow& r) { return r.eta_opt; }, true);
  add("chi", [](const MetricsRow& r) { return r.chi; }, true);
  return summary;
}

struct EvaluationResult {
  double eta_drl = 0.0;  // mean over realizations
  double eta_opt = 0.0;
  double chi = 0.0;
};

/// Freezes the policy and measures the accuracy rate against exhaustive
/// search over fresh states. `eval_counter` advances the evaluation stream
/// so successive evaluations see new realizations without touching the
/// training streams.
inline EvaluationResult evaluate_policy(const Mlp& net, const TaskGraph& graph,
                                        const PathSet& paths, const ExperimentConfig& config,
                                        long eval_counter) {
  EvaluationResult out;
  for (int r = 0; r < config.eval_realizations; ++r) {
    const std::uint64_t idx =
        static_cast<std::uint64_t>(eval_counter) * static_cast<std::uint64_t>(config.eval_realizations) +
        static_cast<std::uint64_t>(r);
    const EnvState state =
        sample_state(config.env, graph, derive_stream(config.seed, "eval-env", idx));
    const DecideResult drl =
        drl_decide(net, graph, paths, state, config.env, config.drl.candidate_count,
                   config.one_climb, config.critic, derive_stream(config.seed, "eval-gnop", idx));
    const BaselineResult opt = exhaustive(graph, paths, state, config.env, config.exhaustive);
    out.eta_drl += drl.selection.critic.report.eta;
    out.eta_opt += opt.critic.report.eta;
  }
  out.eta_drl /= config.eval_realizations;
  out.eta_opt /= config.eval_realizations;
  out.chi = 1.0 - (out.eta_drl - out.eta_opt) / out.eta_opt;
  return out;
}

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  Summary summary;
  double mean_chi = 0.0;  // over post-warm-up evaluations
  std::string metrics_path;
  std::string checkpoint_path;
};

/// Full training run: epoch loop, periodic training, post-warm-up policy
/// evaluations against exhaustive search, incremental CSV output, final
/// checkpoint and summary. Deterministic for a fixed config and seed.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const TaskGraph graph = load_task_graph(config.graph_path);
  const PathSet paths = enumerate_paths(graph, config.path_cap);

  std::filesystem::create_directories(config.out_dir);
  ExperimentResult result;
  result.metrics_path = config.out_dir + "/metrics.csv";
  result.checkpoint_path = config.out_dir + "/checkpoint.json";
  std::ofstream metrics(result.metrics_path);
  if (!metrics) throw ConfigError("cannot write " + result.metrics_path);
  metrics << kMetricsHeader << '\n';

  std::vector<int> layers;
  layers.push_back(feature_dimension(graph));
  for (int h : config.drl.hidden_layers) layers.push_back(h);
  layers.push_back(graph.real_task_count());
  PolicyState policy(layers, config.drl.learning_rate, config.drl.memory_capacity,
                     derive_stream(config.seed, "init"));

  ActorOptions actor_opts;
  actor_opts.candidate_count = config.drl.candidate_count;
  actor_opts.one_climb = config.one_climb;
  actor_opts.batch_size = config.drl.batch_size;
  actor_opts.train_interval = config.drl.train_interval;
  actor_opts.solve = config.critic;

  std::deque<double> loss_window;
  long eval_counter = 0;
  double chi_sum = 0.0;
  long chi_count = 0;

  for (long epoch = 1; epoch <= config.epochs; ++epoch) {
    const EpochResult er =
        run_epoch(epoch, policy, graph, paths, config.env, config.seed, actor_opts);

    MetricsRow row;
    row.epoch = epoch;
    bool emit = false;
    if (er.loss) {
      emit = true;
      row.loss = er.loss;
      loss_window.push_back(*er.loss);
      if (loss_window.size() > 15) loss_window.pop_front();
      double avg = 0.0;
      for (double l : loss_window) avg += l;
      row.moving_avg_loss = avg / static_cast<double>(loss_window.size());
    }
    const bool eval_due =
        epoch > config.warmup && (epoch - config.warmup - 1) % config.eval_interval == 0;
    if (eval_due) {
      emit = true;
      const EvaluationResult ev =
          evaluate_policy(policy.net, graph, paths, config, eval_counter++);
      row.eta_drl = ev.eta_drl;
      row.eta_opt = ev.eta_opt;
      row.chi = ev.chi;
      chi_sum += ev.chi;
      ++chi_count;
    }
    if (emit) {
      metrics << metrics_row_csv(row) << '\n';
      result.rows.push_back(row);
    }
  }
  metrics.close();

  result.summary = emit_summary(result.rows, config.warmup);
  result.mean_chi = chi_count > 0 ? chi_sum / static_cast<double>(chi_count) : 0.0;
  save_checkpoint(result.checkpoint_path, policy.net, policy.adam, policy.memory);

  std::ofstream summary_csv(config.out_dir + "/summary.csv");
  summary_csv << result.summary.to_csv();
  std::ofstream summary_txt(config.out_dir + "/summary.txt");
  summary_txt << result.summary.to_text();
  return result;
}

struct ComparisonRow {
  int realization = 0;
  std::string method;
  double eta = 0.0;
  double wall_time_s = 0.0;
};

struct MethodSummary {
  std::string method;
  long count = 0;
  double mean_eta = 0.0;
  double mean_wall_time_s = 0.0;
};

struct ComparisonResult {
  std::vector<ComparisonRow> rows;
  std::vector<MethodSummary> summary;
  std::string csv_path;
};

inline constexpr const char* kComparisonHeader = "realization,method,eta,wall_time_s";

/// Benchmarks the trained policy (with and without the one-climb filter)
/// against the configured baselines on fresh realizations. Loads the
/// checkpoint named by the config, or the one left by run_experiment in
/// out_dir, or trains from scratch when neither exists.
inline ComparisonResult compare_methods(const ExperimentConfig& config,
                                        bool include_drl = true) {
  config.validate();
  const TaskGraph graph = load_task_graph(config.graph_path);
  const PathSet paths = enumerate_paths(graph, config.path_cap);

  std::optional<Mlp> net;
  if (include_drl) {
    std::string checkpoint = config.checkpoint;
    if (checkpoint.empty()) {
      const std::string candidate = config.out_dir + "/checkpoint.json";
      if (std::filesystem::exists(candidate)) checkpoint = candidate;
    }
    if (!checkpoint.empty()) {
      net.emplace(load_checkpoint(checkpoint).net);
    } else {
      const ExperimentResult trained = run_experiment(config);
      net.emplace(load_checkpoint(trained.checkpoint_path).net);
    }
    if (net->input_dim() != feature_dimension(graph) ||
        net->output_dim() != graph.real_task_count())
      throw ConfigError("checkpoint does not match the configured graph");
  }

  auto enabled = [&](const std::string& name) {
    for (const std::string& b : config.baselines)
      if (b == name) return true;
    return false;
  };

  ComparisonResult result;
  for (int r = 0; r < config.eval_realizations; ++r) {
    const EnvState state = sample_state(
        config.env, graph, derive_stream(config.seed, "compare-env", static_cast<std::uint64_t>(r)));
    auto add = [&](const std::string& method, double eta, double seconds) {
      result.rows.push_back({r, method, eta, seconds});
    };
    if (net) {
      const std::uint64_t noise =
          derive_stream(config.seed, "compare-gnop", static_cast<std::uint64_t>(r));
      const DecideResult with_filter =
          drl_decide(*net, graph, paths, state, config.env, config.drl.candidate_count,
                     /*one_climb=*/true, config.critic, noise);
      add("drl_oneclimb", with_filter.selection.critic.report.eta, with_filter.seconds);
      const DecideResult plain =
          drl_decide(*net, graph, paths, state, config.env, config.drl.candidate_count,
                     /*one_climb=*/false, config.critic, noise);
      add("drl_gnop", plain.selection.critic.report.eta, plain.seconds);
    }
    if (enabled("exhaustive")) {
      const BaselineResult b = exhaustive(graph, paths, state, config.env, config.exhaustive);
      add(b.name, b.critic.report.eta, b.wall_time_s);
    }
    if (enabled("gibbs")) {
      GibbsOptions g = config.gibbs;
      g.seed = derive_stream(config.seed, "gibbs", static_cast<std::uint64_t>(r));
      const BaselineResult b = gibbs(graph, paths, state, config.env, g);
      add(b.name, b.critic.report.eta, b.wall_time_s);
    }
    if (enabled("all_local")) {
      const BaselineResult b = all_local(graph, paths, state, config.env, config.critic);
      add(b.name, b.critic.report.eta, b.wall_time_s);
    }
    if (enabled("all_edge")) {
      const BaselineResult b = all_edge(graph, paths, state, config.env, config.critic);
      add(b.name, b.critic.report.eta, b.wall_time_s);
    }
  }

  // Per-method means in first-appearance order.
  for (const ComparisonRow& row : result.rows) {
    MethodSummary* entry = nullptr;
    for (MethodSummary& s : result.summary)
      if (s.method == row.method) entry = &s;
    if (!entry) {
      result.summary.push_back({row.method, 0, 0.0, 0.0});
      entry = &result.summary.back();
    }
    ++entry->count;
    entry->mean_eta += row.eta;
    entry->mean_wall_time_s += row.wall_time_s;
  }
  for (MethodSummary& s : result.summary) {
    s.mean_eta /= static_cast<double>(s.count);
    s.mean_wall_time_s /= static_cast<double>(s.count);
  }

  std::filesystem::create_directories(config.out_dir);
  result.csv_path = config.out_dir + "/comparison.csv";
  std::ofstream csv(result.csv_path);
  if (!csv) throw ConfigError("cannot write " + result.csv_path);
  csv << kComparisonHeader << '\n';
  for (const ComparisonRow& row : result.rows)
    csv << row.realization << ',' << row.method << ',' << detail::format_double(row.eta) << ','
        << detail::format_double(row.wall_time_s) << '\n';
  return result;
}

}  // namespace mecoff
