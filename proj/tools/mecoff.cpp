// Command-line harness for training, evaluating and benchmarking DAG
// task-offloading policies. See README.md for the config file format.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mecoff/actor.hpp"
#include "mecoff/config.hpp"
#include "mecoff/harness.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string graph;
  std::string out_dir;
  std::string checkpoint;
  std::uint64_t seed = 0;
  bool have_seed = false;
  bool no_one_climb = false;
  std::vector<std::string> baselines;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config file (JSON)")->required();
  cmd->add_option("--graph", flags.graph, "override the task-graph file");
  cmd->add_option("--out-dir", flags.out_dir, "override the output directory");
  cmd->add_option("--checkpoint", flags.checkpoint, "policy checkpoint to load");
  cmd->add_option("--seed", flags.seed, "override the experiment seed")
      ->each([&flags](const std::string&) { flags.have_seed = true; });
  cmd->add_flag("--no-one-climb", flags.no_one_climb, "disable the one-climb candidate filter");
  cmd->add_option("--baselines", flags.baselines,
                  "baselines to run (exhaustive gibbs all_local all_edge)");
}

mecoff::ExperimentConfig make_config(const CommonFlags& flags) {
  mecoff::ExperimentConfig config = mecoff::load_experiment_config(flags.config_path);
  if (!flags.graph.empty()) config.graph_path = flags.graph;
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (!flags.checkpoint.empty()) config.checkpoint = flags.checkpoint;
  if (flags.have_seed) config.seed = flags.seed;
  if (flags.no_one_climb) config.one_climb = false;
  if (!flags.baselines.empty()) config.baselines = flags.baselines;
  return config;
}

int run_train(const CommonFlags& flags) {
  const mecoff::ExperimentConfig config = make_config(flags);
  const mecoff::ExperimentResult result = mecoff::run_experiment(config);
  std::cout << result.summary.to_text();
  std::printf("mean accuracy rate (post warm-up): %.6f\n", result.mean_chi);
  std::printf("metrics: %s\ncheckpoint: %s\n", result.metrics_path.c_str(),
              result.checkpoint_path.c_str());
  return 0;
}

int run_eval(const CommonFlags& flags) {
  mecoff::ExperimentConfig config = make_config(flags);
  config.validate();
  const mecoff::TaskGraph graph = mecoff::load_task_graph(config.graph_path);
  const mecoff::PathSet paths = mecoff::enumerate_paths(graph, config.path_cap);
  std::string checkpoint = config.checkpoint;
  if (checkpoint.empty()) checkpoint = config.out_dir + "/checkpoint.json";
  const mecoff::Mlp net = mecoff::load_checkpoint(checkpoint).net;
  const mecoff::EvaluationResult ev =
      mecoff::evaluate_policy(net, graph, paths, config, /*eval_counter=*/0);
  std::printf("realizations: %d\nmean eta (policy):     %.6g\n", config.eval_realizations,
              ev.eta_drl);
  std::printf("mean eta (exhaustive): %.6g\naccuracy rate chi:     %.6f\n", ev.eta_opt, ev.chi);
  return 0;
}

int run_compare(const CommonFlags& flags, bool no_drl) {
  const mecoff::ExperimentConfig config = make_config(flags);
  const mecoff::ComparisonResult result = mecoff::compare_methods(config, !no_drl);
  std::printf("%-14s %6s %12s %14s\n", "method", "runs", "mean eta", "mean time (s)");
  for (const mecoff::MethodSummary& s : result.summary)
    std::printf("%-14s %6ld %12.6g %14.6g\n", s.method.c_str(), s.count, s.mean_eta,
                s.mean_wall_time_s);
  std::printf("rows written to %s\n", result.csv_path.c_str());
  return 0;
}

int run_diagnose(const CommonFlags& flags, int states) {
  mecoff::ExperimentConfig config = make_config(flags);
  config.validate();
  const mecoff::TaskGraph graph = mecoff::load_task_graph(config.graph_path);
  const mecoff::PathSet paths = mecoff::enumerate_paths(graph, config.path_cap);
  const mecoff::OneClimbDiagnostic diag = mecoff::one_climb_conditions_report(
      graph, paths, config.env, states, mecoff::derive_stream(config.seed, "diagnose"));
  std::printf("states sampled:        %d\n", diag.states);
  std::printf("overlap segments:      %d\n", diag.segments_checked);
  std::printf("conditions satisfied:  %.4f of states\n", diag.satisfied_fraction);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint task-offloading and CPU-frequency optimization for DAG "
               "applications on a mobile device with an edge server"};
  app.require_subcommand(1);

  CommonFlags train_flags, eval_flags, compare_flags, diag_flags;
  CLI::App* train = app.add_subcommand("train", "train a policy and write metrics");
  add_common(train, train_flags);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a trained policy against exhaustive");
  add_common(eval, eval_flags);

  bool no_drl = false;
  CLI::App* compare = app.add_subcommand("compare", "benchmark methods on fresh realizations");
  add_common(compare, compare_flags);
  compare->add_flag("--no-drl", no_drl, "skip the learned policy, run baselines only");

  int diag_states = 100;
  CLI::App* diagnose =
      app.add_subcommand("diagnose-oneclimb", "check the one-climb optimality conditions");
  add_common(diagnose, diag_flags);
  diagnose->add_option("--states", diag_states, "number of sampled channel states");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return run_train(train_flags);
    if (eval->parsed()) return run_eval(eval_flags);
    if (compare->parsed()) return run_compare(compare_flags, no_drl);
    if (diagnose->parsed()) return run_diagnose(diag_flags, diag_states);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
