#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mecoff/channel.hpp"
#include "mecoff/errors.hpp"
#include "mecoff/schedule.hpp"
#include "mecoff/task_graph.hpp"

namespace mecoff {

/// Per-path Lagrange multipliers. Feasible iff non-negative and summing to
/// the time weight beta_t.
struct DualVector {
  std::vector<double> lambda;

  double sum() const { return std::accumulate(lambda.begin(), lambda.end(), 0.0); }
};

struct SolveOptions {
  double tol = 1e-6;        // stop when max |lambda change| falls below
  int max_iters = 500;
  double eps0_scale = 0.1;  // base step = eps0_scale * beta_t
};

/// Optional per-iteration trace for diagnostics and property tests.
struct SolveTrace {
  std::vector<double> eta;        // primal objective at each iterate
  std::vector<double> dual_sum;   // sum of multipliers after projection
  std::vector<double> dual_min;   // smallest multiplier after projection
};

struct CriticResult {
  OffloadDecision decision;
  FrequencyAllocation freqs;
  EtcReport report;
  DualVector dual;
  int iterations = 0;
  bool converged = false;
};

/// Euclidean projection onto { x >= 0, sum x = target_sum } by the exact
/// sort-based rule: find the largest prefix of the descending sort whose
/// shifted values stay positive, subtract the corresponding threshold, clamp.
inline std::vector<double> project_simplex(std::vector<double> v, double target_sum) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double prefix = 0.0;
  double theta = 0.0;
  std::size_t rho = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    prefix += u[j];
    const double candidate = (prefix - target_sum) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) {
      rho = j + 1;
      theta = candidate;
    }
  }
  if (rho == 0) theta = (prefix - target_sum) / static_cast<double>(u.size());
  for (double& x : v) x = std::max(x - theta, 0.0);
  return v;
}

/// Closed-form device CPU frequencies for the local tasks under a given
/// dual vector: f_i = min{ cbrt(sum of multipliers over paths through i
/// / (2 kappa beta_e)), f_peak }. Multipliers are floored at 1e-12 so a
/// transiently empty dual never produces a zero frequency.
inline FrequencyAllocation optimal_frequencies(const DualVector& dual, const PathSet& paths,
                                               const TaskGraph& graph,
                                               const OffloadDecision& decision,
                                               const EnvParams& params) {
  constexpr double kLambdaFloor = 1e-12;
  FrequencyAllocation freqs = FrequencyAllocation::uniform(graph.real_task_count(),
                                                           params.f_peak_hz);
  for (int i = 1; i <= graph.real_task_count(); ++i) {
    if (decision.offloaded(i)) continue;
    const auto& member = paths.membership[static_cast<std::size_t>(i)];
    if (member.empty())
      throw EmptyMembership("local task " + std::to_string(i) + " lies on no path");
    double s = 0.0;
    for (int o : member) s += std::max(dual.lambda[static_cast<std::size_t>(o)], kLambdaFloor);
    freqs.f_local[static_cast<std::size_t>(i) - 1] =
        std::min(std::cbrt(s / (2.0 * params.kappa * params.beta_e)), params.f_peak_hz);
  }
  return freqs;
}

/// One multiplier update before projection: lambda_o - step * (T_o - T_max).
inline std::vector<double> subgradient_step(const DualVector& dual,
                                            const std::vector<double>& path_times, double t_max,
                                            double step) {
  if (dual.lambda.size() != path_times.size())
    throw DimensionMismatch("dual and path-time vectors differ in length");
  std::vector<double> out(dual.lambda.size());
  for (std::size_t o = 0; o < out.size(); ++o)
    out[o] = dual.lambda[o] - step * (path_times[o] - t_max);
  return out;
}

/// Minimal energy-time cost for a fixed offloading decision.
///
/// Iterates { frequencies from the dual, path times, dual ascent step,
/// simplex projection } and reports the lowest-cost iterate seen. The step
/// moves multiplier mass toward the binding (longest) paths, i.e. it ascends
/// the concave dual; the step length is normalized by the subgradient norm
/// and diminishes as 1/sqrt(iteration).
inline CriticResult solve(const TaskGraph& graph, const PathSet& paths,
                          const OffloadDecision& decision, const EnvState& state,
                          const EnvParams& params, const SolveOptions& opts = {},
                          SolveTrace* trace = nullptr) {
  const std::size_t n_paths = paths.count();
  if (n_paths == 0) throw BadIndex("path set is empty");

  CriticResult result;
  result.decision = decision;
  result.dual.lambda.assign(n_paths, params.beta_t / static_cast<double>(n_paths));

  // Gather local tasks; everything else about the instance is constant.
  std::vector<int> local_tasks;
  for (int i = 1; i <= graph.real_task_count(); ++i)
    if (!decision.offloaded(i)) local_tasks.push_back(i);

  const auto ctx = detail::make_context(
      graph, decision, FrequencyAllocation::uniform(graph.real_task_count(), params.f_peak_hz),
      state, params);

  // Constant part of each path time (server compute + boundary transfers)
  // and the local tasks each path picks up.
  std::vector<double> base_time(n_paths, 0.0);
  std::vector<std::vector<int>> path_locals(n_paths);
  for (std::size_t o = 0; o < n_paths; ++o) {
    const auto& path = paths.paths[o];
    double t = 0.0;
    for (std::size_t m = 0; m < path.size(); ++m) {
      const int task = path[m];
      if (decision.offloaded(task))
        t += ctx.tau_edge[static_cast<std::size_t>(task)];
      else if (!graph.is_virtual(task))
        path_locals[o].push_back(task);
      if (m > 0) {
        const int prev = path[m - 1];
        const bool prev_off = decision.offloaded(prev);
        const bool cur_off = decision.offloaded(task);
        if (cur_off != prev_off) {
          const std::size_t e = static_cast<std::size_t>(graph.edge_index(prev, task));
          t += cur_off ? ctx.tau_up[e] : ctx.tau_down[e];
        }
      }
    }
    base_time[o] = t;
  }
  double energy_tx = 0.0;
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const DataEdge& ed = graph.edges()[e];
    if (decision.offloaded(ed.to) && !decision.offloaded(ed.from)) energy_tx += ctx.energy_up[e];
  }

  auto evaluate = [&](const FrequencyAllocation& freqs, EtcReport& report) {
    report.per_path_times.assign(n_paths, 0.0);
    report.argmax_path = -1;
    report.completion_s = 0.0;
    for (std::size_t o = 0; o < n_paths; ++o) {
      double t = base_time[o];
      for (int i : path_locals[o])
        t += graph.workload(i) / freqs.f_local[static_cast<std::size_t>(i) - 1];
      report.per_path_times[o] = t;
      if (report.argmax_path < 0 || t > report.completion_s) {
        report.completion_s = t;
        report.argmax_path = static_cast<int>(o);
      }
    }
    double energy = energy_tx;
    for (int i : local_tasks) {
      const double f = freqs.f_local[static_cast<std::size_t>(i) - 1];
      energy += params.kappa * graph.workload(i) * f * f;
    }
    report.energy_j = energy;
    report.eta = params.beta_e * energy + params.beta_t * report.completion_s;
  };

  // No local work: the dual has no effect on the primal, evaluate directly.
  if (local_tasks.empty()) {
    result.freqs = FrequencyAllocation::uniform(graph.real_task_count(), params.f_peak_hz);
    evaluate(result.freqs, result.report);
    result.iterations = 1;
    result.converged = true;
    if (trace) {
      trace->eta.push_back(result.report.eta);
      trace->dual_sum.push_back(result.dual.sum());
      trace->dual_min.push_back(
          *std::min_element(result.dual.lambda.begin(), result.dual.lambda.end()));
    }
    return result;
  }

  DualVector lambda = result.dual;
  double best_eta = std::numeric_limits<double>::infinity();
  const double eps0 = opts.eps0_scale * params.beta_t;

  int iter = 0;
  bool converged = false;
  EtcReport report;
  while (iter < opts.max_iters) {
    ++iter;
    const FrequencyAllocation freqs = optimal_frequencies(lambda, paths, graph, decision, params);
    evaluate(freqs, report);
    if (report.eta < best_eta) {
      best_eta = report.eta;
      result.freqs = freqs;
      result.report = report;
      result.dual = lambda;
    }
    if (trace) {
      trace->eta.push_back(report.eta);
      trace->dual_sum.push_back(lambda.sum());
      trace->dual_min.push_back(
          *std::min_element(lambda.lambda.begin(), lambda.lambda.end()));
    }

    double grad_norm = 0.0;
    for (std::size_t o = 0; o < n_paths; ++o) {
      const double g = report.per_path_times[o] - report.completion_s;
      grad_norm += g * g;
    }
    grad_norm = std::sqrt(grad_norm);
    if (grad_norm == 0.0) {
      converged = true;  // every path is binding; the subgradient vanishes
      break;
    }
    const double step =
        eps0 / ((grad_norm + 1e-12) * std::sqrt(static_cast<double>(iter)));
    // Ascend the dual: mass flows toward the binding paths.
    std::vector<double> proposal =
        subgradient_step(lambda, report.per_path_times, report.completion_s, -step);
    std::vector<double> next = project_simplex(std::move(proposal), params.beta_t);
    double delta = 0.0;
    for (std::size_t o = 0; o < n_paths; ++o)
      delta = std::max(delta, std::abs(next[o] - lambda.lambda[o]));
    lambda.lambda = std::move(next);
    if (delta < opts.tol) {
      converged = true;
      break;
    }
  }

  result.iterations = iter;
  result.converged = converged;
  return result;
}

}  // namespace mecoff
