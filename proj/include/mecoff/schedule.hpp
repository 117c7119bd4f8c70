#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mecoff/channel.hpp"
#include "mecoff/errors.hpp"
#include "mecoff/task_graph.hpp"

namespace mecoff {

/// Binary offloading decision over the M real tasks; virtual tasks are
/// always local. a[i-1] == 1 means task i runs on the edge server.
struct OffloadDecision {
  std::vector<std::uint8_t> a;

  static OffloadDecision all_local(int m) { return {std::vector<std::uint8_t>(m, 0)}; }
  static OffloadDecision all_edge(int m) { return {std::vector<std::uint8_t>(m, 1)}; }

  bool offloaded(int task) const {
    if (task < 1 || task > static_cast<int>(a.size())) return false;  // virtual tasks
    return a[static_cast<std::size_t>(task) - 1] != 0;
  }
};

/// Device CPU frequencies for the M real tasks; entries of offloaded tasks
/// are ignored by every evaluation routine.
struct FrequencyAllocation {
  std::vector<double> f_local;

  static FrequencyAllocation uniform(int m, double f) {
    return {std::vector<double>(static_cast<std::size_t>(m), f)};
  }
};

/// Energy-time cost together with its decomposition.
struct EtcReport {
  double eta = 0.0;           // beta_e * energy + beta_t * completion
  double energy_j = 0.0;
  double completion_s = 0.0;  // max over path times
  std::vector<double> per_path_times;
  int argmax_path = -1;
};

namespace detail {

/// Per-instance execution and transmission times, computed once and shared
/// by the path/recursive/energy evaluators.
struct EvalContext {
  std::vector<double> tau_local;   // per task; +inf marks an unusable device run
  std::vector<double> tau_edge;    // per task
  std::vector<double> tau_up;      // per edge
  std::vector<double> tau_down;    // per edge
  std::vector<double> energy_up;   // per edge
};

inline EvalContext make_context(const TaskGraph& graph, const OffloadDecision& decision,
                                const FrequencyAllocation& freqs, const EnvState& state,
                                const EnvParams& params) {
  if (static_cast<int>(decision.a.size()) != graph.real_task_count())
    throw DimensionMismatch("decision length " + std::to_string(decision.a.size()) +
                            " != real task count " + std::to_string(graph.real_task_count()));
  if (static_cast<int>(freqs.f_local.size()) != graph.real_task_count())
    throw DimensionMismatch("frequency vector length mismatch");
  if (state.h_up.size() != graph.edge_count() || state.h_down.size() != graph.edge_count())
    throw DimensionMismatch("environment state does not match graph edges");

  EvalContext ctx;
  const int n = graph.task_count();
  ctx.tau_local.resize(static_cast<std::size_t>(n), 0.0);
  ctx.tau_edge.resize(static_cast<std::size_t>(n), 0.0);
  for (int i = 1; i <= graph.real_task_count(); ++i) {
    const double load = graph.workload(i);
    const double f = freqs.f_local[static_cast<std::size_t>(i) - 1];
    if (!decision.offloaded(i)) {
      if (!(f > 0.0))
        throw ZeroFrequency("local task " + std::to_string(i) + " has non-positive frequency");
      ctx.tau_local[static_cast<std::size_t>(i)] = load / f;
    } else {
      // Never used by the indicators below, but kept finite-or-inf for safety.
      ctx.tau_local[static_cast<std::size_t>(i)] =
          f > 0.0 ? load / f : std::numeric_limits<double>::infinity();
    }
    ctx.tau_edge[static_cast<std::size_t>(i)] = load / state.f_edge_hz;
  }

  ctx.tau_up.reserve(graph.edge_count());
  ctx.tau_down.reserve(graph.edge_count());
  ctx.energy_up.reserve(graph.edge_count());
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const double bits = graph.edges()[e].data_bits;
    const TxCost up = tx_time_energy(params, bits, uplink_rate(params, state.h_up[e]),
                                     TxDirection::up);
    const TxCost down = tx_time_energy(params, bits, downlink_rate(params, state.h_down[e]),
                                       TxDirection::down);
    ctx.tau_up.push_back(up.time_s);
    ctx.tau_down.push_back(down.time_s);
    ctx.energy_up.push_back(up.energy_j);
  }
  return ctx;
}

inline double path_time_from_context(const TaskGraph& graph, const std::vector<int>& path,
                                     const OffloadDecision& decision, const EvalContext& ctx) {
  double t = 0.0;
  for (std::size_t m = 0; m < path.size(); ++m) {
    const int task = path[m];
    t += decision.offloaded(task) ? ctx.tau_edge[static_cast<std::size_t>(task)]
                                  : ctx.tau_local[static_cast<std::size_t>(task)];
    if (m == 0) continue;
    const int prev = path[m - 1];
    const bool prev_off = decision.offloaded(prev);
    const bool cur_off = decision.offloaded(task);
    if (cur_off != prev_off) {
      const int e = graph.edge_index(prev, task);
      t += cur_off ? ctx.tau_up[static_cast<std::size_t>(e)]
                   : ctx.tau_down[static_cast<std::size_t>(e)];
    }
  }
  return t;
}

inline double total_energy_from_context(const TaskGraph& graph, const OffloadDecision& decision,
                                        const FrequencyAllocation& freqs, const EvalContext& ctx,
                                        const EnvParams& params) {
  double e = 0.0;
  for (int i = 1; i <= graph.real_task_count(); ++i) {
    if (decision.offloaded(i)) continue;
    const double f = freqs.f_local[static_cast<std::size_t>(i) - 1];
    e += params.kappa * graph.workload(i) * f * f;
  }
  for (std::size_t idx = 0; idx < graph.edge_count(); ++idx) {
    const DataEdge& ed = graph.edges()[idx];
    if (decision.offloaded(ed.to) && !decision.offloaded(ed.from)) e += ctx.energy_up[idx];
  }
  return e;
}

}  // namespace detail

/// Total compute plus boundary-transmission delay along one path, excluding
/// waits for data arriving from other paths.
inline double path_time(const TaskGraph& graph, const PathSet& paths, std::size_t o,
                        const OffloadDecision& decision, const FrequencyAllocation& freqs,
                        const EnvState& state, const EnvParams& params) {
  if (o >= paths.count()) throw BadIndex("path index out of range");
  const auto ctx = detail::make_context(graph, decision, freqs, state, params);
  return detail::path_time_from_context(graph, paths.paths[o], decision, ctx);
}

/// Application completion time from the ready/finish-time recursion, walking
/// tasks in topological order. Both device-side and server-side times are
/// tracked for every task; which one a successor reads depends only on the
/// predecessor's placement.
inline double finish_time_recursive(const TaskGraph& graph, const OffloadDecision& decision,
                                    const FrequencyAllocation& freqs, const EnvState& state,
                                    const EnvParams& params) {
  const auto ctx = detail::make_context(graph, decision, freqs, state, params);
  const int n = graph.task_count();
  std::vector<double> ft_local(static_cast<std::size_t>(n), 0.0);
  std::vector<double> ft_edge(static_cast<std::size_t>(n), 0.0);
  for (int i : graph.topological_order()) {
    double rt_local = 0.0;
    double rt_edge = 0.0;
    for (int k : graph.predecessors(i)) {
      const std::size_t e = static_cast<std::size_t>(graph.edge_index(k, i));
      double arrive_local, arrive_edge;
      if (decision.offloaded(k)) {
        arrive_local = ft_edge[static_cast<std::size_t>(k)] + ctx.tau_down[e];
        arrive_edge = ft_edge[static_cast<std::size_t>(k)];
      } else {
        arrive_local = ft_local[static_cast<std::size_t>(k)];
        arrive_edge = ft_local[static_cast<std::size_t>(k)] + ctx.tau_up[e];
      }
      rt_local = std::max(rt_local, arrive_local);
      rt_edge = std::max(rt_edge, arrive_edge);
    }
    ft_local[static_cast<std::size_t>(i)] = rt_local + ctx.tau_local[static_cast<std::size_t>(i)];
    ft_edge[static_cast<std::size_t>(i)] = rt_edge + ctx.tau_edge[static_cast<std::size_t>(i)];
  }
  return ft_local[static_cast<std::size_t>(graph.exit_task())];
}

/// Device energy: local computation plus uplink transmissions. Downlink
/// energy is paid by the access point and never appears here.
inline double total_energy(const TaskGraph& graph, const OffloadDecision& decision,
                           const FrequencyAllocation& freqs, const EnvState& state,
                           const EnvParams& params) {
  const auto ctx = detail::make_context(graph, decision, freqs, state, params);
  return detail::total_energy_from_context(graph, decision, freqs, ctx, params);
}

/// Full energy-time cost report for one (decision, frequency) pair.
inline EtcReport etc(const TaskGraph& graph, const PathSet& paths,
                     const OffloadDecision& decision, const FrequencyAllocation& freqs,
                     const EnvState& state, const EnvParams& params) {
  const auto ctx = detail::make_context(graph, decision, freqs, state, params);
  EtcReport report;
  report.per_path_times.reserve(paths.count());
  for (std::size_t o = 0; o < paths.count(); ++o) {
    const double t = detail::path_time_from_context(graph, paths.paths[o], decision, ctx);
    report.per_path_times.push_back(t);
    if (report.argmax_path < 0 || t > report.completion_s) {
      report.completion_s = t;
      report.argmax_path = static_cast<int>(o);
    }
  }
  report.energy_j = detail::total_energy_from_context(graph, decision, freqs, ctx, params);
  report.eta = params.beta_e * report.energy_j + params.beta_t * report.completion_s;
  return report;
}

}  // namespace mecoff
