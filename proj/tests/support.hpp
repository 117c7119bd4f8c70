#pragma once

// Shared helpers for the test suites: compact graph builders and a random
// instance generator used by the property-style checks.

#include <cstdint>
#include <functional>
#include <vector>

#include "mecoff/channel.hpp"
#include "mecoff/rng.hpp"
#include "mecoff/schedule.hpp"
#include "mecoff/task_graph.hpp"

namespace testsupport {

struct EdgeSpec {
  int from, to;
  double kbytes;
};

/// Builds a validated graph from real-task workloads (Mcycles) and explicit
/// edges (KBytes); entry/exit edges for dangling sources and sinks are left
/// to the same synthesis rule the JSON loader uses.
inline mecoff::TaskGraph make_graph(std::vector<double> workload_mcycles,
                                    std::vector<EdgeSpec> edges,
                                    std::vector<EdgeSpec> entry = {},
                                    std::vector<EdgeSpec> exit_edges = {}) {
  const int m = static_cast<int>(workload_mcycles.size());
  std::vector<double> cycles;
  for (double w : workload_mcycles) cycles.push_back(w * mecoff::kCyclesPerMcycle);
  std::vector<mecoff::DataEdge> data_edges;
  for (const EdgeSpec& e : edges)
    data_edges.push_back({e.from, e.to, e.kbytes * mecoff::kBitsPerKByte});
  for (const EdgeSpec& e : entry)
    data_edges.push_back({0, e.to, e.kbytes * mecoff::kBitsPerKByte});
  for (const EdgeSpec& e : exit_edges)
    data_edges.push_back({e.from, m + 1, e.kbytes * mecoff::kBitsPerKByte});

  std::vector<bool> has_pred(static_cast<std::size_t>(m) + 2, false);
  std::vector<bool> has_succ(static_cast<std::size_t>(m) + 2, false);
  for (const mecoff::DataEdge& e : data_edges) {
    has_pred[static_cast<std::size_t>(e.to)] = true;
    has_succ[static_cast<std::size_t>(e.from)] = true;
  }
  for (int i = 1; i <= m; ++i) {
    if (!has_pred[static_cast<std::size_t>(i)]) data_edges.push_back({0, i, 0.0});
    if (!has_succ[static_cast<std::size_t>(i)]) data_edges.push_back({i, m + 1, 0.0});
  }
  mecoff::TaskGraph graph(std::move(cycles), std::move(data_edges));
  graph.validate();
  return graph;
}

/// Simple chain 0 -> 1 -> ... -> M -> M+1 with uniform workloads and sizes.
inline mecoff::TaskGraph make_chain(int m, double workload_mcycles = 100.0,
                                    double kbytes = 100.0) {
  std::vector<double> workloads(static_cast<std::size_t>(m), workload_mcycles);
  std::vector<EdgeSpec> edges;
  for (int i = 1; i < m; ++i) edges.push_back({i, i + 1, kbytes});
  return make_graph(std::move(workloads), std::move(edges), {{0, 1, kbytes}},
                    {{m, 0, kbytes}});
}

/// Diamond 0 -> {1,2} -> 3 -> 4(exit) with M = 3.
inline mecoff::TaskGraph make_diamond() {
  return make_graph({100.0, 120.0, 80.0},
                    {{1, 3, 50.0}, {2, 3, 60.0}},
                    {{0, 1, 70.0}, {0, 2, 40.0}}, {{3, 0, 30.0}});
}

/// Random DAG over 1..max_real tasks. Edges point from lower to higher task
/// index, so the result is acyclic by construction; dangling sources and
/// sinks are tied to the virtual tasks, which makes every task lie on an
/// entry-to-exit path.
inline mecoff::TaskGraph random_graph(mecoff::Prng& rng, int max_real = 10) {
  const int m = static_cast<int>(rng.uniform_int(1, static_cast<std::uint64_t>(max_real)));
  std::vector<double> workloads;
  for (int i = 0; i < m; ++i) workloads.push_back(rng.uniform(20.0, 200.0));
  std::vector<EdgeSpec> edges;
  for (int i = 1; i <= m; ++i)
    for (int j = i + 1; j <= m; ++j)
      if (rng.uniform01() < 0.35) edges.push_back({i, j, rng.uniform(10.0, 1000.0)});
  std::vector<EdgeSpec> entry, exits;
  for (int i = 1; i <= m; ++i) {
    bool pred = false, succ = false;
    for (const EdgeSpec& e : edges) {
      pred = pred || e.to == i;
      succ = succ || e.from == i;
    }
    if (!pred) entry.push_back({0, i, rng.uniform(10.0, 1000.0)});
    if (!succ) exits.push_back({i, 0, rng.uniform(10.0, 1000.0)});
  }
  return make_graph(std::move(workloads), std::move(edges), std::move(entry), std::move(exits));
}

inline mecoff::OffloadDecision random_decision(mecoff::Prng& rng, int m) {
  mecoff::OffloadDecision d = mecoff::OffloadDecision::all_local(m);
  for (auto& bit : d.a) bit = rng.uniform01() < 0.5 ? 1 : 0;
  return d;
}

inline mecoff::FrequencyAllocation random_frequencies(mecoff::Prng& rng, int m, double f_peak) {
  mecoff::FrequencyAllocation f = mecoff::FrequencyAllocation::uniform(m, f_peak);
  for (double& v : f.f_local) v = f_peak * rng.uniform(0.05, 1.0);
  return f;
}

/// Path count by memoized recursion over successors; an oracle independent
/// of the DFS enumeration it checks.
inline long count_paths_recursive(const mecoff::TaskGraph& graph) {
  std::vector<long> memo(static_cast<std::size_t>(graph.task_count()), -1);
  std::function<long(int)> count = [&](int node) -> long {
    if (node == graph.exit_task()) return 1;
    long& m = memo[static_cast<std::size_t>(node)];
    if (m >= 0) return m;
    long total = 0;
    for (int next : graph.successors(node)) total += count(next);
    return m = total;
  };
  return count(graph.entry_task());
}

}  // namespace testsupport
