#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mecoff/errors.hpp"

namespace mecoff {

inline constexpr double kBitsPerKByte = 8192.0;
inline constexpr double kCyclesPerMcycle = 1.0e6;

struct Task {
  int id = 0;
  double workload_cycles = 0.0;  // L_i
};

struct DataEdge {
  int from = 0;
  int to = 0;
  double data_bits = 0.0;  // O_{k,i}
};

/// Application DAG with virtual entry task 0 and exit task M+1.
///
/// Real tasks occupy indices 1..M. The entry and exit tasks carry zero
/// workload and are always executed on the device. Immutable once built;
/// safe to share across threads.
class TaskGraph {
 public:
  TaskGraph(std::vector<double> real_workloads_cycles, std::vector<DataEdge> edges)
      : num_real_(static_cast<int>(real_workloads_cycles.size())), edges_(std::move(edges)) {
    const int n = num_real_ + 2;
    tasks_.resize(n);
    for (int i = 0; i < n; ++i) tasks_[i].id = i;
    for (int i = 1; i <= num_real_; ++i) {
      tasks_[i].workload_cycles = real_workloads_cycles[static_cast<std::size_t>(i) - 1];
      if (tasks_[i].workload_cycles < 0.0)
        throw ConfigError("task " + std::to_string(i) + " has negative workload");
    }
    pred_.resize(n);
    succ_.resize(n);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const DataEdge& ed = edges_[e];
      if (ed.from < 0 || ed.from >= n || ed.to < 0 || ed.to >= n)
        throw ConfigError("edge (" + std::to_string(ed.from) + "," + std::to_string(ed.to) +
                          ") references a task outside 0.." + std::to_string(n - 1));
      if (ed.from == ed.to)
        throw ConfigError("self-edge on task " + std::to_string(ed.from));
      if (ed.data_bits < 0.0)
        throw ConfigError("edge (" + std::to_string(ed.from) + "," + std::to_string(ed.to) +
                          ") has negative data size");
      if (edge_index_.count({ed.from, ed.to}))
        throw ConfigError("duplicate edge (" + std::to_string(ed.from) + "," +
                          std::to_string(ed.to) + ")");
      edge_index_[{ed.from, ed.to}] = static_cast<int>(e);
      succ_[ed.from].push_back(ed.to);
      pred_[ed.to].push_back(ed.from);
    }
    for (auto& v : pred_) std::sort(v.begin(), v.end());
    for (auto& v : succ_) std::sort(v.begin(), v.end());
  }

  int real_task_count() const { return num_real_; }
  int task_count() const { return num_real_ + 2; }
  int entry_task() const { return 0; }
  int exit_task() const { return num_real_ + 1; }
  bool is_virtual(int i) const { return i == 0 || i == exit_task(); }

  double workload(int i) const {
    check_index(i);
    return tasks_[i].workload_cycles;
  }

  const std::vector<DataEdge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  const std::vector<int>& predecessors(int i) const {
    check_index(i);
    return pred_[i];
  }
  const std::vector<int>& successors(int i) const {
    check_index(i);
    return succ_[i];
  }

  /// Index of edge (k, i) into edges(), or -1 when absent.
  int edge_index(int k, int i) const {
    auto it = edge_index_.find({k, i});
    return it == edge_index_.end() ? -1 : it->second;
  }

  double edge_bits(int k, int i) const {
    const int e = edge_index(k, i);
    if (e < 0)
      throw BadIndex("no edge (" + std::to_string(k) + "," + std::to_string(i) + ")");
    return edges_[static_cast<std::size_t>(e)].data_bits;
  }

  /// Checks every structural invariant; throws on the first violation.
  void validate() const {
    const int n = task_count();
    if (!pred_[0].empty())
      throw BadVirtualTask("entry task 0 has predecessor " + std::to_string(pred_[0][0]));
    if (!succ_[exit_task()].empty())
      throw BadVirtualTask("exit task " + std::to_string(exit_task()) + " has successor " +
                           std::to_string(succ_[exit_task()][0]));
    if (tasks_[0].workload_cycles != 0.0 || tasks_[exit_task()].workload_cycles != 0.0)
      throw BadVirtualTask("virtual tasks must carry zero workload");

    // Kahn's algorithm; any node never drained sits on or behind a cycle.
    std::vector<int> indeg(n);
    for (int i = 0; i < n; ++i) indeg[i] = static_cast<int>(pred_[i].size());
    std::vector<int> queue;
    for (int i = 0; i < n; ++i)
      if (indeg[i] == 0) queue.push_back(i);
    std::size_t head = 0;
    int drained = 0;
    while (head < queue.size()) {
      const int u = queue[head++];
      ++drained;
      for (int v : succ_[u])
        if (--indeg[v] == 0) queue.push_back(v);
    }
    if (drained != n) {
      for (int i = 0; i < n; ++i)
        if (indeg[i] > 0) throw CyclicGraph("cycle detected involving task " + std::to_string(i));
    }

    const std::vector<bool> fwd = reach_from(0, /*forward=*/true);
    const std::vector<bool> bwd = reach_from(exit_task(), /*forward=*/false);
    for (int i = 1; i <= num_real_; ++i) {
      if (!fwd[i])
        throw DisconnectedTask("task " + std::to_string(i) + " unreachable from entry");
      if (!bwd[i])
        throw DisconnectedTask("task " + std::to_string(i) + " cannot reach exit");
    }
  }

  /// Topological order (entry first, exit last). Requires an acyclic graph.
  std::vector<int> topological_order() const {
    const int n = task_count();
    std::vector<int> indeg(n), order;
    order.reserve(n);
    for (int i = 0; i < n; ++i) indeg[i] = static_cast<int>(pred_[i].size());
    std::vector<int> queue;
    for (int i = 0; i < n; ++i)
      if (indeg[i] == 0) queue.push_back(i);
    std::size_t head = 0;
    while (head < queue.size()) {
      const int u = queue[head++];
      order.push_back(u);
      for (int v : succ_[u])
        if (--indeg[v] == 0) queue.push_back(v);
    }
    if (static_cast<int>(order.size()) != n) throw CyclicGraph("graph contains a cycle");
    return order;
  }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= task_count())
      throw BadIndex("task index " + std::to_string(i) + " out of range 0.." +
                     std::to_string(task_count() - 1));
  }

  std::vector<bool> reach_from(int start, bool forward) const {
    std::vector<bool> seen(static_cast<std::size_t>(task_count()), false);
    std::vector<int> stack{start};
    seen[static_cast<std::size_t>(start)] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : forward ? succ_[u] : pred_[u]) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = true;
          stack.push_back(v);
        }
      }
    }
    return seen;
  }

  int num_real_;
  std::vector<Task> tasks_;
  std::vector<DataEdge> edges_;
  std::vector<std::vector<int>> pred_, succ_;
  std::map<std::pair<int, int>, int> edge_index_;
};

/// All loop-free entry-to-exit paths plus per-task membership sets.
struct PathSet {
  std::vector<std::vector<int>> paths;       // each starts at 0, ends at M+1
  std::vector<std::vector<int>> membership;  // membership[i] = paths containing task i

  std::size_t count() const { return paths.size(); }
};

/// Enumerates every loop-free path from entry to exit in deterministic
/// (lexicographic) order. A DAG where every task reaches the exit has no
/// dead ends, so plain DFS emits each path exactly once.
inline PathSet enumerate_paths(const TaskGraph& graph, std::size_t cap = 10000) {
  PathSet out;
  std::vector<int> current{graph.entry_task()};
  // Explicit stack of (node, next-successor-position) frames.
  std::vector<std::pair<int, std::size_t>> frames{{graph.entry_task(), 0}};
  while (!frames.empty()) {
    auto& [node, pos] = frames.back();
    if (node == graph.exit_task()) {
      if (out.paths.size() >= cap)
        throw PathExplosion("path count exceeds cap " + std::to_string(cap));
      out.paths.push_back(current);
      frames.pop_back();
      current.pop_back();
      continue;
    }
    const auto& succ = graph.successors(node);
    if (pos < succ.size()) {
      const int next = succ[pos++];
      frames.emplace_back(next, 0);
      current.push_back(next);
    } else {
      frames.pop_back();
      current.pop_back();
    }
  }
  out.membership.resize(static_cast<std::size_t>(graph.task_count()));
  for (std::size_t o = 0; o < out.paths.size(); ++o)
    for (int task : out.paths[o])
      out.membership[static_cast<std::size_t>(task)].push_back(static_cast<int>(o));
  return out;
}

/// Loads a task graph from the JSON file format:
///   { "tasks": [{"id":1,"workload_mcycles":60.5}, ...],
///     "edges": [{"from":1,"to":5,"kbytes":120}, ...],
///     "entry_inputs": [{"to":1,"kbytes":450}, ...],
///     "exit_outputs": [{"from":8,"kbytes":110}, ...] }
/// Task ids must be 1..M. Entry/exit edges are synthesized for every listed
/// input/output; any source or sink left without one gets a zero-size edge
/// so the virtual tasks bracket the whole application.
inline TaskGraph task_graph_from_json(const nlohmann::json& j) {
  if (!j.contains("tasks") || !j["tasks"].is_array() || j["tasks"].empty())
    throw ConfigError("graph file needs a non-empty 'tasks' array");
  const int m = static_cast<int>(j["tasks"].size());
  std::vector<double> workloads(static_cast<std::size_t>(m), -1.0);
  for (const auto& t : j["tasks"]) {
    const int id = t.at("id").get<int>();
    if (id < 1 || id > m)
      throw ConfigError("task id " + std::to_string(id) + " outside 1.." + std::to_string(m));
    if (workloads[static_cast<std::size_t>(id) - 1] >= 0.0)
      throw ConfigError("duplicate task id " + std::to_string(id));
    workloads[static_cast<std::size_t>(id) - 1] =
        t.at("workload_mcycles").get<double>() * kCyclesPerMcycle;
  }

  std::vector<DataEdge> edges;
  auto push_edge = [&edges](int from, int to, double kbytes) {
    edges.push_back({from, to, kbytes * kBitsPerKByte});
  };
  if (j.contains("edges"))
    for (const auto& e : j["edges"])
      push_edge(e.at("from").get<int>(), e.at("to").get<int>(), e.at("kbytes").get<double>());
  if (j.contains("entry_inputs"))
    for (const auto& e : j["entry_inputs"])
      push_edge(0, e.at("to").get<int>(), e.at("kbytes").get<double>());
  if (j.contains("exit_outputs"))
    for (const auto& e : j["exit_outputs"])
      push_edge(e.at("from").get<int>(), m + 1, e.at("kbytes").get<double>());

  // Remaining sources/sinks among real tasks get zero-size virtual edges.
  std::vector<bool> has_pred(static_cast<std::size_t>(m) + 2, false);
  std::vector<bool> has_succ(static_cast<std::size_t>(m) + 2, false);
  for (const DataEdge& e : edges) {
    if (e.to >= 0 && e.to <= m + 1) has_pred[static_cast<std::size_t>(e.to)] = true;
    if (e.from >= 0 && e.from <= m + 1) has_succ[static_cast<std::size_t>(e.from)] = true;
  }
  for (int i = 1; i <= m; ++i) {
    if (!has_pred[static_cast<std::size_t>(i)]) edges.push_back({0, i, 0.0});
    if (!has_succ[static_cast<std::size_t>(i)]) edges.push_back({i, m + 1, 0.0});
  }

  TaskGraph graph(std::move(workloads), std::move(edges));
  graph.validate();
  return graph;
}

inline TaskGraph load_task_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw ConfigError("graph file " + path + " is not valid JSON: " + ex.what());
  }
  return task_graph_from_json(j);
}

}  // namespace mecoff
