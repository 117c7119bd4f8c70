#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "mecoff/channel.hpp"
#include "mecoff/critic.hpp"
#include "mecoff/errors.hpp"
#include "mecoff/mlp.hpp"
#include "mecoff/rng.hpp"
#include "mecoff/schedule.hpp"
#include "mecoff/task_graph.hpp"

namespace mecoff {

/// Network input for one environment state: log10 of every uplink gain,
/// then log10 of every downlink gain (both in TaskGraph edge order), then
/// the edge CPU frequency scaled to [0, 1] over its configured range.
inline std::vector<double> featurize(const EnvState& state, const TaskGraph& graph,
                                     const EnvParams& params) {
  if (state.h_up.size() != graph.edge_count() || state.h_down.size() != graph.edge_count())
    throw DimensionMismatch("environment state does not match graph edges");
  std::vector<double> features;
  features.reserve(2 * graph.edge_count() + 1);
  for (double h : state.h_up) features.push_back(std::log10(h));
  for (double h : state.h_down) features.push_back(std::log10(h));
  const double span = params.f_edge_max_hz - params.f_edge_min_hz;
  features.push_back(span > 0.0 ? (state.f_edge_hz - params.f_edge_min_hz) / span : 0.0);
  return features;
}

inline int feature_dimension(const TaskGraph& graph) {
  return static_cast<int>(2 * graph.edge_count() + 1);
}

/// Candidate binary actions with the branch each one came from.
struct CandidateSet {
  enum class Provenance { order_preserving, noise_branch };
  std::vector<std::vector<std::uint8_t>> actions;
  std::vector<Provenance> provenance;

  std::size_t size() const { return actions.size(); }
};

/// Order-preserving quantization. The first action thresholds at 0.5; the
/// b-th action thresholds at the (b-1)-th entry of the relaxed action when
/// ordered by distance to 0.5, with entries equal to the threshold rounded
/// away from it (toward 1 below 0.5, toward 0 above). Entries ordering ties
/// in distance are broken by index so the output is deterministic.
inline std::vector<std::vector<std::uint8_t>> order_preserving_quantize(
    std::span<const double> relaxed, int count) {
  const int m = static_cast<int>(relaxed.size());
  if (count < 1) throw CountTooLarge("quantizer count must be >= 1");
  if (count > m + 1)
    throw CountTooLarge("quantizer count " + std::to_string(count) + " exceeds " +
                        std::to_string(m + 1));
  std::vector<std::vector<std::uint8_t>> actions;
  actions.reserve(static_cast<std::size_t>(count));

  std::vector<std::uint8_t> first(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) first[static_cast<std::size_t>(i)] = relaxed[i] > 0.5 ? 1 : 0;
  actions.push_back(std::move(first));

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = std::abs(relaxed[a] - 0.5);
    const double db = std::abs(relaxed[b] - 0.5);
    return da != db ? da < db : a < b;
  });

  for (int b = 2; b <= count; ++b) {
    const double threshold = relaxed[order[static_cast<std::size_t>(b) - 2]];
    std::vector<std::uint8_t> action(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const double v = relaxed[i];
      std::uint8_t bit;
      if (v > threshold)
        bit = 1;
      else if (v < threshold)
        bit = 0;
      else
        bit = threshold < 0.5 ? 1 : 0;
      action[static_cast<std::size_t>(i)] = bit;
    }
    actions.push_back(std::move(action));
  }
  return actions;
}

namespace detail {

struct ActionHash {
  std::size_t operator()(const std::vector<std::uint8_t>& a) const {
    std::size_t h = 1469598103934665603ull;
    for (std::uint8_t b : a) {
      h ^= b;
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace detail

/// Gaussian noise-added order-preserving quantization with an explicit noise
/// vector; the seeded overload below is the normal entry point.
inline CandidateSet gnop_quantize_with_noise(std::span<const double> relaxed, int count,
                                             std::span<const double> noise) {
  if (count < 2 || count % 2 != 0) throw CountTooLarge("candidate count must be even and >= 2");
  if (noise.size() != relaxed.size())
    throw DimensionMismatch("noise vector length does not match action length");
  const int half = count / 2;
  CandidateSet out;
  std::unordered_set<std::vector<std::uint8_t>, detail::ActionHash> seen;
  auto push = [&](std::vector<std::uint8_t>&& action, CandidateSet::Provenance prov) {
    if (seen.insert(action).second) {
      out.actions.push_back(std::move(action));
      out.provenance.push_back(prov);
    }
  };
  for (auto& a : order_preserving_quantize(relaxed, std::min(half, static_cast<int>(relaxed.size()) + 1)))
    push(std::move(a), CandidateSet::Provenance::order_preserving);
  std::vector<double> jittered(relaxed.size());
  for (std::size_t i = 0; i < relaxed.size(); ++i) jittered[i] = logistic(relaxed[i] + noise[i]);
  for (auto& a : order_preserving_quantize(jittered, std::min(half, static_cast<int>(relaxed.size()) + 1)))
    push(std::move(a), CandidateSet::Provenance::noise_branch);
  return out;
}

inline CandidateSet gnop_quantize(std::span<const double> relaxed, int count, Prng& rng) {
  std::vector<double> noise(relaxed.size());
  for (double& n : noise) n = rng.normal();
  return gnop_quantize_with_noise(relaxed, count, noise);
}

/// True when, on every path, execution migrates from the device to the
/// server at most once (at most one 0->1 transition in the padded
/// device/server pattern along the path).
inline bool satisfies_one_climb(const std::vector<std::uint8_t>& action, const PathSet& paths) {
  for (const auto& path : paths.paths) {
    int climbs = 0;
    bool prev = false;  // virtual entry runs on the device
    for (std::size_t m = 1; m + 1 < path.size(); ++m) {
      const bool cur = action[static_cast<std::size_t>(path[m]) - 1] != 0;
      if (cur && !prev && ++climbs > 1) return false;
      prev = cur;
    }
  }
  return true;
}

/// Drops candidates that violate the one-climb policy. An empty result
/// falls back to the all-local action, which satisfies the policy on every
/// graph and always has finite cost.
inline CandidateSet one_climb_filter(const CandidateSet& candidates, const PathSet& paths) {
  CandidateSet out;
  for (std::size_t i = 0; i < candidates.actions.size(); ++i) {
    if (satisfies_one_climb(candidates.actions[i], paths)) {
      out.actions.push_back(candidates.actions[i]);
      out.provenance.push_back(candidates.provenance[i]);
    }
  }
  if (out.actions.empty() && !candidates.actions.empty()) {
    out.actions.push_back(
        std::vector<std::uint8_t>(candidates.actions.front().size(), 0));
    out.provenance.push_back(CandidateSet::Provenance::order_preserving);
  }
  return out;
}

struct Selection {
  std::size_t index = 0;
  OffloadDecision action;
  CriticResult critic;
  std::vector<double> candidate_etas;
};

/// Scores every candidate with the analytic critic and returns the lowest
/// cost one; ties go to the lowest candidate index.
inline Selection select_action(const CandidateSet& candidates, const TaskGraph& graph,
                               const PathSet& paths, const EnvState& state,
                               const EnvParams& params, const SolveOptions& solve_opts = {}) {
  if (candidates.actions.empty()) throw BadIndex("candidate set is empty");
  Selection sel;
  bool have = false;
  for (std::size_t b = 0; b < candidates.actions.size(); ++b) {
    OffloadDecision decision{candidates.actions[b]};
    CriticResult res = solve(graph, paths, decision, state, params, solve_opts);
    sel.candidate_etas.push_back(res.report.eta);
    if (!have || res.report.eta < sel.critic.report.eta) {
      have = true;
      sel.index = b;
      sel.action = decision;
      sel.critic = std::move(res);
    }
  }
  return sel;
}

/// Fixed-capacity FIFO buffer of (features, best action) training pairs.
class ReplayMemory {
 public:
  struct Entry {
    std::vector<double> features;
    std::vector<std::uint8_t> action;
  };

  explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t write_cursor() const { return cursor_; }
  const Entry& entry(std::size_t i) const { return entries_[i]; }

  /// Restores the overwrite position after deserialization.
  void set_write_cursor(std::size_t cursor) {
    if (cursor >= capacity_ || (entries_.size() < capacity_ && cursor != entries_.size()))
      throw ConfigError("replay cursor inconsistent with memory contents");
    cursor_ = cursor;
  }

  void push(std::vector<double> features, std::vector<std::uint8_t> action) {
    if (entries_.size() < capacity_) {
      entries_.push_back({std::move(features), std::move(action)});
    } else {
      entries_[cursor_] = {std::move(features), std::move(action)};
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  /// Uniform sample of `count` distinct entry indices.
  std::vector<std::size_t> sample_indices(std::size_t count, Prng& rng) const {
    if (count > entries_.size())
      throw InsufficientData("batch of " + std::to_string(count) + " from memory of " +
                             std::to_string(entries_.size()));
    std::vector<std::size_t> pool(entries_.size());
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(
                                    rng.uniform_int(0, pool.size() - 1 - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
  }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Entry> entries_;
};

/// One Adam update on a uniformly sampled batch; returns the batch loss.
inline double train_step(Mlp& net, Adam& adam, const ReplayMemory& memory,
                         std::size_t batch_size, Prng& rng) {
  if (memory.size() < batch_size)
    throw InsufficientData("memory holds " + std::to_string(memory.size()) +
                           " samples, batch needs " + std::to_string(batch_size));
  const std::vector<std::size_t> picks = memory.sample_indices(batch_size, rng);
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<std::uint8_t>> targets;
  inputs.reserve(picks.size());
  targets.reserve(picks.size());
  for (std::size_t i : picks) {
    inputs.push_back(memory.entry(i).features);
    targets.push_back(memory.entry(i).action);
  }
  std::vector<double> grad;
  const double loss = net.loss_and_gradient(inputs, targets, grad);
  adam.step(net.params(), grad);
  return loss;
}

struct ActorOptions {
  int candidate_count = 16;     // B
  bool one_climb = true;
  std::size_t batch_size = 128;
  int train_interval = 10;      // delta
  SolveOptions solve;
};

/// Mutable learning state threaded through the epoch loop.
struct PolicyState {
  Mlp net;
  Adam adam;
  ReplayMemory memory;

  PolicyState(std::vector<int> layer_sizes, double learning_rate, std::size_t memory_capacity,
              std::uint64_t init_seed)
      : net(std::move(layer_sizes)), adam(0, learning_rate), memory(memory_capacity) {
    Prng rng(init_seed);
    net.init_weights(rng);
    adam = Adam(net.parameter_count(), learning_rate);
  }
};

struct DecideResult {
  Selection selection;
  std::vector<double> features;
  std::size_t candidates = 0;
  double seconds = 0.0;
};

/// Runs the policy on one state: featurize, forward, quantize, optional
/// one-climb filter, critic selection. Timing covers exactly this chain.
inline DecideResult drl_decide(const Mlp& net, const TaskGraph& graph, const PathSet& paths,
                               const EnvState& state, const EnvParams& params,
                               int candidate_count, bool one_climb,
                               const SolveOptions& solve_opts, std::uint64_t noise_seed) {
  const auto started = std::chrono::steady_clock::now();
  DecideResult out;
  out.features = featurize(state, graph, params);
  const std::vector<double> relaxed = net.forward(out.features);
  Prng noise_rng(noise_seed);
  CandidateSet candidates = gnop_quantize(relaxed, candidate_count, noise_rng);
  if (one_climb) candidates = one_climb_filter(candidates, paths);
  out.selection = select_action(candidates, graph, paths, state, params, solve_opts);
  out.candidates = candidates.size();
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

struct EpochResult {
  OffloadDecision action;
  CriticResult critic;
  std::optional<double> loss;
  std::size_t candidates_evaluated = 0;
  double decision_seconds = 0.0;
};

/// One step of the learning loop for a fresh environment state: decide,
/// store the experience, and train every `train_interval` epochs once the
/// memory is at least half full. Each stochastic stage draws from its own
/// stream derived from the base seed and the epoch index, so whole
/// trajectories replay exactly.
inline EpochResult run_epoch(long epoch, PolicyState& policy, const TaskGraph& graph,
                             const PathSet& paths, const EnvParams& params,
                             std::uint64_t base_seed, const ActorOptions& opts) {
  const EnvState state =
      sample_state(params, graph, derive_stream(base_seed, "env", static_cast<std::uint64_t>(epoch)));
  DecideResult decided =
      drl_decide(policy.net, graph, paths, state, params, opts.candidate_count, opts.one_climb,
                 opts.solve, derive_stream(base_seed, "gnop", static_cast<std::uint64_t>(epoch)));

  policy.memory.push(std::move(decided.features), decided.selection.action.a);

  EpochResult result;
  result.action = decided.selection.action;
  result.critic = std::move(decided.selection.critic);
  result.candidates_evaluated = decided.candidates;
  result.decision_seconds = decided.seconds;

  const bool warm = policy.memory.size() >= policy.memory.capacity() / 2;
  if (warm && opts.train_interval > 0 && epoch % opts.train_interval == 0) {
    const std::size_t batch = std::min(opts.batch_size, policy.memory.size());
    Prng batch_rng(derive_stream(base_seed, "batch", static_cast<std::uint64_t>(epoch)));
    result.loss = train_step(policy.net, policy.adam, policy.memory, batch, batch_rng);
  }
  return result;
}

/// Diagnostic for the sufficient conditions under which restricting the
/// search to one-climb actions loses nothing. For every ordered path pair
/// and every contiguous run of shared real tasks, the three transmission-gap
/// inequalities are evaluated with the run's minimal compute cost; the
/// returned fraction counts sampled states where every inequality holds.
struct OneClimbDiagnostic {
  double satisfied_fraction = 1.0;
  int states = 0;
  int segments_checked = 0;
};

inline OneClimbDiagnostic one_climb_conditions_report(const TaskGraph& graph,
                                                      const PathSet& paths,
                                                      const EnvParams& params, int n_states,
                                                      std::uint64_t seed) {
  OneClimbDiagnostic diag;
  diag.states = n_states;

  // Contiguous runs of overlap shared with any other path, per path.
  struct Segment {
    int prev, first, last, next;
    double xy_star, z;
  };
  const double f_star = std::min(std::cbrt(1.0 / (2.0 * params.kappa)), params.f_peak_hz);
  std::vector<Segment> segments;
  for (std::size_t o = 0; o < paths.count(); ++o) {
    for (std::size_t p = 0; p < paths.count(); ++p) {
      if (o == p) continue;
      std::vector<bool> in_other(static_cast<std::size_t>(graph.task_count()), false);
      for (int t : paths.paths[p]) in_other[static_cast<std::size_t>(t)] = true;
      const auto& path = paths.paths[o];
      std::size_t m = 1;
      while (m + 1 < path.size()) {
        if (!graph.is_virtual(path[m]) && in_other[static_cast<std::size_t>(path[m])]) {
          std::size_t end = m;
          while (end + 1 + 1 < path.size() && !graph.is_virtual(path[end + 1]) &&
                 in_other[static_cast<std::size_t>(path[end + 1])])
            ++end;
          Segment seg;
          seg.prev = path[m - 1];
          seg.first = path[m];
          seg.last = path[end];
          seg.next = path[end + 1];
          seg.xy_star = 0.0;
          seg.z = 0.0;
          for (std::size_t q = m; q <= end; ++q) {
            const double load = graph.workload(path[q]);
            seg.xy_star += params.kappa * load * f_star * f_star + load / f_star;
            seg.z += load;  // divided by the sampled edge frequency below
          }
          segments.push_back(seg);
          m = end + 1;
        } else {
          ++m;
        }
      }
    }
  }
  diag.segments_checked = static_cast<int>(segments.size());
  if (segments.empty() || n_states <= 0) return diag;

  int satisfied = 0;
  for (int s = 0; s < n_states; ++s) {
    const EnvState state =
        sample_state(params, graph, derive_stream(seed, "oneclimb", static_cast<std::uint64_t>(s)));
    bool ok = true;
    for (const Segment& seg : segments) {
      const std::size_t e_in = static_cast<std::size_t>(graph.edge_index(seg.prev, seg.first));
      const std::size_t e_out = static_cast<std::size_t>(graph.edge_index(seg.last, seg.next));
      const double bits_in = graph.edges()[e_in].data_bits;
      const double bits_out = graph.edges()[e_out].data_bits;
      const double up_in = bits_in / uplink_rate(params, state.h_up[e_in]);
      const double up_out = bits_out / uplink_rate(params, state.h_up[e_out]);
      const double down_in = bits_in / downlink_rate(params, state.h_down[e_in]);
      const double down_out = bits_out / downlink_rate(params, state.h_down[e_out]);
      const double rhs = seg.xy_star - seg.z / state.f_edge_hz;
      const bool cond_up = (up_out - up_in) < rhs / (1.0 + params.p_md_w);
      const bool cond_down = (down_in - down_out) < rhs;
      const bool cond_both = (1.0 + params.p_md_w) * up_in + down_out < rhs;
      if (!(cond_up && cond_down && cond_both)) {
        ok = false;
        break;
      }
    }
    if (ok) ++satisfied;
  }
  diag.satisfied_fraction = static_cast<double>(satisfied) / static_cast<double>(n_states);
  return diag;
}

}  // namespace mecoff
