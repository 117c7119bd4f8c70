#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "mecoff/critic.hpp"
#include "mecoff/errors.hpp"
#include "mecoff/rng.hpp"
#include "mecoff/schedule.hpp"

namespace mecoff {

struct BaselineResult {
  std::string name;
  OffloadDecision decision;  // best decision found
  CriticResult critic;
  double wall_time_s = 0.0;
  long evaluations = 0;
  OffloadDecision final_state;  // where an iterative method stopped
};

namespace detail {

inline OffloadDecision decision_from_mask(std::uint32_t mask, int m) {
  OffloadDecision d = OffloadDecision::all_local(m);
  for (int i = 0; i < m; ++i)
    if (mask & (1u << i)) d.a[static_cast<std::size_t>(i)] = 1;
  return d;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

struct ExhaustiveOptions {
  int max_tasks = 20;
  bool parallel = true;
  SolveOptions solve;
};

/// Global optimum by scoring every binary decision with the critic.
/// Ties resolve to the lowest decision mask so the result is deterministic
/// whether or not the scan runs in parallel.
inline BaselineResult exhaustive(const TaskGraph& graph, const PathSet& paths,
                                 const EnvState& state, const EnvParams& params,
                                 const ExhaustiveOptions& opts = {}) {
  const int m = graph.real_task_count();
  if (m > opts.max_tasks)
    throw TooManyTasks("exhaustive search over " + std::to_string(m) + " tasks exceeds cap " +
                       std::to_string(opts.max_tasks));
  const std::uint32_t total = 1u << m;
  detail::Stopwatch clock;

  struct Best {
    double eta = std::numeric_limits<double>::infinity();
    std::uint32_t mask = 0;
  };
  auto scan = [&](std::uint32_t lo, std::uint32_t hi) {
    Best best;
    for (std::uint32_t mask = lo; mask < hi; ++mask) {
      const OffloadDecision d = detail::decision_from_mask(mask, m);
      const CriticResult res = solve(graph, paths, d, state, params, opts.solve);
      if (res.report.eta < best.eta) {
        best.eta = res.report.eta;
        best.mask = mask;
      }
    }
    return best;
  };

  Best best;
  const unsigned workers =
      opts.parallel ? std::max(1u, std::thread::hardware_concurrency()) : 1u;
  if (workers > 1 && total >= 64) {
    std::vector<std::future<Best>> futures;
    const std::uint32_t chunk = (total + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint32_t lo = w * chunk;
      const std::uint32_t hi = std::min(total, lo + chunk);
      if (lo >= hi) break;
      futures.push_back(std::async(std::launch::async, scan, lo, hi));
    }
    for (auto& f : futures) {
      const Best b = f.get();
      if (b.eta < best.eta || (b.eta == best.eta && b.mask < best.mask)) best = b;
    }
  } else {
    best = scan(0, total);
  }

  BaselineResult result;
  result.name = "exhaustive";
  result.decision = detail::decision_from_mask(best.mask, m);
  result.critic = solve(graph, paths, result.decision, state, params, opts.solve);
  result.final_state = result.decision;
  result.evaluations = total;
  result.wall_time_s = clock.seconds();
  return result;
}

struct GibbsOptions {
  int sweeps = 500;
  double initial_temperature = 0.0;  // <= 0 selects eta(all-local) / 10
  double decay = 0.98;
  std::uint64_t seed = 1;
  SolveOptions solve;
};

/// Single-site Gibbs sampler over offloading decisions. Visits coordinates
/// cyclically, resamples each bit from the two-point Boltzmann distribution
/// of the resulting costs, cools geometrically, and returns the best
/// decision encountered.
inline BaselineResult gibbs(const TaskGraph& graph, const PathSet& paths, const EnvState& state,
                            const EnvParams& params, const GibbsOptions& opts = {}) {
  const int m = graph.real_task_count();
  detail::Stopwatch clock;
  Prng rng(opts.seed);

  OffloadDecision current = OffloadDecision::all_local(m);
  CriticResult cur_res = solve(graph, paths, current, state, params, opts.solve);
  long evaluations = 1;

  BaselineResult result;
  result.name = "gibbs";
  result.decision = current;
  result.critic = cur_res;

  double temperature = opts.initial_temperature > 0.0 ? opts.initial_temperature
                                                      : cur_res.report.eta / 10.0;
  for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
    for (int i = 0; i < m; ++i) {
      OffloadDecision flipped = current;
      flipped.a[static_cast<std::size_t>(i)] ^= 1;
      CriticResult flip_res = solve(graph, paths, flipped, state, params, opts.solve);
      ++evaluations;
      if (flip_res.report.eta < result.critic.report.eta) {
        result.decision = flipped;
        result.critic = flip_res;
      }
      // P(take flipped) = exp(-eta_f/T) / (exp(-eta_f/T) + exp(-eta_c/T)).
      double p_flip;
      if (std::isinf(temperature)) {
        p_flip = 0.5;
      } else {
        const double x = (flip_res.report.eta - cur_res.report.eta) / temperature;
        p_flip = 1.0 / (1.0 + std::exp(std::min(700.0, std::max(-700.0, x))));
      }
      if (rng.uniform01() < p_flip) {
        current = std::move(flipped);
        cur_res = std::move(flip_res);
      }
    }
    temperature *= opts.decay;
  }

  result.final_state = current;
  result.evaluations = evaluations;
  result.wall_time_s = clock.seconds();
  return result;
}

inline BaselineResult all_local(const TaskGraph& graph, const PathSet& paths,
                                const EnvState& state, const EnvParams& params,
                                const SolveOptions& solve_opts = {}) {
  detail::Stopwatch clock;
  BaselineResult result;
  result.name = "all_local";
  result.decision = OffloadDecision::all_local(graph.real_task_count());
  result.critic = solve(graph, paths, result.decision, state, params, solve_opts);
  result.final_state = result.decision;
  result.evaluations = 1;
  result.wall_time_s = clock.seconds();
  return result;
}

inline BaselineResult all_edge(const TaskGraph& graph, const PathSet& paths,
                               const EnvState& state, const EnvParams& params,
                               const SolveOptions& solve_opts = {}) {
  detail::Stopwatch clock;
  BaselineResult result;
  result.name = "all_edge";
  result.decision = OffloadDecision::all_edge(graph.real_task_count());
  result.critic = solve(graph, paths, result.decision, state, params, solve_opts);
  result.final_state = result.decision;
  result.evaluations = 1;
  result.wall_time_s = clock.seconds();
  return result;
}

}  // namespace mecoff
