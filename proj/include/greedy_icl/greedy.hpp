// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "adjacency.hpp"
#include "block_models.hpp"
#include "cell_access.hpp"
#include "config.hpp"
#include "icl.hpp"
#include "partition.hpp"

namespace greedy_icl {

using Rng = std::mt19937_64;

/// Candidate clusters still considered for each node.
///
/// Exclusions are permanent within a run. A node's current cluster is
/// always allowed.
class PruneTable {
 public:
  PruneTable(std::size_t n_rows, int k, std::size_t n_cols, int g)
      : rows_(n_rows, std::vector<char>(k, 1)), cols_(n_cols, std::vector<char>(g, 1)) {}

  bool active = false;

  const std::vector<char>& allowed(Axis axis, std::size_t node) const { return side(axis)[node]; }
  void exclude(Axis axis, std::size_t node, int cluster) { side(axis)[node][cluster] = 0; }

  std::size_t allowed_count(Axis axis, std::size_t node) const {
    const auto& a = side(axis)[node];
    return static_cast<std::size_t>(std::count(a.begin(), a.end(), 1));
  }

  /// Drops a deleted cluster index.
  void erase_cluster(Axis axis, int c) {
    for (auto& a : side(axis)) a.erase(a.begin() + c);
  }

  /// Cluster `b` merged into `a`: a stays allowed wherever either was.
  void merge_clusters(Axis axis, int a, int b) {
    for (auto& allowed : side(axis)) allowed[a] = allowed[a] || allowed[b];
    erase_cluster(axis, b);
  }

 private:
  std::vector<std::vector<char>>& side(Axis axis) { return axis == Axis::rows ? rows_ : cols_; }
  const std::vector<std::vector<char>>& side(Axis axis) const {
    return axis == Axis::rows ? rows_ : cols_;
  }

  std::vector<std::vector<char>> rows_;
  std::vector<std::vector<char>> cols_;
};

struct TraceEntry {
  int sweep = 0;
  double icl = 0.0;
  int moves = 0;
  int k = 0;
  int g = 0;
  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct FitResult {
  Partition partition;
  double icl = 0.0;
  std::vector<TraceEntry> trace;
  int sweeps = 0;
  int moves = 0;
  int merges = 0;
  bool sweep_cap_reached = false;
  std::chrono::nanoseconds wall_time{0};
  std::uint64_t seed = 0;
  int best_restart = 0;
  std::vector<double> restart_icls;
  // Every accepted move or merge gain of the returned run, in order.
  std::vector<double> accepted_gains;
  SearchConfig search;
  PriorConfig prior;

  int k() const { return partition.k(); }
  int g() const { return partition.g(); }
};

/// Smallest ICL gain treated as an improvement. Gains below this are
/// floating-point noise at the magnitude of the current ICL.
inline double min_gain(double icl) { return 1e-12 * std::max(1.0, std::abs(icl)); }

/// Per-run bookkeeping shared by the sweep and merge routines.
struct SearchLog {
  int moves = 0;
  int merges = 0;
  std::vector<double> gains;
};

/// One pass over every node of `axis` in a fresh random order, moving each
/// to the cluster of largest ICL gain when that gain is positive. Ties go to
/// the lowest cluster index. Returns the number of accepted moves.
template <class Model>
int sweep(IclState<Model>& state, Axis axis, PruneTable& prune, double prune_threshold, Rng& rng,
          SearchLog* log = nullptr) {
  const std::size_t n = state.partition().rows.size() * (axis == Axis::rows) +
                        state.partition().cols.size() * (axis == Axis::cols);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  int accepted = 0;
  for (const auto node : order) {
    const auto* mask = prune.active ? &prune.allowed(axis, node) : nullptr;
    const auto deltas = state.move_deltas(axis, node, mask);
    const int from = (axis == Axis::rows ? state.partition().rows : state.partition().cols)[node];
    int best = from;
    double best_gain = 0.0;
    for (int l = 0; l < static_cast<int>(deltas.size()); ++l) {
      if (deltas[l] > best_gain) {
        best_gain = deltas[l];
        best = l;
      }
    }
    if (prune.active) {
      for (int l = 0; l < static_cast<int>(deltas.size()); ++l) {
        if (l != best && std::isfinite(deltas[l]) && best_gain - deltas[l] > prune_threshold) {
          prune.exclude(axis, node, l);
        }
      }
    }
    if (best == from || best_gain <= min_gain(state.icl())) continue;
    std::optional<int> deleted;
    const double gain = state.apply_move(axis, node, best, &deleted);
    if (deleted) prune.erase_cluster(axis, *deleted);
    ++accepted;
    if (log) {
      ++log->moves;
      log->gains.push_back(gain);
    }
  }
  return accepted;
}

template <class Model>
int sweep_rows(IclState<Model>& state, PruneTable& prune, double threshold, Rng& rng,
               SearchLog* log = nullptr) {
  return sweep(state, Axis::rows, prune, threshold, rng, log);
}

template <class Model>
int sweep_cols(IclState<Model>& state, PruneTable& prune, double threshold, Rng& rng,
               SearchLog* log = nullptr) {
  return sweep(state, Axis::cols, prune, threshold, rng, log);
}

/// Applies the best positive pairwise cluster merge, on either axis, until
/// none remains. Returns the number of merges.
template <class Model>
int merge_pass(IclState<Model>& state, PruneTable* prune = nullptr, SearchLog* log = nullptr) {
  int merges = 0;
  for (;;) {
    Axis best_axis = Axis::rows;
    int best_a = -1, best_b = -1;
    double best_gain = min_gain(state.icl());
    for (Axis axis : {Axis::rows, Axis::cols}) {
      const int n = state.clusters(axis);
      for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
          const double d = state.delta_merge(axis, a, b);
          if (d > best_gain) {
            best_gain = d;
            best_axis = axis;
            best_a = a;
            best_b = b;
          }
        }
      }
    }
    if (best_a < 0) return merges;
    const double gain = state.apply_merge(best_axis, best_a, best_b);
    if (prune) prune->merge_clusters(best_axis, best_a, best_b);
    ++merges;
    if (log) {
      ++log->merges;
      log->gains.push_back(gain);
    }
  }
}

/// One greedy run from a random partition with (k_init, g_init) clusters.
///
/// Alternates row and column sweeps until a full sweep moves nothing, then
/// tries merges; accepted merges resume the sweeping. Pruning switches on
/// after the warm-up sweeps when enabled.
template <class Model>
FitResult fit_once(const Model& model, const CellAccess& cells, const PriorConfig& prior,
                   const SearchConfig& config, std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  Rng rng(seed);
  const int k0 = config.resolved_k(cells.n_rows());
  const int g0 = config.resolved_g(cells.n_cols());
  IclState<Model> state(model, cells, random_partition(cells.n_rows(), cells.n_cols(), k0, g0, rng),
                        prior.alpha0, prior.beta0);
  PruneTable prune(cells.n_rows(), state.k(), cells.n_cols(), state.g());
  SearchLog log;

  FitResult result;
  result.trace.push_back({0, state.icl(), 0, state.k(), state.g()});
  int sweeps = 0;
  for (;;) {
    int moved = -1;
    while (sweeps < config.max_sweeps) {
      if (config.pruning && sweeps >= config.prune_warmup_sweeps) prune.active = true;
      moved = sweep(state, Axis::rows, prune, config.prune_threshold, rng, &log);
      moved += sweep(state, Axis::cols, prune, config.prune_threshold, rng, &log);
      ++sweeps;
      state.anchor();
      result.trace.push_back({sweeps, state.icl(), moved, state.k(), state.g()});
      if (moved == 0) break;
    }
    if (moved != 0) {
      result.sweep_cap_reached = true;
      break;
    }
    if (merge_pass(state, &prune, &log) == 0) break;
    state.anchor();
  }

  if (result.trace.back().icl != state.icl()) {
    // Merges applied with no sweep budget left to record them.
    result.trace.push_back({sweeps, state.icl(), 0, state.k(), state.g()});
  }
  result.partition = state.partition();
  result.icl = result.trace.back().icl;
  result.sweeps = sweeps;
  result.moves = log.moves;
  result.merges = log.merges;
  result.accepted_gains = std::move(log.gains);
  result.seed = seed;
  result.restart_icls = {result.icl};
  result.search = config;
  result.prior = prior;
  result.wall_time = std::chrono::steady_clock::now() - started;
  return result;
}

/// Runs `config.restarts` independent greedy runs with seeds rng_seed,
/// rng_seed + 1, ... on up to `config.threads` threads and keeps the run of
/// highest ICL (lowest restart index on ties).
template <class Model>
FitResult fit_with(const Model& model, const CellAccess& cells, const PriorConfig& prior,
                   const SearchConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  std::vector<FitResult> runs(config.restarts);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  const auto worker = [&] {
    for (int r = next++; r < config.restarts; r = next++) {
      try {
        runs[r] = fit_once(model, cells, prior, config, config.rng_seed + static_cast<std::uint64_t>(r));
      } catch (...) {
        std::lock_guard lock(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::min(config.threads, config.restarts);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  int best = 0;
  std::vector<double> icls;
  for (int r = 0; r < config.restarts; ++r) {
    icls.push_back(runs[r].icl);
    if (runs[r].icl > runs[best].icl) best = r;
  }
  FitResult out = std::move(runs[best]);
  out.best_restart = best;
  out.restart_icls = std::move(icls);
  out.wall_time = std::chrono::steady_clock::now() - started;
  return out;
}

/// Greedy exact-ICL co-clustering of `adj`.
inline FitResult fit(const BipartiteAdjacency& adj, const PriorConfig& prior,
                     const SearchConfig& config) {
  prior.validate();
  config.validate(adj.n_rows(), adj.n_cols());
  if (prior.kind() != adj.model().kind) {
    throw std::invalid_argument(std::string("prior is for the ") + std::string(to_string(prior.kind())) +
                                " model but the matrix is " + std::string(to_string(adj.model().kind)));
  }
  if (const auto* d = std::get_if<DirichletPrior>(&prior.model_prior);
      d && d->categories != adj.model().categories) {
    throw std::invalid_argument("prior category count differs from the matrix");
  }
  const auto cells = CellAccess::make(adj, config.sparse_engine);
  return visit_model(prior, table_sizes_for(adj),
                     [&](const auto& model) { return fit_with(model, cells, prior, config); });
}

}  // namespace greedy_icl
