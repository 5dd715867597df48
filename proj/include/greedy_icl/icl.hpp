// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "block_models.hpp"
#include "cell_access.hpp"
#include "partition.hpp"

namespace greedy_icl {

/// log of the Dirichlet-multinomial probability of one label vector with
/// cluster sizes `counts` under concentration `conc`.
inline double log_dirichlet_multinomial(std::span<const int> counts, double conc) {
  const double k = static_cast<double>(counts.size());
  double total = 0.0;
  double out = std::lgamma(conc * k) - k * std::lgamma(conc);
  for (int c : counts) {
    out += std::lgamma(c + conc);
    total += c;
  }
  return out - std::lgamma(total + conc * k);
}

/// log pi(c, w | K, G): the collapsed label prior of both node sets.
inline double log_label_prior(const Partition& p, double alpha0, double beta0) {
  return log_dirichlet_multinomial(p.row_counts, alpha0) +
         log_dirichlet_multinomial(p.col_counts, beta0);
}

/// Change of one side's log label prior when a node moves from cluster `from`
/// to `to`, given the side's node total `n`. A singleton `from` vanishes, so
/// the cluster count drops by one.
inline double label_prior_move_delta(std::span<const int> counts, double n, double conc, int from, int to) {
  if (from == to) return 0.0;
  const double k = static_cast<double>(counts.size());
  double d = std::lgamma(counts[to] + 1 + conc) - std::lgamma(counts[to] + conc);
  if (counts[from] > 1) {
    d += std::lgamma(counts[from] - 1 + conc) - std::lgamma(counts[from] + conc);
  } else {
    d += std::lgamma(conc * (k - 1)) - std::lgamma(conc * k) + std::lgamma(conc) -
         std::lgamma(1 + conc) - std::lgamma(n + conc * (k - 1)) + std::lgamma(n + conc * k);
  }
  return d;
}

inline double label_prior_move_delta(std::span<const int> counts, double conc, int from, int to) {
  double n = 0.0;
  for (int c : counts) n += c;
  return label_prior_move_delta(counts, n, conc, from, to);
}

/// Change of one side's log label prior when cluster `b` is merged into `a`.
inline double label_prior_merge_delta(std::span<const int> counts, double conc, int a, int b) {
  const double k = static_cast<double>(counts.size());
  double n = 0.0;
  for (int c : counts) n += c;
  const int lo = std::min(a, b), hi = std::max(a, b);
  return std::lgamma(conc * (k - 1)) - std::lgamma(conc * k) + std::lgamma(conc) -
         std::lgamma(n + conc * (k - 1)) + std::lgamma(n + conc * k) +
         std::lgamma(counts[lo] + counts[hi] + conc) - std::lgamma(counts[lo] + conc) -
         std::lgamma(counts[hi] + conc);
}

namespace detail {

// Neumaier compensated sum, so re-anchored totals do not depend on drift.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace detail

/// Exact-ICL bookkeeping for one partition of one adjacency.
///
/// Holds the K x G grid of block sufficient statistics with their cached
/// log marginals, plus cached label-prior and block totals, so that label
/// moves and cluster merges are scored from the affected blocks only.
/// Empty clusters are deleted as soon as they occur.
template <class Model>
class IclState {
 public:
  using Stats = typename Model::Stats;

  /// Accepted moves between full rebuilds of the block statistics.
  static constexpr int kRebuildInterval = 1000;

  IclState(const Model& model, const CellAccess& cells, Partition partition, double alpha0,
           double beta0)
      : model_(&model), cells_(&cells), part_(std::move(partition)), alpha0_(alpha0), beta0_(beta0) {
    if (part_.rows.size() != cells.n_rows() || part_.cols.size() != cells.n_cols()) {
      throw std::invalid_argument("partition does not match the adjacency dimensions");
    }
    if (!is_valid_partition(part_)) throw std::invalid_argument("partition has empty clusters");
    rebuild();
  }

  const Model& model() const { return *model_; }
  const Partition& partition() const { return part_; }
  int k() const { return part_.k(); }
  int g() const { return part_.g(); }
  int clusters(Axis axis) const { return axis == Axis::rows ? k() : g(); }
  double alpha0() const { return alpha0_; }
  double beta0() const { return beta0_; }

  double icl() const { return icl_; }
  double log_label_prior_cached() const { return prior_; }
  double log_block_total() const { return blocks_; }

  const Stats& block(int k, int g) const { return stats_[k][g]; }
  double block_log_marginal(int k, int g) const { return log_lambda_[k][g]; }

  /// ICL recomputed from the cached block marginals and cluster counts.
  double icl_from_cache() const {
    detail::CompensatedSum sum;
    for (const auto& row : log_lambda_) {
      for (double v : row) sum.add(v);
    }
    return log_label_prior(part_, alpha0_, beta0_) + sum.value();
  }

  /// Resets the running totals to a fresh evaluation of the cache.
  void anchor() {
    detail::CompensatedSum sum;
    for (const auto& row : log_lambda_) {
      for (double v : row) sum.add(v);
    }
    blocks_ = sum.value();
    prior_ = log_label_prior(part_, alpha0_, beta0_);
    icl_ = prior_ + blocks_;
  }

  /// Rebuilds every block from the cells and re-anchors the totals.
  void rebuild() {
    const int kk = k(), gg = g();
    stats_.assign(kk, std::vector<Stats>(gg));
    log_lambda_.assign(kk, std::vector<double>(gg, 0.0));
    slice_.resize(gg);
    for (std::size_t i = 0; i < part_.rows.size(); ++i) {
      cells_->line_stats(*model_, Axis::rows, i, part_.cols, part_.col_counts, std::span<Stats>(slice_));
      auto& target = stats_[part_.rows[i]];
      for (int g = 0; g < gg; ++g) model_->merge_into(target[g], slice_[g]);
    }
    for (int a = 0; a < kk; ++a) {
      for (int b = 0; b < gg; ++b) log_lambda_[a][b] = model_->log_marginal(stats_[a][b]);
    }
    clear_zero_gains();
    moves_since_rebuild_ = 0;
    anchor();
  }

  /// ICL change for moving `node` of `axis` to each cluster of that axis.
  ///
  /// Entry l holds the change for target l; the current cluster scores 0.
  /// When `allowed` is given, disallowed targets are skipped and hold -inf.
  /// The returned span is valid until the next call.
  std::span<const double> move_deltas(Axis axis, std::size_t node,
                                      const std::vector<char>* allowed = nullptr) {
    const auto& own = own_labels(axis);
    const int from = own[node];
    const int n_own = clusters(axis);
    const int n_cross = clusters(other(axis));
    load_slice(axis, node, cells_->is_sparse() ? &touched_ : nullptr);

    double removal = 0.0;
    for (int b = 0; b < n_cross; ++b) {
      Stats t = block_at(axis, from, b);
      model_->subtract(t, slice_[b]);
      removal += model_->log_marginal(t) - log_lambda_at(axis, from, b);
    }

    deltas_.assign(n_own, -std::numeric_limits<double>::infinity());
    deltas_[from] = 0.0;
    const auto& counts = own_counts(axis);
    const double conc = concentration(axis);
    const double n_total = static_cast<double>(own.size());
    for (int l = 0; l < n_own; ++l) {
      if (l == from || (allowed && !(*allowed)[l])) continue;
      double gain = 0.0;
      if (cells_->is_sparse()) {
        // A block the line has no stored cells in receives only zeros, so its
        // gain is shared by every such line until the block changes.
        double* cached = zero_gains(axis).data() + static_cast<std::size_t>(l) * n_cross;
        for (int b = 0; b < n_cross; ++b) {
          if (touched_[b]) {
            gain += block_gain(axis, l, b);
          } else {
            if (std::isnan(cached[b])) cached[b] = block_gain(axis, l, b);
            gain += cached[b];
          }
        }
      } else {
        for (int b = 0; b < n_cross; ++b) gain += block_gain(axis, l, b);
      }
      deltas_[l] = label_prior_move_delta(counts, n_total, conc, from, l) + removal + gain;
    }
    return deltas_;
  }

  /// ICL(after) - ICL(before) for moving `node` of `axis` to cluster `to`.
  double delta_move(Axis axis, std::size_t node, int to) {
    check_cluster(axis, to);
    const int from = own_labels(axis)[node];
    if (to == from) return 0.0;
    load_slice(axis, node);
    const int n_cross = clusters(other(axis));
    double d = label_prior_move_delta(own_counts(axis), concentration(axis), from, to);
    double removal = 0.0, gain = 0.0;
    for (int b = 0; b < n_cross; ++b) {
      Stats t = block_at(axis, from, b);
      model_->subtract(t, slice_[b]);
      removal += model_->log_marginal(t) - log_lambda_at(axis, from, b);
    }
    for (int b = 0; b < n_cross; ++b) {
      Stats t = block_at(axis, to, b);
      model_->merge_into(t, slice_[b]);
      gain += model_->log_marginal(t) - log_lambda_at(axis, to, b);
    }
    return d + removal + gain;
  }

  /// Moves `node` of `axis` to cluster `to` and returns the ICL change.
  ///
  /// When the node was the last member of its cluster, that cluster is
  /// deleted and `deleted` receives its former index; higher indices shift
  /// down by one.
  double apply_move(Axis axis, std::size_t node, int to, std::optional<int>* deleted = nullptr) {
    if (deleted) deleted->reset();
    const double delta = delta_move(axis, node, to);  // leaves the node's slice loaded
    const int from = own_labels(axis)[node];
    if (to == from) return 0.0;
    const double prior_delta = label_prior_move_delta(own_counts(axis), concentration(axis), from, to);
    const int n_cross = clusters(other(axis));
    double block_delta = 0.0;
    for (int b = 0; b < n_cross; ++b) {
      Stats& src = block_at(axis, from, b);
      Stats& dst = block_at(axis, to, b);
      model_->subtract(src, slice_[b]);
      model_->merge_into(dst, slice_[b]);
      const double new_src = model_->log_marginal(src);
      const double new_dst = model_->log_marginal(dst);
      block_delta += (new_src - log_lambda_at(axis, from, b)) + (new_dst - log_lambda_at(axis, to, b));
      log_lambda_at(axis, from, b) = new_src;
      log_lambda_at(axis, to, b) = new_dst;
    }
    own_labels(axis)[node] = to;
    --own_counts(axis)[from];
    ++own_counts(axis)[to];
    invalidate_zero_gains(axis, from, to);
    prior_ += prior_delta;
    blocks_ += block_delta;
    icl_ += delta;
    if (own_counts(axis)[from] == 0) {
      erase_cluster(axis, from);
      if (deleted) *deleted = from;
    }
    if (++moves_since_rebuild_ >= kRebuildInterval) rebuild();
    return delta;
  }

  /// ICL change for relabelling every member of cluster `b` as `a`.
  double delta_merge(Axis axis, int a, int b) const {
    check_cluster(axis, a);
    check_cluster(axis, b);
    if (a == b) throw std::invalid_argument("cannot merge a cluster with itself");
    const int lo = std::min(a, b), hi = std::max(a, b);
    double d = label_prior_merge_delta(own_counts(axis), concentration(axis), lo, hi);
    const int n_cross = clusters(other(axis));
    for (int c = 0; c < n_cross; ++c) {
      Stats t = block_at(axis, lo, c);
      model_->merge_into(t, block_at(axis, hi, c));
      d += model_->log_marginal(t) - (log_lambda_at(axis, lo, c) + log_lambda_at(axis, hi, c));
    }
    return d;
  }

  /// Merges cluster `b` into `a`, deletes `b` and returns the ICL change.
  double apply_merge(Axis axis, int a, int b) {
    const double delta = delta_merge(axis, a, b);
    const double prior_delta = label_prior_merge_delta(own_counts(axis), concentration(axis), a, b);
    const int n_cross = clusters(other(axis));
    double block_delta = 0.0;
    for (int c = 0; c < n_cross; ++c) {
      Stats& into = block_at(axis, a, c);
      model_->merge_into(into, block_at(axis, b, c));
      block_at(axis, b, c) = Stats{};
      const double merged = model_->log_marginal(into);
      block_delta += merged - (log_lambda_at(axis, a, c) + log_lambda_at(axis, b, c));
      log_lambda_at(axis, a, c) = merged;
      log_lambda_at(axis, b, c) = 0.0;
    }
    auto& labels = own_labels(axis);
    for (auto& l : labels) {
      if (l == b) l = a;
    }
    own_counts(axis)[a] += own_counts(axis)[b];
    own_counts(axis)[b] = 0;
    prior_ += prior_delta;
    blocks_ += block_delta;
    icl_ += delta;
    erase_cluster(axis, b);
    return delta;
  }

  /// Full conditional of the label of `node`: softmax of its move deltas.
  std::vector<double> gibbs_full_conditional(Axis axis, std::size_t node) {
    const auto d = move_deltas(axis, node);
    return softmax(d);
  }

  static std::vector<double> softmax(std::span<const double> d) {
    const double top = *std::max_element(d.begin(), d.end());
    std::vector<double> p(d.size());
    double z = 0.0;
    for (std::size_t l = 0; l < d.size(); ++l) z += p[l] = std::exp(d[l] - top);
    for (auto& v : p) v /= z;
    return p;
  }

 private:
  std::vector<int>& own_labels(Axis axis) { return axis == Axis::rows ? part_.rows : part_.cols; }
  const std::vector<int>& own_labels(Axis axis) const {
    return axis == Axis::rows ? part_.rows : part_.cols;
  }
  std::vector<int>& own_counts(Axis axis) {
    return axis == Axis::rows ? part_.row_counts : part_.col_counts;
  }
  const std::vector<int>& own_counts(Axis axis) const {
    return axis == Axis::rows ? part_.row_counts : part_.col_counts;
  }
  double concentration(Axis axis) const { return axis == Axis::rows ? alpha0_ : beta0_; }

  Stats& block_at(Axis axis, int own, int cross) {
    return axis == Axis::rows ? stats_[own][cross] : stats_[cross][own];
  }
  const Stats& block_at(Axis axis, int own, int cross) const {
    return axis == Axis::rows ? stats_[own][cross] : stats_[cross][own];
  }
  double& log_lambda_at(Axis axis, int own, int cross) {
    return axis == Axis::rows ? log_lambda_[own][cross] : log_lambda_[cross][own];
  }
  double log_lambda_at(Axis axis, int own, int cross) const {
    return axis == Axis::rows ? log_lambda_[own][cross] : log_lambda_[cross][own];
  }

  void check_cluster(Axis axis, int c) const {
    if (c < 0 || c >= clusters(axis)) {
      throw std::out_of_range("cluster index " + std::to_string(c) + " outside [0, " +
                              std::to_string(clusters(axis)) + ")");
    }
  }

  void load_slice(Axis axis, std::size_t node, std::vector<char>* touched = nullptr) {
    const Axis cross = other(axis);
    slice_.resize(clusters(cross));
    cells_->line_stats(*model_, axis, node, own_labels(cross), own_counts(cross),
                       std::span<Stats>(slice_), touched);
  }

  // Change of block (own, cross) when the loaded slice joins it.
  double block_gain(Axis axis, int own, int cross) const {
    Stats t = block_at(axis, own, cross);
    model_->merge_into(t, slice_[cross]);
    return model_->log_marginal(t) - log_lambda_at(axis, own, cross);
  }

  // Zero-slice gains, own-major for each axis; NaN marks an entry to recompute.
  std::vector<double>& zero_gains(Axis axis) {
    auto& cache = zero_gains_[axis == Axis::rows ? 0 : 1];
    const std::size_t size = static_cast<std::size_t>(k()) * g();
    if (cache.size() != size) cache.assign(size, std::numeric_limits<double>::quiet_NaN());
    return cache;
  }

  void clear_zero_gains() {
    for (auto& cache : zero_gains_) cache.clear();
  }

  // Blocks of clusters `a` and `b` of `axis` changed, and so did their sizes.
  void invalidate_zero_gains(Axis axis, int a, int b) {
    constexpr double kStale = std::numeric_limits<double>::quiet_NaN();
    const std::size_t n_own = clusters(axis), n_cross = clusters(other(axis));
    auto& own = zero_gains_[axis == Axis::rows ? 0 : 1];
    auto& cross = zero_gains_[axis == Axis::rows ? 1 : 0];
    if (own.size() == n_own * n_cross) {
      std::fill_n(own.begin() + a * n_cross, n_cross, kStale);
      std::fill_n(own.begin() + b * n_cross, n_cross, kStale);
    }
    if (cross.size() == n_own * n_cross) {
      for (std::size_t c = 0; c < n_cross; ++c) {
        cross[c * n_own + a] = kStale;
        cross[c * n_own + b] = kStale;
      }
    }
  }

  void erase_cluster(Axis axis, int c) {
    clear_zero_gains();
    auto& counts = own_counts(axis);
    counts.erase(counts.begin() + c);
    for (auto& l : own_labels(axis)) {
      if (l > c) --l;
    }
    if (axis == Axis::rows) {
      stats_.erase(stats_.begin() + c);
      log_lambda_.erase(log_lambda_.begin() + c);
    } else {
      for (auto& row : stats_) row.erase(row.begin() + c);
      for (auto& row : log_lambda_) row.erase(row.begin() + c);
    }
  }

  const Model* model_;
  const CellAccess* cells_;
  Partition part_;
  double alpha0_;
  double beta0_;
  std::vector<std::vector<Stats>> stats_;
  std::vector<std::vector<double>> log_lambda_;
  double prior_ = 0.0;
  double blocks_ = 0.0;
  double icl_ = 0.0;
  int moves_since_rebuild_ = 0;
  std::vector<Stats> slice_;
  std::vector<char> touched_;
  std::array<std::vector<double>, 2> zero_gains_;
  std::vector<double> deltas_;
};

}  // namespace greedy_icl
