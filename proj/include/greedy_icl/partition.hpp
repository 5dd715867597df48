// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace greedy_icl {

/// Relabels `labels` onto 0..K-1 keeping the relative order of the label
/// values that occur; returns the occupancy counts.
inline std::vector<int> compact_labels(std::vector<int>& labels) {
  if (labels.empty()) return {};
  const int max_label = *std::max_element(labels.begin(), labels.end());
  if (*std::min_element(labels.begin(), labels.end()) < 0) {
    throw std::invalid_argument("labels must be non-negative");
  }
  std::vector<int> remap(static_cast<std::size_t>(max_label) + 1, 0);
  for (int l : labels) remap[l] = 1;
  int next = 0;
  for (auto& r : remap) r = r ? next++ : -1;
  std::vector<int> counts(next, 0);
  for (auto& l : labels) {
    l = remap[l];
    ++counts[l];
  }
  return counts;
}

/// Row labels c and column labels w (0-based) with their cluster occupancies.
///
/// Every cluster index below k() (resp. g()) is occupied.
struct Partition {
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<int> row_counts;
  std::vector<int> col_counts;

  int k() const { return static_cast<int>(row_counts.size()); }
  int g() const { return static_cast<int>(col_counts.size()); }

  static Partition from_labels(std::vector<int> row_labels, std::vector<int> col_labels) {
    Partition p;
    p.row_counts = compact_labels(row_labels);
    p.col_counts = compact_labels(col_labels);
    p.rows = std::move(row_labels);
    p.cols = std::move(col_labels);
    return p;
  }

  friend bool operator==(const Partition&, const Partition&) = default;
};

/// Uniform independent assignment of n nodes over k clusters, compacted.
template <class Rng>
std::vector<int> random_labels(std::size_t n, int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("cluster count must be at least 1");
  if (static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("cluster count " + std::to_string(k) + " exceeds node count " +
                                std::to_string(n));
  }
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::vector<int> labels(n);
  for (auto& l : labels) l = pick(rng);
  compact_labels(labels);
  return labels;
}

template <class Rng>
Partition random_partition(std::size_t n, std::size_t m, int k, int g, Rng& rng) {
  auto rows = random_labels(n, k, rng);
  auto cols = random_labels(m, g, rng);
  return Partition::from_labels(std::move(rows), std::move(cols));
}

/// Checks the occupancy invariants; used by tests and on report ingestion.
inline bool is_valid_partition(const Partition& p) {
  const auto check = [](const std::vector<int>& labels, const std::vector<int>& counts) {
    std::vector<int> seen(counts.size(), 0);
    for (int l : labels) {
      if (l < 0 || l >= static_cast<int>(counts.size())) return false;
      ++seen[l];
    }
    return seen == counts && std::none_of(counts.begin(), counts.end(), [](int c) { return c < 1; });
  };
  return check(p.rows, p.row_counts) && check(p.cols, p.col_counts);
}

}  // namespace greedy_icl
