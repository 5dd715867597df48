// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace greedy_icl {

/// counts[k][l] = number of nodes with estimated label k and true label l.
struct ConfusionMatrix {
  std::vector<std::vector<std::size_t>> counts;
  std::size_t n = 0;

  static ConfusionMatrix of(std::span<const int> est, std::span<const int> truth) {
    if (est.size() != truth.size()) throw std::invalid_argument("label vectors differ in length");
    if (est.empty()) throw std::invalid_argument("label vectors are empty");
    std::map<int, std::size_t> est_index, truth_index;
    for (int l : est) est_index.emplace(l, 0);
    for (int l : truth) truth_index.emplace(l, 0);
    std::size_t next = 0;
    for (auto& [label, idx] : est_index) idx = next++;
    next = 0;
    for (auto& [label, idx] : truth_index) idx = next++;
    ConfusionMatrix c;
    c.n = est.size();
    c.counts.assign(est_index.size(), std::vector<std::size_t>(truth_index.size(), 0));
    for (std::size_t i = 0; i < est.size(); ++i) ++c.counts[est_index[est[i]]][truth_index[truth[i]]];
    return c;
  }
};

namespace detail {

inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace detail

/// Mutual information of two clusterings normalized by the larger entropy.
///
/// Two single-cluster partitions score 1; if exactly one side has zero
/// entropy the score is 0.
inline double nmi(std::span<const int> est, std::span<const int> truth) {
  const auto c = ConfusionMatrix::of(est, truth);
  const double n = static_cast<double>(c.n);
  std::vector<double> pe(c.counts.size(), 0.0), pt(c.counts.front().size(), 0.0);
  for (std::size_t k = 0; k < pe.size(); ++k) {
    for (std::size_t l = 0; l < pt.size(); ++l) {
      pe[k] += c.counts[k][l] / n;
      pt[l] += c.counts[k][l] / n;
    }
  }
  const double he = detail::entropy(pe), ht = detail::entropy(pt);
  if (he == 0.0 && ht == 0.0) return 1.0;
  if (he == 0.0 || ht == 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t k = 0; k < pe.size(); ++k) {
    for (std::size_t l = 0; l < pt.size(); ++l) {
      const double p = c.counts[k][l] / n;
      if (p > 0.0) mi += p * std::log(p / (pe[k] * pt[l]));
    }
  }
  return std::clamp(mi / std::max(he, ht), 0.0, 1.0);
}

/// Row-side plus column-side NMI, in [0, 2].
inline double combined_nmi(std::span<const int> est_rows, std::span<const int> truth_rows,
                           std::span<const int> est_cols, std::span<const int> truth_cols) {
  return nmi(est_rows, truth_rows) + nmi(est_cols, truth_cols);
}

}  // namespace greedy_icl
