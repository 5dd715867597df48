// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adjacency.hpp"

namespace greedy_icl {

/// Which node set a label move or merge applies to.
enum class Axis { rows, cols };

constexpr Axis other(Axis axis) { return axis == Axis::rows ? Axis::cols : Axis::rows; }

/// Line-wise view of an adjacency for the search engine.
///
/// A "line" is row i (over all columns) or column j (over all rows). The dense
/// engine walks every cell of a line; the sparse engine walks only the stored
/// nonzeros and accounts for the remaining zeros per cluster in one step.
/// Both produce identical statistics.
class CellAccess {
 public:
  static CellAccess dense(const BipartiteAdjacency& adj) {
    CellAccess a(adj, false);
    const std::size_t n = adj.n_rows(), m = adj.n_cols();
    a.row_major_ = adj.to_dense_values();
    a.col_major_.resize(n * m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) a.col_major_[j * n + i] = a.row_major_[i * m + j];
    }
    return a;
  }

  static CellAccess sparse(const BipartiteAdjacency& adj) {
    CellAccess a(adj, true);
    const auto triplets = adj.to_triplets();  // (row, col) order
    a.rows_ = Compressed::build(adj.n_rows(), triplets, [](const Triplet& t) { return t.row; },
                                [](const Triplet& t) { return t.col; });
    a.cols_ = Compressed::build(adj.n_cols(), triplets, [](const Triplet& t) { return t.col; },
                                [](const Triplet& t) { return t.row; });
    return a;
  }

  static CellAccess make(const BipartiteAdjacency& adj, bool sparse_engine) {
    return sparse_engine ? sparse(adj) : dense(adj);
  }

  bool is_sparse() const { return sparse_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t lines(Axis axis) const { return axis == Axis::rows ? n_rows_ : n_cols_; }
  std::size_t line_length(Axis axis) const { return axis == Axis::rows ? n_cols_ : n_rows_; }

  /// Statistics of one line split by the clusters of the crossing axis.
  ///
  /// `crossing_labels` labels the cells along the line, `crossing_counts`
  /// holds the cluster sizes; `out` must have one entry per crossing cluster.
  /// On sparse storage, `touched` (when given) marks the clusters that hold
  /// at least one stored cell of the line.
  template <class Model>
  void line_stats(const Model& model, Axis axis, std::size_t line,
                  std::span<const int> crossing_labels, std::span<const int> crossing_counts,
                  std::span<typename Model::Stats> out, std::vector<char>* touched = nullptr) const {
    for (auto& s : out) s = typename Model::Stats{};
    if (!sparse_) {
      const auto& values = axis == Axis::rows ? row_major_ : col_major_;
      const std::size_t len = line_length(axis);
      const double* cell = values.data() + line * len;
      for (std::size_t j = 0; j < len; ++j) model.add_cell(out[crossing_labels[j]], cell[j]);
      return;
    }
    const auto& c = axis == Axis::rows ? rows_ : cols_;
    for (auto e = c.offsets[line]; e < c.offsets[line + 1]; ++e) {
      model.add_cell(out[crossing_labels[c.index[e]]], c.value[e]);
    }
    if (touched) {
      touched->resize(out.size());
      for (std::size_t g = 0; g < out.size(); ++g) (*touched)[g] = out[g].size > 0;
    }
    for (std::size_t g = 0; g < out.size(); ++g) {
      model.add_zeros(out[g], crossing_counts[g] - out[g].size);
    }
  }

 private:
  struct Compressed {
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> index;
    std::vector<double> value;

    template <class Major, class Minor>
    static Compressed build(std::size_t lines, const std::vector<Triplet>& triplets, Major major,
                            Minor minor) {
      Compressed c;
      c.offsets.assign(lines + 1, 0);
      for (const auto& t : triplets) ++c.offsets[major(t) + 1];
      for (std::size_t l = 0; l < lines; ++l) c.offsets[l + 1] += c.offsets[l];
      c.index.resize(triplets.size());
      c.value.resize(triplets.size());
      auto next = c.offsets;
      // Triplets are row-major, so each line receives its cells in ascending minor order.
      for (const auto& t : triplets) {
        const auto slot = next[major(t)]++;
        c.index[slot] = static_cast<std::uint32_t>(minor(t));
        c.value[slot] = t.value;
      }
      return c;
    }
  };

  CellAccess(const BipartiteAdjacency& adj, bool sparse)
      : sparse_(sparse), n_rows_(adj.n_rows()), n_cols_(adj.n_cols()) {}

  bool sparse_ = false;
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<double> row_major_;
  std::vector<double> col_major_;
  Compressed rows_;
  Compressed cols_;
};

/// Per-cluster statistics of row `row`, in the module-level operation form.
template <class Model>
std::vector<typename Model::Stats> row_slice_stats(const Model& model, const CellAccess& cells,
                                                   std::size_t row, std::span<const int> col_labels,
                                                   std::span<const int> col_counts) {
  std::vector<typename Model::Stats> out(col_counts.size());
  cells.line_stats(model, Axis::rows, row, col_labels, col_counts,
                   std::span<typename Model::Stats>(out));
  return out;
}

}  // namespace greedy_icl
