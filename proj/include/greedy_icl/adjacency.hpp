// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace greedy_icl {

/// Malformed or out-of-domain input. Carries the source location when known.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

enum class ModelKind { bernoulli, categorical, poisson, gaussian };

inline std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::bernoulli: return "bernoulli";
    case ModelKind::categorical: return "categorical";
    case ModelKind::poisson: return "poisson";
    case ModelKind::gaussian: return "gaussian";
  }
  return "unknown";
}

inline ModelKind parse_model_kind(std::string_view name) {
  if (name == "bernoulli") return ModelKind::bernoulli;
  if (name == "categorical") return ModelKind::categorical;
  if (name == "poisson") return ModelKind::poisson;
  if (name == "gaussian") return ModelKind::gaussian;
  throw std::invalid_argument("unknown model kind: " + std::string(name));
}

/// Attribute model of the cells, with the category count for categorical data.
struct AttributeModel {
  ModelKind kind = ModelKind::bernoulli;
  int categories = 2;

  static AttributeModel bernoulli() { return {ModelKind::bernoulli, 2}; }
  static AttributeModel categorical(int c) { return {ModelKind::categorical, c}; }
  static AttributeModel poisson() { return {ModelKind::poisson, 0}; }
  static AttributeModel gaussian() { return {ModelKind::gaussian, 0}; }

  friend bool operator==(const AttributeModel&, const AttributeModel&) = default;
};

/// Empty string when `value` is admissible under `model`, otherwise the reason.
inline std::string domain_violation(const AttributeModel& model, double value) {
  const auto is_integer = [](double v) { return std::isfinite(v) && v == std::floor(v); };
  switch (model.kind) {
    case ModelKind::bernoulli:
      if (value != 0.0 && value != 1.0) return "bernoulli values must be 0 or 1";
      break;
    case ModelKind::categorical:
      if (!is_integer(value) || value < 0 || value >= model.categories) {
        return "categorical values must be integers in [0, " +
               std::to_string(model.categories - 1) + "]";
      }
      break;
    case ModelKind::poisson:
      if (!is_integer(value) || value < 0) return "poisson values must be non-negative integers";
      break;
    case ModelKind::gaussian:
      if (!std::isfinite(value)) return "gaussian values must be finite";
      break;
  }
  return {};
}

/// A stored nonzero cell, 0-based.
struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// N x M matrix of linking attributes between node set A (rows) and B (columns).
///
/// Backed either by a dense row-major grid or by a list of nonzero triplets;
/// unstored cells of a sparse matrix hold the non-tie value 0.
class BipartiteAdjacency {
 public:
  struct Dense {
    std::vector<double> values;
  };
  struct Sparse {
    std::vector<Triplet> entries;  // sorted by (row, col)
  };

  static BipartiteAdjacency dense(std::size_t n_rows, std::size_t n_cols,
                                  std::vector<double> values, AttributeModel model) {
    if (values.size() != n_rows * n_cols) {
      throw InputError("dense matrix needs " + std::to_string(n_rows * n_cols) +
                       " values, got " + std::to_string(values.size()));
    }
    for (std::size_t i = 0; i < n_rows; ++i) {
      for (std::size_t j = 0; j < n_cols; ++j) {
        check_value(model, values[i * n_cols + j], i, j);
      }
    }
    return BipartiteAdjacency(n_rows, n_cols, model, Dense{std::move(values)});
  }

  static BipartiteAdjacency sparse(std::size_t n_rows, std::size_t n_cols,
                                   std::vector<Triplet> entries, AttributeModel model) {
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return std::pair(a.row, a.col) < std::pair(b.row, b.col);
    });
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const auto& t = entries[e];
      if (t.row >= n_rows || t.col >= n_cols) {
        throw InputError("entry (" + std::to_string(t.row + 1) + "," + std::to_string(t.col + 1) +
                         ") out of range for " + std::to_string(n_rows) + "x" +
                         std::to_string(n_cols) + " matrix");
      }
      if (t.value == 0.0) {
        throw InputError("explicit zero stored at (" + std::to_string(t.row + 1) + "," +
                         std::to_string(t.col + 1) + "); zeros must be implicit");
      }
      if (e > 0 && entries[e - 1].row == t.row && entries[e - 1].col == t.col) {
        throw InputError("duplicate entry (" + std::to_string(t.row + 1) + "," +
                         std::to_string(t.col + 1) + ")");
      }
      check_value(model, t.value, t.row, t.col);
    }
    return BipartiteAdjacency(n_rows, n_cols, model, Sparse{std::move(entries)});
  }

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  const AttributeModel& model() const { return model_; }
  bool is_sparse() const { return std::holds_alternative<Sparse>(storage_); }

  /// Stored nonzero count for sparse backing; nonzero cells for dense backing.
  std::size_t nonzeros() const {
    if (const auto* s = std::get_if<Sparse>(&storage_)) return s->entries.size();
    std::size_t nz = 0;
    for (double v : std::get<Dense>(storage_).values) nz += v != 0.0;
    return nz;
  }

  /// Row-major N*M values.
  std::vector<double> to_dense_values() const {
    if (const auto* d = std::get_if<Dense>(&storage_)) return d->values;
    std::vector<double> out(n_rows_ * n_cols_, 0.0);
    for (const auto& t : std::get<Sparse>(storage_).entries) out[t.row * n_cols_ + t.col] = t.value;
    return out;
  }

  /// Nonzero cells in (row, col) order.
  std::vector<Triplet> to_triplets() const {
    if (const auto* s = std::get_if<Sparse>(&storage_)) return s->entries;
    std::vector<Triplet> out;
    const auto& values = std::get<Dense>(storage_).values;
    for (std::size_t i = 0; i < n_rows_; ++i) {
      for (std::size_t j = 0; j < n_cols_; ++j) {
        const double v = values[i * n_cols_ + j];
        if (v != 0.0) out.push_back({i, j, v});
      }
    }
    return out;
  }

  BipartiteAdjacency as_dense() const {
    return BipartiteAdjacency(n_rows_, n_cols_, model_, Dense{to_dense_values()});
  }
  BipartiteAdjacency as_sparse() const {
    return BipartiteAdjacency(n_rows_, n_cols_, model_, Sparse{to_triplets()});
  }

  BipartiteAdjacency transposed() const {
    auto entries = to_triplets();
    for (auto& t : entries) std::swap(t.row, t.col);
    auto out = sparse(n_cols_, n_rows_, std::move(entries), model_);
    return is_sparse() ? out : out.as_dense();
  }

  double at(std::size_t i, std::size_t j) const {
    if (const auto* d = std::get_if<Dense>(&storage_)) return d->values[i * n_cols_ + j];
    const auto& entries = std::get<Sparse>(storage_).entries;
    auto it = std::lower_bound(entries.begin(), entries.end(), std::pair(i, j),
                               [](const Triplet& t, const std::pair<std::size_t, std::size_t>& key) {
                                 return std::pair(t.row, t.col) < key;
                               });
    return (it != entries.end() && it->row == i && it->col == j) ? it->value : 0.0;
  }

  /// Cell-wise equality, independent of backing.
  friend bool operator==(const BipartiteAdjacency& a, const BipartiteAdjacency& b) {
    return a.n_rows_ == b.n_rows_ && a.n_cols_ == b.n_cols_ && a.model_ == b.model_ &&
           a.to_triplets() == b.to_triplets();
  }

 private:
  BipartiteAdjacency(std::size_t n, std::size_t m, AttributeModel model,
                     std::variant<Dense, Sparse> storage)
      : n_rows_(n), n_cols_(m), model_(model), storage_(std::move(storage)) {}

  static void check_value(const AttributeModel& model, double v, std::size_t i, std::size_t j) {
    if (auto why = domain_violation(model, v); !why.empty()) {
      std::ostringstream os;
      os << "value " << v << " at row " << i + 1 << ", col " << j + 1 << ": " << why;
      throw InputError(os.str());
    }
  }

  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  AttributeModel model_;
  std::variant<Dense, Sparse> storage_;
};

}  // namespace greedy_icl
