// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "adjacency.hpp"

namespace greedy_icl {

/// Parameters of the latent blockmodel generator.
///
/// theta is K x G row-major; each block holds its model parameters:
/// bernoulli {p}, categorical {p_0, ..., p_{C-1}}, poisson {rate},
/// gaussian {mean, precision}.
struct GeneratorSpec {
  std::size_t n = 0;
  std::size_t m = 0;
  AttributeModel model = AttributeModel::bernoulli();
  std::vector<double> row_weights;
  std::vector<double> col_weights;
  std::vector<std::vector<double>> theta;
  std::uint64_t seed = 1;

  int k() const { return static_cast<int>(row_weights.size()); }
  int g() const { return static_cast<int>(col_weights.size()); }
  const std::vector<double>& block(int k, int g) const { return theta[k * col_weights.size() + g]; }

  void validate() const {
    const auto check_weights = [](const std::vector<double>& w, const char* name) {
      if (w.empty()) throw std::invalid_argument(std::string(name) + " weights are empty");
      double total = 0.0;
      for (double v : w) {
        if (!(v >= 0.0)) throw std::invalid_argument(std::string(name) + " weights must be >= 0");
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument(std::string(name) + " weights must sum to 1");
      }
    };
    check_weights(row_weights, "row");
    check_weights(col_weights, "column");
    if (theta.size() != row_weights.size() * col_weights.size()) {
      throw std::invalid_argument("theta must have K x G blocks");
    }
    for (const auto& t : theta) {
      switch (model.kind) {
        case ModelKind::bernoulli:
          if (t.size() != 1 || !(t[0] >= 0.0 && t[0] <= 1.0)) {
            throw std::invalid_argument("bernoulli block parameter must be a probability");
          }
          break;
        case ModelKind::categorical: {
          if (t.size() != static_cast<std::size_t>(model.categories)) {
            throw std::invalid_argument("categorical block needs one probability per category");
          }
          const double total = std::accumulate(t.begin(), t.end(), 0.0);
          for (double p : t) {
            if (!(p >= 0.0)) throw std::invalid_argument("category probabilities must be >= 0");
          }
          if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("category probabilities must sum to 1");
          break;
        }
        case ModelKind::poisson:
          if (t.size() != 1 || !(t[0] > 0.0)) throw std::invalid_argument("poisson rate must be positive");
          break;
        case ModelKind::gaussian:
          if (t.size() != 2 || !std::isfinite(t[0]) || !(t[1] > 0.0)) {
            throw std::invalid_argument("gaussian block needs a finite mean and positive precision");
          }
          break;
      }
    }
  }
};

struct SimulatedNetwork {
  BipartiteAdjacency adjacency;
  std::vector<int> row_labels;  // 0-based planted labels, not compacted
  std::vector<int> col_labels;
};

/// Draws labels from the weights and every cell from its block distribution.
inline SimulatedNetwork generate(const GeneratorSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::discrete_distribution<int> pick_row(spec.row_weights.begin(), spec.row_weights.end());
  std::discrete_distribution<int> pick_col(spec.col_weights.begin(), spec.col_weights.end());
  std::vector<int> rows(spec.n), cols(spec.m);
  for (auto& l : rows) l = pick_row(rng);
  for (auto& l : cols) l = pick_col(rng);

  std::vector<double> values(spec.n * spec.m, 0.0);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t j = 0; j < spec.m; ++j) {
      const auto& t = spec.block(rows[i], cols[j]);
      double& y = values[i * spec.m + j];
      switch (spec.model.kind) {
        case ModelKind::bernoulli: y = std::bernoulli_distribution(t[0])(rng) ? 1.0 : 0.0; break;
        case ModelKind::categorical: y = std::discrete_distribution<int>(t.begin(), t.end())(rng); break;
        case ModelKind::poisson: y = static_cast<double>(std::poisson_distribution<long>(t[0])(rng)); break;
        case ModelKind::gaussian: y = std::normal_distribution<double>(t[0], 1.0 / std::sqrt(t[1]))(rng); break;
      }
    }
  }
  return {BipartiteAdjacency::dense(spec.n, spec.m, std::move(values), spec.model), std::move(rows),
          std::move(cols)};
}

/// Planted-diagonal Bernoulli design: k x k blocks, uniform weights, tie
/// probability 1 - q on the diagonal blocks and q elsewhere.
inline GeneratorSpec diagonal_spec(std::size_t n, std::size_t m, int k, double q, std::uint64_t seed) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  GeneratorSpec spec;
  spec.n = n;
  spec.m = m;
  spec.model = AttributeModel::bernoulli();
  spec.row_weights.assign(k, 1.0 / k);
  spec.col_weights.assign(k, 1.0 / k);
  // 1/k in double does not always sum back to exactly 1; fold the residue into the last weight.
  const double residue = 1.0 - std::accumulate(spec.row_weights.begin(), spec.row_weights.end(), 0.0);
  spec.row_weights.back() += residue;
  spec.col_weights.back() += residue;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) spec.theta.push_back({a == b ? 1.0 - q : q});
  }
  spec.seed = seed;
  return spec;
}

}  // namespace greedy_icl
