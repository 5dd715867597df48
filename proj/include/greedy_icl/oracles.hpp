// Apache License, Version 2.0, refer to LICENSE.txt

// Brute-force references for validating the incremental machinery. They
// recompute everything from the raw cells and are meant for tiny inputs.

#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adjacency.hpp"
#include "config.hpp"
#include "partition.hpp"

namespace greedy_icl::oracle {

namespace detail {

inline double dirichlet_multinomial_direct(const std::vector<int>& counts, double conc) {
  // Written out term by term rather than calling the engine's version.
  const int k = static_cast<int>(counts.size());
  int n = 0;
  double log_num = std::lgamma(conc * k);
  for (int c : counts) {
    log_num += std::lgamma(c + conc) - std::lgamma(conc);
    n += c;
  }
  return log_num - std::lgamma(n + conc * k);
}

}  // namespace detail

/// log Lambda of a block written directly from its cell values, with no
/// sufficient-statistics machinery.
inline double direct_block_marginal(std::span<const double> values, const PriorConfig& prior) {
  if (values.empty()) return 0.0;
  const double n = static_cast<double>(values.size());
  switch (prior.kind()) {
    case ModelKind::bernoulli: {
      const double eta = std::get<BetaPrior>(prior.model_prior).eta;
      double ones = 0.0;
      for (double y : values) ones += y;
      return std::lgamma(2 * eta) - 2 * std::lgamma(eta) + std::lgamma(ones + eta) +
             std::lgamma(n - ones + eta) - std::lgamma(n + 2 * eta);
    }
    case ModelKind::categorical: {
      const auto& d = std::get<DirichletPrior>(prior.model_prior);
      std::vector<double> counts(d.categories, 0.0);
      for (double y : values) counts[static_cast<std::size_t>(y)] += 1;
      double out = std::lgamma(d.categories * d.zeta) - std::lgamma(n + d.categories * d.zeta);
      for (double c : counts) out += std::lgamma(c + d.zeta) - std::lgamma(d.zeta);
      return out;
    }
    case ModelKind::poisson: {
      const auto& p = std::get<GammaPoissonPrior>(prior.model_prior);
      double sum = 0.0, log_fact = 0.0;
      for (double y : values) {
        sum += y;
        log_fact += std::lgamma(y + 1);
      }
      return p.delta * std::log(p.gamma) - std::lgamma(p.delta) + std::lgamma(sum + p.delta) -
             (sum + p.delta) * std::log(n + p.gamma) - log_fact;
    }
    case ModelKind::gaussian: break;
  }
  const auto& p = std::get<NormalGammaPrior>(prior.model_prior);
  double mean = 0.0;
  for (double y : values) mean += y / n;
  double scatter = 0.0;
  for (double y : values) scatter += (y - mean) * (y - mean);
  // Posterior rate written through the centred scatter rather than raw moments.
  const double rate = p.delta + scatter + p.kappa * n * (mean - p.xi) * (mean - p.xi) / (p.kappa + n);
  return -0.5 * n * std::log(std::numbers::pi) + 0.5 * std::log(p.kappa / (p.kappa + n)) +
         std::lgamma(0.5 * (p.gamma + n)) - std::lgamma(0.5 * p.gamma) + 0.5 * p.gamma * std::log(p.delta) -
         0.5 * (p.gamma + n) * std::log(rate);
}

/// Exact ICL of labels (c, w), recomputed from every cell of `adj`. Labels
/// need not be compact; unused label values are ignored.
inline double scratch_icl(const BipartiteAdjacency& adj, const PriorConfig& prior, std::span<const int> rows,
                          std::span<const int> cols) {
  auto p = Partition::from_labels({rows.begin(), rows.end()}, {cols.begin(), cols.end()});
  const auto values = adj.to_dense_values();
  std::vector<std::vector<double>> blocks(static_cast<std::size_t>(p.k()) * p.g());
  for (std::size_t i = 0; i < adj.n_rows(); ++i) {
    for (std::size_t j = 0; j < adj.n_cols(); ++j) {
      blocks[p.rows[i] * p.g() + p.cols[j]].push_back(values[i * adj.n_cols() + j]);
    }
  }
  double total = detail::dirichlet_multinomial_direct(p.row_counts, prior.alpha0) +
                 detail::dirichlet_multinomial_direct(p.col_counts, prior.beta0);
  for (const auto& b : blocks) total += direct_block_marginal(b, prior);
  return total;
}

struct ExhaustiveResult {
  double icl = -std::numeric_limits<double>::infinity();
  Partition best;
  std::uint64_t evaluated = 0;
};

/// Maximum ICL over every labelling with at most k_max row and g_max column
/// clusters. Refuses search spaces above 10^7 labellings.
inline ExhaustiveResult exhaustive_icl_max(const BipartiteAdjacency& adj, const PriorConfig& prior,
                                           int k_max, int g_max) {
  constexpr double kCap = 1e7;
  const double space = std::pow(k_max, static_cast<double>(adj.n_rows())) *
                       std::pow(g_max, static_cast<double>(adj.n_cols()));
  if (k_max < 1 || g_max < 1) throw std::invalid_argument("cluster bounds must be >= 1");
  if (space > kCap) {
    throw std::invalid_argument("exhaustive search space of " + std::to_string(space) +
                                " labellings exceeds the 1e7 cap");
  }
  const std::size_t n = adj.n_rows(), m = adj.n_cols();
  std::vector<int> labels(n + m, 0);
  const auto advance = [&] {
    for (std::size_t p = 0; p < labels.size(); ++p) {
      const int bound = p < n ? k_max : g_max;
      if (++labels[p] < bound) return true;
      labels[p] = 0;
    }
    return false;
  };
  ExhaustiveResult out;
  do {
    const std::span<const int> rows(labels.data(), n), cols(labels.data() + n, m);
    const double v = scratch_icl(adj, prior, rows, cols);
    ++out.evaluated;
    if (v > out.icl) {
      out.icl = v;
      out.best = Partition::from_labels({rows.begin(), rows.end()}, {cols.begin(), cols.end()});
    }
  } while (advance());
  return out;
}

namespace detail {

constexpr double kQuadratureTolerance = 1e-11;

template <class F>
double integrate_interval(F f, double a, double b) {
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, kQuadratureTolerance, &error);
  if (!(error <= 1e-7 * std::abs(value)) && !(error < 1e-300)) {
    throw std::runtime_error("quadrature did not converge");
  }
  return value;
}

template <class F>
double integrate_half_line(F f) {
  boost::math::quadrature::exp_sinh<double> rule;
  double error = 0.0, l1 = 0.0;
  std::size_t levels = 0;
  const double value = rule.integrate(f, kQuadratureTolerance, &error, &l1, &levels);
  if (!(error <= 1e-7 * std::abs(value))) throw std::runtime_error("quadrature did not converge");
  return value;
}

// Integral over the probability simplex of dimension `c` using stick-breaking
// coordinates; f receives the full probability vector.
inline double integrate_simplex(int c, const std::function<double(const std::vector<double>&)>& f) {
  std::vector<double> theta(c, 0.0);
  std::function<double(int, double)> level = [&](int idx, double remaining) -> double {
    if (idx == c - 1) {
      theta[idx] = remaining;
      return f(theta);
    }
    return integrate_interval(
        [&, idx, remaining](double t) {
          theta[idx] = t;
          return level(idx + 1, remaining - t);
        },
        0.0, remaining);
  };
  return level(0, 1.0);
}

}  // namespace detail

/// log of the block marginal likelihood obtained by numerically integrating
/// prior x likelihood over the block parameter. For at most 8 cells with
/// hyperparameters of order one.
inline double quadrature_block_marginal(std::span<const double> values, const PriorConfig& prior) {
  using detail::integrate_half_line;
  using detail::integrate_interval;
  if (values.size() > 8) throw std::invalid_argument("quadrature oracle takes at most 8 cells");
  if (values.empty()) return 0.0;

  switch (prior.kind()) {
    case ModelKind::bernoulli: {
      const double eta = std::get<BetaPrior>(prior.model_prior).eta;
      const double log_norm = std::lgamma(2 * eta) - 2 * std::lgamma(eta);
      return std::log(integrate_interval(
          [&](double t) {
            double like = std::exp(log_norm + (eta - 1) * (std::log(t) + std::log1p(-t)));
            for (double y : values) like *= y != 0.0 ? t : 1.0 - t;
            return like;
          },
          0.0, 1.0));
    }
    case ModelKind::categorical: {
      const auto& d = std::get<DirichletPrior>(prior.model_prior);
      const double log_norm = std::lgamma(d.categories * d.zeta) - d.categories * std::lgamma(d.zeta);
      return std::log(detail::integrate_simplex(d.categories, [&](const std::vector<double>& theta) {
        double log_density = log_norm;
        for (double t : theta) log_density += (d.zeta - 1) * std::log(t);
        double like = std::exp(log_density);
        for (double y : values) like *= theta[static_cast<int>(y)];
        return like;
      }));
    }
    case ModelKind::poisson: {
      const auto& p = std::get<GammaPoissonPrior>(prior.model_prior);
      return std::log(integrate_half_line([&](double rate) {
        double log_f = p.delta * std::log(p.gamma) - std::lgamma(p.delta) + (p.delta - 1) * std::log(rate) -
                       p.gamma * rate;
        for (double y : values) log_f += y * std::log(rate) - rate - std::lgamma(y + 1);
        return std::exp(log_f);
      }));
    }
    case ModelKind::gaussian: break;
  }

  const auto& p = std::get<NormalGammaPrior>(prior.model_prior);
  double n = 0.0, sum = 0.0;
  for (double y : values) {
    n += 1;
    sum += y;
  }
  // The mean axis is integrated on a grid centred where the integrand peaks,
  // 14 standard deviations each way, which leaves a tail mass far below 1e-10.
  const double centre = (p.kappa * p.xi + sum) / (p.kappa + n);
  constexpr double kHalfWidth = 14.0;
  const auto log_gaussian = [](double y, double mean, double precision) {
    return 0.5 * std::log(precision / (2 * std::numbers::pi)) - 0.5 * precision * (y - mean) * (y - mean);
  };
  const double a = 0.5 * p.gamma, b = 0.5 * p.delta;
  return std::log(integrate_half_line([&](double tau) {
    const double spread = 1.0 / std::sqrt(tau * (p.kappa + n));
    const double log_tau_prior = a * std::log(b) - std::lgamma(a) + (a - 1) * std::log(tau) - b * tau;
    return spread * integrate_interval(
                        [&](double u) {
                          const double mu = centre + u * spread;
                          double log_f = log_tau_prior + log_gaussian(mu, p.xi, p.kappa * tau);
                          for (double y : values) log_f += log_gaussian(y, mu, tau);
                          return std::exp(log_f);
                        },
                        -kHalfWidth, kHalfWidth);
  }));
}

}  // namespace greedy_icl::oracle
