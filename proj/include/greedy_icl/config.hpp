// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "adjacency.hpp"

namespace greedy_icl {

/// Symmetric Beta(eta, eta) on the tie probability.
struct BetaPrior {
  double eta = 1.0;
  friend bool operator==(const BetaPrior&, const BetaPrior&) = default;
};

/// Symmetric Dirichlet(zeta, ..., zeta) over `categories` outcomes.
struct DirichletPrior {
  double zeta = 1.0;
  int categories = 2;
  friend bool operator==(const DirichletPrior&, const DirichletPrior&) = default;
};

/// Gamma(shape delta, rate gamma) on the Poisson rate.
struct GammaPoissonPrior {
  double delta = 1.0;
  double gamma = 1.0;
  friend bool operator==(const GammaPoissonPrior&, const GammaPoissonPrior&) = default;
};

/// mu | tau ~ N(xi, 1/(kappa tau)), tau ~ Gamma(gamma/2, rate delta/2).
struct NormalGammaPrior {
  double xi = 0.0;
  double kappa = 1.0;
  double gamma = 1.0;
  double delta = 1.0;
  friend bool operator==(const NormalGammaPrior&, const NormalGammaPrior&) = default;
};

using ModelPrior = std::variant<BetaPrior, DirichletPrior, GammaPoissonPrior, NormalGammaPrior>;

struct PriorConfig {
  double alpha0 = 1.0;  // Dirichlet concentration of the row-cluster weights
  double beta0 = 1.0;   // and of the column-cluster weights
  ModelPrior model_prior = BetaPrior{};

  ModelKind kind() const {
    switch (model_prior.index()) {
      case 0: return ModelKind::bernoulli;
      case 1: return ModelKind::categorical;
      case 2: return ModelKind::poisson;
      default: return ModelKind::gaussian;
    }
  }

  /// Unit hyperparameters for the given attribute model.
  static PriorConfig defaults_for(const AttributeModel& model) {
    PriorConfig p;
    switch (model.kind) {
      case ModelKind::bernoulli: p.model_prior = BetaPrior{}; break;
      case ModelKind::categorical: p.model_prior = DirichletPrior{1.0, model.categories}; break;
      case ModelKind::poisson: p.model_prior = GammaPoissonPrior{}; break;
      case ModelKind::gaussian: p.model_prior = NormalGammaPrior{}; break;
    }
    return p;
  }

  void validate() const {
    const auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(name) + " must be a positive finite number");
      }
    };
    positive(alpha0, "alpha0");
    positive(beta0, "beta0");
    std::visit(
        [&](const auto& prior) {
          using P = std::decay_t<decltype(prior)>;
          if constexpr (std::is_same_v<P, BetaPrior>) {
            positive(prior.eta, "eta");
          } else if constexpr (std::is_same_v<P, DirichletPrior>) {
            positive(prior.zeta, "zeta");
            if (prior.categories < 2) throw std::invalid_argument("categories must be >= 2");
          } else if constexpr (std::is_same_v<P, GammaPoissonPrior>) {
            positive(prior.delta, "delta");
            positive(prior.gamma, "gamma");
          } else {
            if (!std::isfinite(prior.xi)) throw std::invalid_argument("xi must be finite");
            positive(prior.kappa, "kappa");
            positive(prior.gamma, "gamma");
            positive(prior.delta, "delta");
          }
        },
        model_prior);
  }

  friend bool operator==(const PriorConfig&, const PriorConfig&) = default;
};

/// Greedy search settings. The four algorithm variants are
/// A0 = {pruning off, dense}, A1 = {off, sparse}, A2 = {on, dense}, A3 = {on, sparse}.
struct SearchConfig {
  int k_init = 0;  // 0 selects min(N, 50)
  int g_init = 0;  // 0 selects min(M, 50)
  bool pruning = false;
  bool sparse_engine = false;
  double prune_threshold = 150.0;
  int prune_warmup_sweeps = 5;
  int max_sweeps = 200;
  int restarts = 1;
  std::uint64_t rng_seed = 1;
  int threads = 1;

  static constexpr int kDefaultMaxClusters = 50;

  int resolved_k(std::size_t n_rows) const {
    return k_init > 0 ? k_init : static_cast<int>(std::min<std::size_t>(n_rows, kDefaultMaxClusters));
  }
  int resolved_g(std::size_t n_cols) const {
    return g_init > 0 ? g_init : static_cast<int>(std::min<std::size_t>(n_cols, kDefaultMaxClusters));
  }

  void validate(std::size_t n_rows, std::size_t n_cols) const {
    if (n_rows == 0 || n_cols == 0) throw std::invalid_argument("adjacency must be non-empty");
    if (k_init < 0 || static_cast<std::size_t>(resolved_k(n_rows)) > n_rows) {
      throw std::invalid_argument("k_init must lie in [1, N]");
    }
    if (g_init < 0 || static_cast<std::size_t>(resolved_g(n_cols)) > n_cols) {
      throw std::invalid_argument("g_init must lie in [1, M]");
    }
    if (!(prune_threshold > 0.0)) throw std::invalid_argument("prune_threshold must be positive");
    if (prune_warmup_sweeps < 0) throw std::invalid_argument("prune_warmup_sweeps must be >= 0");
    if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
    if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  }

  /// Variant name, A0 to A3.
  std::string variant_name() const {
    return std::string("A") + std::to_string((pruning ? 2 : 0) + (sparse_engine ? 1 : 0));
  }

  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

}  // namespace greedy_icl
