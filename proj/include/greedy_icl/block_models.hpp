// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adjacency.hpp"
#include "config.hpp"

namespace greedy_icl {

/// lgamma(n + shift) for integer n, memoized for n below the table size.
///
/// Lookups return exactly what std::lgamma returns, so tabled and untabled
/// evaluation are interchangeable bit for bit.
class ShiftedLogGamma {
 public:
  ShiftedLogGamma() = default;
  ShiftedLogGamma(double shift, std::size_t table_size) : shift_(shift), table_(table_size) {
    for (std::size_t n = 0; n < table_size; ++n) table_[n] = std::lgamma(static_cast<double>(n) + shift_);
  }

  double operator()(std::int64_t n) const {
    return static_cast<std::size_t>(n) < table_.size() ? table_[n]
                                                       : std::lgamma(static_cast<double>(n) + shift_);
  }

 private:
  double shift_ = 0.0;
  std::vector<double> table_;
};

/// log(n + shift) for integer n, memoized like ShiftedLogGamma.
class ShiftedLog {
 public:
  ShiftedLog() = default;
  ShiftedLog(double shift, std::size_t table_size) : shift_(shift), table_(table_size) {
    for (std::size_t n = 0; n < table_size; ++n) table_[n] = std::log(static_cast<double>(n) + shift_);
  }

  double operator()(std::int64_t n) const {
    return static_cast<std::size_t>(n) < table_.size() ? table_[n]
                                                       : std::log(static_cast<double>(n) + shift_);
  }

 private:
  double shift_ = 0.0;
  std::vector<double> table_;
};

/// How far the memo tables of a model should extend. Zero disables tabling.
struct TableSizes {
  std::size_t max_cells = 0;  // largest block size, N * M
  std::size_t max_total = 0;  // largest block sum of counts (Poisson)
};

namespace detail {

template <class Alt>
const Alt& prior_as(const PriorConfig& prior, const char* model) {
  if (const auto* p = std::get_if<Alt>(&prior.model_prior)) return *p;
  throw std::invalid_argument(std::string("prior does not match the ") + model + " model");
}

[[noreturn]] inline void underflow(const char* what) {
  throw std::logic_error(std::string("block statistics underflow: ") + what);
}

// Tables are capped so that enormous matrices fall back to direct evaluation.
inline std::size_t table_extent(std::size_t wanted) {
  constexpr std::size_t kCap = std::size_t{1} << 24;
  return wanted == 0 ? 0 : std::min(wanted + 1, kCap);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Absent/present ties: Bernoulli likelihood, Beta(eta, eta) prior.

class BernoulliModel {
 public:
  struct Stats {
    std::int64_t size = 0;
    std::int64_t ones = 0;
    friend bool operator==(const Stats&, const Stats&) = default;
  };
  static constexpr ModelKind kind = ModelKind::bernoulli;

  explicit BernoulliModel(const PriorConfig& prior, TableSizes sizes = {})
      : BernoulliModel(detail::prior_as<BetaPrior>(prior, "bernoulli"), sizes) {}

  explicit BernoulliModel(BetaPrior prior, TableSizes sizes = {}) : prior_(prior) {
    const auto extent = detail::table_extent(sizes.max_cells);
    lg_eta_ = ShiftedLogGamma(prior.eta, extent);
    lg_two_eta_ = ShiftedLogGamma(2.0 * prior.eta, extent);
    constant_ = std::lgamma(2.0 * prior.eta) - 2 * std::lgamma(prior.eta);
  }

  const BetaPrior& prior() const { return prior_; }

  void add_cell(Stats& s, double v) const {
    ++s.size;
    s.ones += v != 0.0;
  }
  void remove_cell(Stats& s, double v) const {
    if (s.size < 1) detail::underflow("size");
    if (v != 0.0 && s.ones < 1) detail::underflow("ones");
    if (v == 0.0 && s.ones == s.size) detail::underflow("zeros");
    --s.size;
    s.ones -= v != 0.0;
  }
  void add_zeros(Stats& s, std::int64_t n) const { s.size += n; }

  static void merge_into(Stats& into, const Stats& other) {
    into.size += other.size;
    into.ones += other.ones;
  }
  static void subtract(Stats& from, const Stats& part) {
    from.size -= part.size;
    from.ones -= part.ones;
  }

  double log_marginal(const Stats& s) const {
    if (s.size == 0) return 0.0;
    return constant_ + lg_eta_(s.size - s.ones) + lg_eta_(s.ones) - lg_two_eta_(s.size);
  }

 private:
  BetaPrior prior_;
  double constant_ = 0.0;
  ShiftedLogGamma lg_eta_;
  ShiftedLogGamma lg_two_eta_;
};

// ---------------------------------------------------------------------------
// Categorical ties over {0, ..., C-1}: symmetric Dirichlet(zeta) prior.

class CategoricalModel {
 public:
  static constexpr int kMaxCategories = 64;

  /// counts[l] for l >= 1; category 0 is implicit as size - sum of the rest.
  struct Stats {
    std::int64_t size = 0;
    std::array<std::int64_t, kMaxCategories> counts{};
    friend bool operator==(const Stats&, const Stats&) = default;
  };
  static constexpr ModelKind kind = ModelKind::categorical;

  explicit CategoricalModel(const PriorConfig& prior, TableSizes sizes = {})
      : CategoricalModel(detail::prior_as<DirichletPrior>(prior, "categorical"), sizes) {}

  explicit CategoricalModel(DirichletPrior prior, TableSizes sizes = {}) : prior_(prior) {
    if (prior.categories < 2 || prior.categories > kMaxCategories) {
      throw std::invalid_argument("categorical model supports 2.." + std::to_string(kMaxCategories) +
                                  " categories");
    }
    const auto extent = detail::table_extent(sizes.max_cells);
    const double c = prior.categories;
    lg_zeta_ = ShiftedLogGamma(prior.zeta, extent);
    lg_c_zeta_ = ShiftedLogGamma(c * prior.zeta, extent);
    constant_ = std::lgamma(c * prior.zeta) - c * std::lgamma(prior.zeta);
  }

  const DirichletPrior& prior() const { return prior_; }
  int categories() const { return prior_.categories; }

  void add_cell(Stats& s, double v) const {
    ++s.size;
    if (const auto l = static_cast<int>(v); l > 0) ++s.counts[l];
  }
  void remove_cell(Stats& s, double v) const {
    if (s.size < 1) detail::underflow("size");
    const auto l = static_cast<int>(v);
    if (l > 0 && s.counts[l] < 1) detail::underflow("category count");
    if (l == 0 && zeros(s) < 1) detail::underflow("category 0 count");
    --s.size;
    if (l > 0) --s.counts[l];
  }
  void add_zeros(Stats& s, std::int64_t n) const { s.size += n; }

  void merge_into(Stats& into, const Stats& other) const {
    into.size += other.size;
    for (int l = 1; l < prior_.categories; ++l) into.counts[l] += other.counts[l];
  }
  void subtract(Stats& from, const Stats& part) const {
    from.size -= part.size;
    for (int l = 1; l < prior_.categories; ++l) from.counts[l] -= part.counts[l];
  }

  std::int64_t zeros(const Stats& s) const {
    std::int64_t rest = 0;
    for (int l = 1; l < prior_.categories; ++l) rest += s.counts[l];
    return s.size - rest;
  }

  double log_marginal(const Stats& s) const {
    if (s.size == 0) return 0.0;
    double out = constant_ + lg_zeta_(zeros(s));
    for (int l = 1; l < prior_.categories; ++l) out += lg_zeta_(s.counts[l]);
    return out - lg_c_zeta_(s.size);
  }

 private:
  DirichletPrior prior_;
  double constant_ = 0.0;
  ShiftedLogGamma lg_zeta_;
  ShiftedLogGamma lg_c_zeta_;
};

// ---------------------------------------------------------------------------
// Count ties: Poisson likelihood, Gamma(delta, rate gamma) prior.

class PoissonModel {
 public:
  struct Stats {
    std::int64_t size = 0;
    std::int64_t sum = 0;
    double log_fact_sum = 0.0;  // sum of log(y!)
    friend bool operator==(const Stats&, const Stats&) = default;
  };
  static constexpr ModelKind kind = ModelKind::poisson;

  explicit PoissonModel(const PriorConfig& prior, TableSizes sizes = {})
      : PoissonModel(detail::prior_as<GammaPoissonPrior>(prior, "poisson"), sizes) {}

  explicit PoissonModel(GammaPoissonPrior prior, TableSizes sizes = {}) : prior_(prior) {
    lg_delta_ = ShiftedLogGamma(prior.delta, detail::table_extent(sizes.max_total));
    log_gamma_ = ShiftedLog(prior.gamma, detail::table_extent(sizes.max_cells));
    log_fact_ = ShiftedLogGamma(1.0, 256);
    constant_ = prior.delta * std::log(prior.gamma) - std::lgamma(prior.delta);
  }

  const GammaPoissonPrior& prior() const { return prior_; }

  void add_cell(Stats& s, double v) const {
    const auto y = static_cast<std::int64_t>(v);
    ++s.size;
    s.sum += y;
    s.log_fact_sum += log_fact_(y);
  }
  void remove_cell(Stats& s, double v) const {
    const auto y = static_cast<std::int64_t>(v);
    if (s.size < 1) detail::underflow("size");
    if (s.sum < y) detail::underflow("sum");
    --s.size;
    s.sum -= y;
    s.log_fact_sum -= log_fact_(y);
    if (s.size == 0) s.log_fact_sum = 0.0;
  }
  void add_zeros(Stats& s, std::int64_t n) const { s.size += n; }

  static void merge_into(Stats& into, const Stats& other) {
    into.size += other.size;
    into.sum += other.sum;
    into.log_fact_sum += other.log_fact_sum;
  }
  static void subtract(Stats& from, const Stats& part) {
    from.size -= part.size;
    from.sum -= part.sum;
    from.log_fact_sum -= part.log_fact_sum;
  }

  double log_marginal(const Stats& s) const {
    if (s.size == 0) return 0.0;
    return constant_ + lg_delta_(s.sum) -
           (static_cast<double>(s.sum) + prior_.delta) * log_gamma_(s.size) - s.log_fact_sum;
  }

 private:
  GammaPoissonPrior prior_;
  double constant_ = 0.0;
  ShiftedLogGamma lg_delta_;
  ShiftedLog log_gamma_;
  ShiftedLogGamma log_fact_;
};

// ---------------------------------------------------------------------------
// Real-valued ties: Gaussian likelihood with a Normal-Gamma prior on (mu, tau).

class GaussianModel {
 public:
  struct Stats {
    std::int64_t size = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    friend bool operator==(const Stats&, const Stats&) = default;
  };
  static constexpr ModelKind kind = ModelKind::gaussian;

  explicit GaussianModel(const PriorConfig& prior, TableSizes sizes = {})
      : GaussianModel(detail::prior_as<NormalGammaPrior>(prior, "gaussian"), sizes) {}

  explicit GaussianModel(NormalGammaPrior prior, TableSizes sizes = {}) : prior_(prior) {
    const auto extent = detail::table_extent(sizes.max_cells);
    // lgamma((n + gamma) / 2) = lgamma(n' + gamma / 2) only for even n, so tabulate directly.
    half_lgamma_.resize(extent);
    for (std::size_t n = 0; n < extent; ++n) half_lgamma_[n] = half_lgamma_direct(static_cast<std::int64_t>(n));
    log_n_kappa_ = ShiftedLog(prior.kappa, extent);
    constant_ = 0.5 * std::log(prior.kappa) + 0.5 * prior.gamma * std::log(prior.delta) -
                std::lgamma(0.5 * prior.gamma);
  }

  const NormalGammaPrior& prior() const { return prior_; }

  void add_cell(Stats& s, double v) const {
    ++s.size;
    s.sum += v;
    s.sum_sq += v * v;
  }
  void remove_cell(Stats& s, double v) const {
    if (s.size < 1) detail::underflow("size");
    --s.size;
    s.sum -= v;
    s.sum_sq -= v * v;
    if (s.size == 0) s.sum = s.sum_sq = 0.0;
  }
  void add_zeros(Stats& s, std::int64_t n) const { s.size += n; }

  static void merge_into(Stats& into, const Stats& other) {
    into.size += other.size;
    into.sum += other.sum;
    into.sum_sq += other.sum_sq;
  }
  static void subtract(Stats& from, const Stats& part) {
    from.size -= part.size;
    from.sum -= part.sum;
    from.sum_sq -= part.sum_sq;
  }

  double log_marginal(const Stats& s) const {
    if (s.size == 0) return 0.0;
    const double n = static_cast<double>(s.size);
    const double n_kappa = n + prior_.kappa;
    const double centre = s.sum + prior_.kappa * prior_.xi;
    const double scale =
        s.sum_sq + prior_.kappa * prior_.xi * prior_.xi - centre * centre / n_kappa + prior_.delta;
    if (!(scale > 0.0)) throw std::logic_error("gaussian block posterior scale is not positive");
    const double half_lg = static_cast<std::size_t>(s.size) < half_lgamma_.size()
                               ? half_lgamma_[s.size]
                               : half_lgamma_direct(s.size);
    return constant_ - 0.5 * n * kLogPi -
           0.5 * log_n_kappa_(s.size) + half_lg - 0.5 * (n + prior_.gamma) * std::log(scale);
  }

 private:
  static constexpr double kLogPi = 1.1447298858494002;  // log(pi)

  double half_lgamma_direct(std::int64_t n) const {
    return std::lgamma(0.5 * (static_cast<double>(n) + prior_.gamma));
  }

  NormalGammaPrior prior_;
  double constant_ = 0.0;
  std::vector<double> half_lgamma_;
  ShiftedLog log_n_kappa_;
};

// ---------------------------------------------------------------------------
// Free-function surface over any model.

template <class Model>
typename Model::Stats merge_stats(const Model& model, typename Model::Stats a,
                                  const typename Model::Stats& b) {
  model.merge_into(a, b);
  return a;
}

template <class Model>
typename Model::Stats with_cell(const Model& model, typename Model::Stats s, double value) {
  model.add_cell(s, value);
  return s;
}

template <class Model>
typename Model::Stats without_cell(const Model& model, typename Model::Stats s, double value) {
  model.remove_cell(s, value);
  return s;
}

/// log Lambda of a block under `prior`; throws std::invalid_argument when the
/// prior belongs to a different model.
template <class Model>
double log_block_marginal(const typename Model::Stats& stats, const PriorConfig& prior) {
  return Model(prior).log_marginal(stats);
}

/// Sufficient statistics of an explicit list of cell values.
template <class Model>
typename Model::Stats stats_of(const Model& model, std::span<const double> values) {
  typename Model::Stats s;
  for (double v : values) model.add_cell(s, v);
  return s;
}

/// Memo-table extents suited to `adj`.
inline TableSizes table_sizes_for(const BipartiteAdjacency& adj) {
  TableSizes sizes;
  sizes.max_cells = adj.n_rows() * adj.n_cols();
  if (adj.model().kind == ModelKind::poisson) {
    double total = 0.0;
    for (const auto& t : adj.to_triplets()) total += t.value;
    sizes.max_total = static_cast<std::size_t>(total);
  }
  return sizes;
}

/// Calls `f(model)` with the concrete model selected by the prior.
template <class F>
decltype(auto) visit_model(const PriorConfig& prior, TableSizes sizes, F&& f) {
  switch (prior.kind()) {
    case ModelKind::bernoulli: return f(BernoulliModel(prior, sizes));
    case ModelKind::categorical: return f(CategoricalModel(prior, sizes));
    case ModelKind::poisson: return f(PoissonModel(prior, sizes));
    case ModelKind::gaussian: break;
  }
  return f(GaussianModel(prior, sizes));
}

}  // namespace greedy_icl
