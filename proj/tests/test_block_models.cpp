// Apache License, Version 2.0, refer to LICENSE.txt

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "greedy_icl/block_models.hpp"
#include "greedy_icl/cell_access.hpp"
#include "greedy_icl/oracles.hpp"
#include "test_util.hpp"

namespace greedy_icl {
namespace {

PriorConfig unit(ModelKind kind, int categories = 2) {
  return PriorConfig::defaults_for({kind, categories});
}

TEST(BlockMarginal, BernoulliSingleTie) {
  BernoulliModel m{BetaPrior{1.0}};
  EXPECT_NEAR(m.log_marginal({1, 1}), std::log(0.5), 1e-14);
}

TEST(BlockMarginal, BernoulliFourTies) {
  BernoulliModel m{BetaPrior{1.0}};
  EXPECT_NEAR(m.log_marginal({4, 4}), std::log(0.2), 1e-14);
}

TEST(BlockMarginal, PoissonSingleCount) {
  PoissonModel m{GammaPoissonPrior{1.0, 1.0}};
  const std::vector<double> y{2};
  EXPECT_NEAR(m.log_marginal(stats_of(m, std::span<const double>(y))), std::log(0.125), 1e-14);
}

TEST(BlockMarginal, GaussianSingleZero) {
  GaussianModel m{NormalGammaPrior{0.0, 1.0, 1.0, 1.0}};
  const std::vector<double> y{0.0};
  const double expected = -std::log(std::numbers::pi * std::sqrt(2.0));
  EXPECT_NEAR(m.log_marginal(stats_of(m, std::span<const double>(y))), expected, 1e-14);
  EXPECT_NEAR(expected, -1.491303, 1e-6);
}

TEST(BlockMarginal, EmptyBlockIsZero) {
  EXPECT_EQ(BernoulliModel(BetaPrior{}).log_marginal({}), 0.0);
  EXPECT_EQ(CategoricalModel(DirichletPrior{1.0, 3}).log_marginal({}), 0.0);
  EXPECT_EQ(PoissonModel(GammaPoissonPrior{}).log_marginal({}), 0.0);
  EXPECT_EQ(GaussianModel(NormalGammaPrior{}).log_marginal({}), 0.0);
}

TEST(BlockMarginal, PriorMismatchThrows) {
  EXPECT_THROW(BernoulliModel(unit(ModelKind::poisson)), std::invalid_argument);
  EXPECT_THROW(log_block_marginal<GaussianModel>({}, unit(ModelKind::bernoulli)), std::invalid_argument);
}

TEST(BlockMarginal, LargeBlocksStayFinite) {
  // Gamma of the block size overflows long before this.
  BernoulliModel m{BetaPrior{1.0}};
  const double v = m.log_marginal({100000, 31234});
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_LT(v, 0.0);
}

TEST(BlockMarginal, TablesMatchDirectEvaluation) {
  PoissonModel tabled{GammaPoissonPrior{0.7, 1.3}, TableSizes{500, 2000}};
  PoissonModel direct{GammaPoissonPrior{0.7, 1.3}};
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    PoissonModel::Stats s;
    const int n = std::uniform_int_distribution<int>(1, 400)(rng);
    for (int c = 0; c < n; ++c) tabled.add_cell(s, std::uniform_int_distribution<int>(0, 4)(rng));
    EXPECT_EQ(tabled.log_marginal(s), direct.log_marginal(s));
  }
}

TEST(BlockMarginal, CategoricalWithTwoCategoriesIsBernoulli) {
  std::mt19937_64 rng(11);
  for (double eta : {0.5, 1.0, 2.5}) {
    BernoulliModel b{BetaPrior{eta}};
    CategoricalModel c{DirichletPrior{eta, 2}};
    for (int t = 0; t < 50; ++t) {
      const auto values = test::random_values(rng, AttributeModel::bernoulli(), 1 + t % 30);
      EXPECT_EQ(b.log_marginal(stats_of(b, std::span<const double>(values))),
                c.log_marginal(stats_of(c, std::span<const double>(values))));
    }
  }
}

TEST(BlockMarginal, NotAdditiveOverSplits) {
  BernoulliModel m{BetaPrior{1.0}};
  const BernoulliModel::Stats a{3, 1}, b{4, 3};
  const double merged = m.log_marginal(merge_stats(m, a, b));
  EXPECT_GT(std::abs(merged - (m.log_marginal(a) + m.log_marginal(b))), 1e-3);
}

TEST(BlockMarginal, DirectFormulaAgreesOnRandomBlocks) {
  std::mt19937_64 rng(5);
  for (auto model : test::all_models()) {
    const auto prior = test::random_prior(rng, model);
    visit_model(prior, {}, [&](const auto& m) {
      for (int t = 0; t < 100; ++t) {
        const auto values = test::random_values(rng, model, 1 + t % 20);
        const double engine = m.log_marginal(stats_of(m, std::span<const double>(values)));
        EXPECT_NEAR(engine, oracle::direct_block_marginal(values, prior), 1e-9 * (1 + std::abs(engine)))
            << to_string(model.kind);
      }
      return 0;
    });
  }
}

TEST(Quadrature, BernoulliSingleTie) {
  const std::vector<double> y{1};
  EXPECT_NEAR(oracle::quadrature_block_marginal(y, unit(ModelKind::bernoulli)), std::log(0.5), 1e-8);
}

TEST(Quadrature, PoissonSingleCount) {
  const std::vector<double> y{2};
  EXPECT_NEAR(oracle::quadrature_block_marginal(y, unit(ModelKind::poisson)), std::log(0.125), 1e-6);
}

TEST(Quadrature, GaussianSingleZero) {
  const std::vector<double> y{0};
  EXPECT_NEAR(oracle::quadrature_block_marginal(y, unit(ModelKind::gaussian)),
              -std::log(std::numbers::pi * std::sqrt(2.0)), 1e-6);
}

TEST(Quadrature, CategoricalThreeCategories) {
  // Dirichlet(1,1,1) over counts (2,1,0): 2! 1! 0! 2! / 5! = 1/30.
  const std::vector<double> y{0, 0, 1};
  EXPECT_NEAR(oracle::quadrature_block_marginal(y, unit(ModelKind::categorical, 3)), std::log(1.0 / 30), 1e-8);
}

TEST(Quadrature, TinyRandomBlocksMatchClosedForm) {
  std::mt19937_64 rng(17);
  for (auto model : test::all_models()) {
    const auto prior = PriorConfig::defaults_for(model);
    visit_model(prior, {}, [&](const auto& m) {
      for (int cells : {1, 4}) {
        for (int t = 0; t < 5; ++t) {
          const auto values = test::random_values(rng, model, cells);
          EXPECT_NEAR(m.log_marginal(stats_of(m, std::span<const double>(values))),
                      oracle::quadrature_block_marginal(values, prior), 1e-6)
              << to_string(model.kind);
        }
      }
      return 0;
    });
  }
}

TEST(Quadrature, RejectsLargeBlocks) {
  const std::vector<double> y(9, 1.0);
  EXPECT_THROW(oracle::quadrature_block_marginal(y, unit(ModelKind::bernoulli)), std::invalid_argument);
}

TEST(Stats, BernoulliAddCell) {
  BernoulliModel m{BetaPrior{}};
  EXPECT_EQ(with_cell(m, {}, 1.0), (BernoulliModel::Stats{1, 1}));
}

TEST(Stats, PoissonAddCell) {
  PoissonModel m{GammaPoissonPrior{}};
  const PoissonModel::Stats s{2, 3, std::log(2.0)};
  const auto t = with_cell(m, s, 2.0);
  EXPECT_EQ(t.size, 3);
  EXPECT_EQ(t.sum, 5);
  EXPECT_NEAR(t.log_fact_sum, 2 * std::log(2.0), 1e-15);
}

TEST(Stats, RemoveUndoesAdd) {
  std::mt19937_64 rng(23);
  for (auto model : test::all_models()) {
    visit_model(PriorConfig::defaults_for(model), {}, [&](const auto& m) {
      for (int t = 0; t < 100; ++t) {
        const auto values = test::random_values(rng, model, 1 + t % 10);
        const auto base = stats_of(m, std::span<const double>(values));
        const double extra = test::random_values(rng, model, 1)[0];
        const auto back = without_cell(m, with_cell(m, base, extra), extra);
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, GaussianModel>) {
          EXPECT_EQ(back.size, base.size);
          EXPECT_NEAR(back.sum, base.sum, 1e-12 * (1 + std::abs(base.sum)));
          EXPECT_NEAR(back.sum_sq, base.sum_sq, 1e-12 * (1 + base.sum_sq));
        } else if constexpr (std::is_same_v<std::decay_t<decltype(m)>, PoissonModel>) {
          EXPECT_EQ(back.size, base.size);
          EXPECT_EQ(back.sum, base.sum);
          EXPECT_NEAR(back.log_fact_sum, base.log_fact_sum, 1e-12);
        } else {
          EXPECT_EQ(back, base);
        }
      }
      return 0;
    });
  }
}

TEST(Stats, BernoulliRemoveToEmpty) {
  BernoulliModel m{BetaPrior{}};
  EXPECT_EQ(without_cell(m, {1, 1}, 1.0), BernoulliModel::Stats{});
}

TEST(Stats, BernoulliUnderflowIsHardFailure) {
  BernoulliModel m{BetaPrior{}};
  EXPECT_THROW(without_cell(m, {1, 0}, 1.0), std::logic_error);
  EXPECT_THROW(without_cell(m, {}, 0.0), std::logic_error);
}

TEST(Stats, GaussianRemove) {
  GaussianModel m{NormalGammaPrior{}};
  const auto s = without_cell(m, {2, 3.0, 5.0}, 1.0);
  EXPECT_EQ(s.size, 1);
  EXPECT_DOUBLE_EQ(s.sum, 2.0);
  EXPECT_DOUBLE_EQ(s.sum_sq, 4.0);
}

TEST(Stats, MergeIdentityAndSum) {
  BernoulliModel m{BetaPrior{}};
  const BernoulliModel::Stats s{2, 1};
  EXPECT_EQ(merge_stats(m, {}, s), s);
  EXPECT_EQ(merge_stats(m, s, {2, 2}), (BernoulliModel::Stats{4, 3}));
}

TEST(Stats, MergeCommutesAndAssociates) {
  std::mt19937_64 rng(29);
  PoissonModel m{GammaPoissonPrior{}};
  for (int t = 0; t < 50; ++t) {
    std::vector<PoissonModel::Stats> s;
    for (int r = 0; r < 3; ++r) {
      const auto v = test::random_values(rng, AttributeModel::poisson(), 5);
      s.push_back(stats_of(m, std::span<const double>(v)));
    }
    const auto ab = merge_stats(m, s[0], s[1]), ba = merge_stats(m, s[1], s[0]);
    EXPECT_EQ(ab.size, ba.size);
    EXPECT_EQ(ab.sum, ba.sum);
    EXPECT_DOUBLE_EQ(ab.log_fact_sum, ba.log_fact_sum);
    const auto left = merge_stats(m, ab, s[2]), right = merge_stats(m, s[0], merge_stats(m, s[1], s[2]));
    EXPECT_EQ(left.sum, right.sum);
    EXPECT_NEAR(left.log_fact_sum, right.log_fact_sum, 1e-12);
  }
}

TEST(Stats, GaussianScaleMustBePositive) {
  GaussianModel m{NormalGammaPrior{}};
  // sum_sq below sum^2 / size is impossible for real data.
  EXPECT_THROW(m.log_marginal({2, 10.0, -100.0}), std::logic_error);
}

TEST(RowSlice, IdentityDenseRow) {
  const auto adj = BipartiteAdjacency::dense(2, 2, {1, 0, 0, 1}, AttributeModel::bernoulli());
  BernoulliModel m{BetaPrior{}};
  const auto cells = CellAccess::dense(adj);
  const std::vector<int> cols{0, 1}, counts{1, 1};
  const auto s = row_slice_stats(m, cells, 0, cols, counts);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], (BernoulliModel::Stats{1, 1}));
  EXPECT_EQ(s[1], (BernoulliModel::Stats{1, 0}));
  EXPECT_EQ(row_slice_stats(m, CellAccess::sparse(adj), 0, cols, counts), s);
}

TEST(RowSlice, SparseAndDenseAgreeOnRandomMatrices) {
  std::mt19937_64 rng(31);
  for (auto model : {AttributeModel::bernoulli(), AttributeModel::categorical(4), AttributeModel::poisson()}) {
    visit_model(PriorConfig::defaults_for(model), {}, [&](const auto& m) {
      for (int t = 0; t < 10; ++t) {
        const auto adj = test::random_adjacency(rng, model, 9, 13, 0.3);
        const auto dense = CellAccess::dense(adj), sparse = CellAccess::sparse(adj);
        const auto labels = random_labels(13, 4, rng);
        std::vector<int> counts;
        for (int l : labels) {
          if (l >= static_cast<int>(counts.size())) counts.resize(l + 1, 0);
          ++counts[l];
        }
        for (std::size_t i = 0; i < 9; ++i) {
          EXPECT_EQ(row_slice_stats(m, dense, i, labels, counts), row_slice_stats(m, sparse, i, labels, counts));
        }
      }
      return 0;
    });
  }
}

TEST(RowSlice, MovieLensRowCountsNonzeros) {
  const auto adj = test::movielens();
  PoissonModel m{GammaPoissonPrior{}};
  const auto sparse = CellAccess::sparse(adj);
  std::mt19937_64 rng(37);
  const auto labels = random_labels(adj.n_cols(), 20, rng);
  std::vector<int> counts(*std::max_element(labels.begin(), labels.end()) + 1, 0);
  for (int l : labels) ++counts[l];
  const auto dense_values = adj.to_dense_values();
  for (std::size_t row : {0u, 100u, 942u}) {
    const auto s = row_slice_stats(m, sparse, row, labels, counts);
    std::int64_t size = 0, sum = 0, nonzero = 0;
    for (std::size_t j = 0; j < adj.n_cols(); ++j) {
      const double v = dense_values[row * adj.n_cols() + j];
      nonzero += v != 0.0;
      sum += static_cast<std::int64_t>(v);
    }
    std::int64_t slice_sum = 0;
    for (const auto& b : s) {
      size += b.size;
      slice_sum += b.sum;
    }
    EXPECT_EQ(size, static_cast<std::int64_t>(adj.n_cols()));
    EXPECT_EQ(slice_sum, sum);
    EXPECT_GT(nonzero, 0);
  }
}

}  // namespace
}  // namespace greedy_icl
