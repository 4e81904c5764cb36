#include "nnq/stats.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "oracle.h"

namespace nnq {
namespace {

using V = std::vector<double>;

TEST(Mse, Examples) {
  EXPECT_EQ(mse(V{0.3, 0.7}, V{0.3, 0.7}), 0.0);
  EXPECT_EQ(mse(V{0.5, 0.5}, V{0.0, 1.0}), 0.25);
  EXPECT_NEAR(mse(V{0.1, 0.9, 0.5}, V{0.2, 0.7, 0.5}), 0.05 / 3, 1e-15);
  EXPECT_NEAR(mse(V{0.1, 0.9, 0.5}, V{0.2, 0.7, 0.5}), 0.01667, 1e-5);
}

TEST(Mse, RejectsBadInput) {
  EXPECT_THROW(mse(V{}, V{}), std::invalid_argument);
  EXPECT_THROW(mse(V{1.0}, V{1.0, 2.0}), std::invalid_argument);
}

TEST(Moments, MeanVarianceStddev) {
  EXPECT_EQ(mean(V{1, 2, 3}), 2.0);
  EXPECT_DOUBLE_EQ(population_variance(V{1, 2, 3}), 2.0 / 3);
  EXPECT_DOUBLE_EQ(sample_stddev(V{1, 2, 3}), 1.0);
  EXPECT_EQ(sample_stddev(V{4.0}), 0.0);
  EXPECT_EQ(sample_stddev(V{0.1, 0.1, 0.1}), 0.0);
}

TEST(AverageRanks, TiesShareTheMeanRank) {
  EXPECT_EQ(average_ranks(V{10, 20, 20, 5}), (V{2, 3.5, 3.5, 1}));
}

TEST(Spearman, Examples) {
  const V xs{1, 2, 3, 4, 5};
  EXPECT_EQ(*spearman(xs, xs, 0).rho, 1.0);
  EXPECT_EQ(*spearman(xs, V{5, 4, 3, 2, 1}, 0).rho, -1.0);
  EXPECT_DOUBLE_EQ(*spearman(V{1, 2, 3}, V{3, 1, 2}, 0).rho, -0.5);
}

TEST(Spearman, UndefinedForConstantInput) {
  const auto r = spearman(V{1, 2, 3}, V{4, 4, 4});
  EXPECT_FALSE(r.rho.has_value());
  EXPECT_FALSE(r.p_value.has_value());
}

TEST(Spearman, RejectsBadInput) {
  EXPECT_THROW(spearman(V{1, 2}, V{1, 2}), std::invalid_argument);
  EXPECT_THROW(spearman(V{1, 2, 3}, V{1, 2}), std::invalid_argument);
}

TEST(Spearman, ClosedFormOnAllPermutationsOfFive) {
  V xs{1, 2, 3, 4, 5};
  V ys = xs;
  int cases = 0;
  do {
    EXPECT_NEAR(*spearman(xs, ys, 0).rho, oracle::spearman_no_ties(xs, ys),
                1e-12);
    ++cases;
  } while (std::next_permutation(ys.begin(), ys.end()));
  EXPECT_EQ(cases, 120);
}

TEST(Spearman, TiesMatchCountingOracle) {
  const V xs{0.2, 0.2, 0.5, 0.1, 0.5, 0.9, 0.3};
  const V ys{1, 3, 3, 0, 2, 5, 1};
  EXPECT_NEAR(*spearman(xs, ys, 0).rho, *oracle::spearman_by_counting(xs, ys),
              1e-12);
}

TEST(Spearman, PermutationPValue) {
  V xs(20);
  std::iota(xs.begin(), xs.end(), 0.0);
  const auto strong = spearman(xs, xs, 10000, 7);
  EXPECT_LE(*strong.p_value, 0.001);
  EXPECT_GE(*strong.p_value, 1.0 / 10001);
  const auto same = spearman(xs, xs, 10000, 7);
  EXPECT_EQ(strong.p_value, same.p_value);
  const V noise{3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3, 2, 3, 8, 4};
  const auto weak = spearman(xs, noise, 2000, 7);
  EXPECT_GT(*weak.p_value, 0.01);
  EXPECT_LE(*weak.p_value, 1.0);
}

TEST(Welch, KnownValue) {
  // Means 2 and 5, both sample variances 1, n = 3: t = -3 / sqrt(2/3),
  // df = 4.
  const auto r = welch_t_test(V{1, 2, 3}, V{4, 5, 6});
  EXPECT_NEAR(r.t_statistic, -3.0 / std::sqrt(2.0 / 3), 1e-12);
  EXPECT_NEAR(r.degrees_of_freedom, 4.0, 1e-12);
  // Two-sided p for |t| = 3.6742 on 4 df.
  EXPECT_NEAR(r.p_value, 0.021311641128756, 1e-9);
}

TEST(Welch, IdenticalSamples) {
  const auto r = welch_t_test(V{1, 2, 3}, V{1, 2, 3});
  EXPECT_EQ(r.t_statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Welch, Degenerate) {
  EXPECT_THROW(welch_t_test(V{1}, V{1, 2}), std::invalid_argument);
  EXPECT_THROW(welch_t_test(V{1, 1}, V{2, 2}), std::invalid_argument);
  EXPECT_EQ(welch_t_test(V{1, 1}, V{1, 1}).p_value, 1.0);
}

}  // namespace
}  // namespace nnq
