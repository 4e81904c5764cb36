#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace nnq {

// Mean of squared differences. Throws std::invalid_argument on empty or
// mismatched inputs.
double mse(std::span<const double> predictions, std::span<const double> truths);

double mean(std::span<const double> values);
double population_variance(std::span<const double> values);
// n - 1 denominator; 0 for fewer than two values.
double sample_stddev(std::span<const double> values);

// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

struct SpearmanResult {
  // Empty when either input is constant.
  std::optional<double> rho;
  // Two-sided permutation p-value, (hits + 1) / (permutations + 1). Empty
  // when rho is undefined or no permutations were requested.
  std::optional<double> p_value;
};

inline constexpr int kDefaultPermutations = 10'000;

// Pearson correlation of average ranks. Throws std::invalid_argument unless
// both inputs have the same length >= 3.
SpearmanResult spearman(std::span<const double> xs, std::span<const double> ys,
                        int permutations = kDefaultPermutations,
                        std::uint64_t seed = 0);

struct WelchResult {
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
};

// Two-sided Welch t-test for a difference in means. Needs at least two values
// per sample; throws std::invalid_argument otherwise, or when both samples
// have zero variance but different means.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace nnq
