#include "nnq/stats.h"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nnq/random.h"

namespace nnq {

double mse(std::span<const double> predictions,
           std::span<const double> truths) {
  if (predictions.size() != truths.size()) {
    throw std::invalid_argument("mse: predictions and truths differ in length");
  }
  if (predictions.empty()) throw std::invalid_argument("mse: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - truths[i];
    total += d * d;
  }
  return total / static_cast<double>(predictions.size());
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean: empty input");
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double population_variance(std::span<const double> values) {
  const double m = mean(values);
  double total = 0.0;
  for (double v : values) total += (v - m) * (v - m);
  return total / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  if (std::all_of(values.begin(), values.end(),
                  [&](double v) { return v == values.front(); })) {
    return 0.0;
  }
  const double m = mean(values);
  double total = 0.0;
  for (double v : values) total += (v - m) * (v - m);
  return std::sqrt(total / static_cast<double>(values.size() - 1));
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return values[l] < values[r];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

namespace {

std::vector<double> centered(std::span<const double> v) {
  const double m = mean(v);
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x -= m;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
  return total;
}

}  // namespace

SpearmanResult spearman(std::span<const double> xs, std::span<const double> ys,
                        int permutations, std::uint64_t seed) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("spearman: inputs differ in length");
  }
  if (xs.size() < 3) {
    throw std::invalid_argument("spearman: need at least 3 pairs");
  }
  const auto rx = centered(average_ranks(xs));
  auto ry = centered(average_ranks(ys));
  const double sxx = dot(rx, rx);
  const double syy = dot(ry, ry);
  SpearmanResult result;
  if (sxx <= 0.0 || syy <= 0.0) return result;
  const double norm = std::sqrt(sxx * syy);
  const double rho = std::clamp(dot(rx, ry) / norm, -1.0, 1.0);
  result.rho = rho;
  if (permutations <= 0) return result;

  // Relative slack so permutations that tie the observed statistic count as
  // at least as extreme despite rounding.
  const double cutoff = std::abs(rho) - 1e-12;
  Rng rng(seed);
  int hits = 0;
  for (int p = 0; p < permutations; ++p) {
    rng.shuffle(std::span(ry));
    if (std::abs(dot(rx, ry) / norm) >= cutoff) ++hits;
  }
  result.p_value = (hits + 1.0) / (permutations + 1.0);
  return result;
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("welch_t_test: each sample needs >= 2 values");
  }
  const double ma = mean(a);
  const double mb = mean(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = population_variance(a) * na / (na - 1.0);
  const double vb = population_variance(b) * nb / (nb - 1.0);
  const double se2 = va / na + vb / nb;
  WelchResult result;
  if (se2 <= 0.0) {
    if (ma != mb) {
      throw std::invalid_argument(
          "welch_t_test: zero-variance samples with different means");
    }
    result.degrees_of_freedom = na + nb - 2.0;
    return result;
  }
  result.t_statistic = (ma - mb) / std::sqrt(se2);
  const double qa = va / na;
  const double qb = vb / nb;
  result.degrees_of_freedom =
      se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  const boost::math::students_t dist(result.degrees_of_freedom);
  result.p_value =
      std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(
                               dist, std::abs(result.t_statistic))));
  return result;
}

}  // namespace nnq
