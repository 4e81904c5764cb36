#include "nnq/estimator.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <memory>
#include <set>

#include "nnq/random.h"
#include "oracle.h"
#include "synthetic.h"

namespace nnq {
namespace {

EstimatorConfig config_with(double tau, int a, double b) {
  EstimatorConfig c;
  c.tau = tau;
  c.min_neighbors = a;
  c.max_neighbor_frac = b;
  return c;
}

TEST(EstimatorConfig, Defaults) {
  const EstimatorConfig c;
  EXPECT_EQ(c.kernel, KernelKind::kBleuStar);
  EXPECT_EQ(c.tau, 0.08);
  EXPECT_EQ(c.min_neighbors, 5);
  EXPECT_EQ(c.max_neighbor_frac, 0.66);
  EXPECT_EQ(EstimatorConfig::for_kernel(KernelKind::kRougeL).tau, 0.06);
  EXPECT_EQ(EstimatorConfig::for_kernel(KernelKind::kMeteorLite).tau, 0.18);
}

TEST(EstimatorConfig, Validation) {
  EXPECT_THROW(config_with(1.5, 5, 0.5).validate(), std::invalid_argument);
  EXPECT_THROW(config_with(0.1, 0, 0.5).validate(), std::invalid_argument);
  EXPECT_THROW(config_with(0.1, 1, 1.2).validate(), std::invalid_argument);
  auto c = config_with(0.1, 1, 1.0);
  c.train_subsample_frac = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.train_subsample_frac.reset();
  c.kernel = KernelKind::kExternal;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(EstimatorConfig, NamesRoundTrip) {
  for (auto k : {KernelKind::kBleuStar, KernelKind::kBleu4, KernelKind::kRougeL,
                 KernelKind::kMeteorLite, KernelKind::kExternal}) {
    EXPECT_EQ(parse_kernel(kernel_name(k)), k);
  }
  EXPECT_THROW(parse_kernel("cosine"), std::invalid_argument);
  EXPECT_EQ(parse_rejection(rejection_name(Rejection::kTooMany)),
            Rejection::kTooMany);
}

TEST(ScoredExample, QualityMustBeNormalized) {
  EXPECT_THROW(make_scored_example("a", "x", 1.5), std::invalid_argument);
  EXPECT_THROW(make_scored_example("a", "x", -0.1), std::invalid_argument);
}

TEST(FindNeighbors, ZeroThresholdAdmitsAll) {
  const auto train = synthetic::random_corpus(12, 3);
  const auto x = Document("x", "w1 w2 w3 w4");
  EXPECT_EQ(find_neighbors(x, train, config_with(0.0, 1, 1.0)).size(), 12u);
}

TEST(FindNeighbors, OrderedByScoreThenId) {
  std::vector<ScoredExample> train = {
      make_scored_example("b", "a b c d e", 0.1),
      make_scored_example("a", "a b c d e", 0.2),
      make_scored_example("c", "a b c d z", 0.3),
  };
  const auto n = find_neighbors(Document("x", "a b c d e"), train,
                                config_with(0.0, 1, 1.0));
  ASSERT_EQ(n.size(), 3u);
  EXPECT_EQ(n[0].id, "a");
  EXPECT_EQ(n[1].id, "b");
  EXPECT_EQ(n[2].id, "c");
  EXPECT_EQ(n[0].score, 1.0);
  EXPECT_LT(n[2].score, 1.0);
}

// Three examples where only the first two pass tau = 0.08, as in the
// worked illustration of the method.
std::vector<ScoredExample> three_examples() {
  return {
      make_scored_example("s1", "the cat sat on the mat today", 0.2),
      make_scored_example("s2", "a cat sat on the mat", 0.4),
      make_scored_example("s3", "dogs are lazy and slow", 0.9),
  };
}

TEST(Estimate, ThreeExampleWalkthrough) {
  const auto train = three_examples();
  const Document x("x", "the cat sat on the mat");
  const auto cfg = config_with(0.08, 1, 1.0);
  const auto n = find_neighbors(x, train, cfg);
  std::set<std::string> ids;
  for (const auto& nb : n) ids.insert(nb.id);
  EXPECT_EQ(ids, (std::set<std::string>{"s1", "s2"}));
  const auto p = estimate(x, train, cfg);
  ASSERT_TRUE(p.defined());
  EXPECT_DOUBLE_EQ(*p.estimate, 0.3);
  EXPECT_EQ(p.neighbor_count, 2u);
  EXPECT_FALSE(p.rejection.has_value());
}

TEST(Estimate, IdenticalNeighborQualities) {
  std::vector<ScoredExample> train;
  for (int i = 0; i < 5; ++i) {
    train.push_back(make_scored_example("s" + std::to_string(i),
                                        "one two three four five", 0.6));
  }
  const auto p = estimate(Document("x", "one two three four five"), train,
                          config_with(0.08, 5, 1.0));
  ASSERT_TRUE(p.defined());
  EXPECT_EQ(*p.estimate, 0.6);
}

TEST(Estimate, TooFew) {
  std::vector<ScoredExample> train;
  for (int i = 0; i < 4; ++i) {
    train.push_back(make_scored_example("s" + std::to_string(i),
                                        "one two three four five", 0.6));
  }
  const auto p = estimate(Document("x", "one two three four five"), train,
                          config_with(0.08, 5, 1.0));
  EXPECT_FALSE(p.defined());
  EXPECT_EQ(p.rejection, Rejection::kTooFew);
  EXPECT_EQ(p.neighbor_count, 4u);
}

TEST(Estimate, TooManyUsesRealValuedBound) {
  std::vector<ScoredExample> train;
  for (int i = 0; i < 3; ++i) {
    train.push_back(make_scored_example("s" + std::to_string(i),
                                        "one two three four five", 0.6));
  }
  train.push_back(make_scored_example("z", "nothing in common here", 0.1));
  const Document x("x", "one two three four five");
  // 3 > 0.74 * 4 = 2.96 but 3 <= 0.75 * 4.
  EXPECT_EQ(estimate(x, train, config_with(0.08, 1, 0.74)).rejection,
            Rejection::kTooMany);
  EXPECT_TRUE(estimate(x, train, config_with(0.08, 1, 0.75)).defined());
}

TEST(Estimate, EmptyTrainingSet) {
  const auto p = estimate(Document("x", "a b c d"), {}, config_with(0.0, 1, 1.0));
  EXPECT_EQ(p.rejection, Rejection::kTooFew);
}

TEST(Estimate, ExternalKernel) {
  auto table = std::make_shared<SimilarityTable>();
  table->set("x", "s1", 0.42);
  table->set("x", "s2", 0.05);
  table->set("x", "s3", 0.9);
  std::vector<ScoredExample> train = {
      make_scored_example("s1", "", 0.2), make_scored_example("s2", "", 0.4),
      make_scored_example("s3", "", 0.8)};
  auto cfg = config_with(0.1, 1, 1.0);
  cfg.kernel = KernelKind::kExternal;
  cfg.similarity_table = table;
  const auto p = estimate(Document("x", "anything"), train, cfg);
  ASSERT_TRUE(p.defined());
  EXPECT_DOUBLE_EQ(*p.estimate, 0.5);
  EXPECT_THROW(estimate(Document("y", "anything"), train, cfg),
               MissingPairError);
}

TEST(Coverage, Fractions) {
  Prediction yes;
  yes.estimate = 0.5;
  const Prediction no;
  EXPECT_EQ(coverage(std::vector<Prediction>{yes, yes}), 1.0);
  EXPECT_EQ(coverage(std::vector<Prediction>{yes, no, yes, no}), 0.5);
  EXPECT_THROW(coverage(std::vector<Prediction>{}), std::invalid_argument);
}

TEST(TrainingIndices, ExcludesAndSubsamples) {
  EstimatorConfig cfg;
  const std::vector<std::size_t> excluded{1, 3};
  EXPECT_EQ(training_indices(5, excluded, cfg, "x"),
            (std::vector<std::size_t>{0, 2, 4}));
  cfg.train_subsample_frac = 0.5;
  cfg.seed = 9;
  const auto a = training_indices(100, {}, cfg, "x");
  EXPECT_EQ(a.size(), 50u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(a, training_indices(100, {}, cfg, "x"));
  EXPECT_NE(a, training_indices(100, {}, cfg, "y"));
  cfg.train_subsample_frac = 0.001;
  EXPECT_EQ(training_indices(100, {}, cfg, "x").size(), 1u);
}

TEST(Estimate, SubsampleShrinksTheBound) {
  const auto train = synthetic::random_corpus(30, 5);
  auto cfg = config_with(0.0, 1, 1.0);
  cfg.train_subsample_frac = 0.5;
  const auto p = estimate(Document("x", "w1 w2 w3 w4"), train, cfg);
  EXPECT_EQ(p.neighbor_count, 15u);
}

// Properties on small random corpora, checked against the literal oracle.
class EstimatorProperties : public ::testing::TestWithParam<int> {};

TEST_P(EstimatorProperties, MatchesOracleAndInvariants) {
  const auto seed = static_cast<std::uint64_t>(GetParam());
  Rng rng(seed);
  const std::size_t size = 5 + rng.below(26);
  const auto corpus = synthetic::random_corpus(size + 1, seed);
  const Document& x = corpus[0].doc;
  const std::vector<ScoredExample> train(corpus.begin() + 1, corpus.end());
  const auto oracle_train = oracle::from_examples(train);

  for (double tau : {0.0, 0.05, 0.08, 0.2, 0.5}) {
    for (int a : {1, 2, 5}) {
      for (double b : {0.2, 0.66, 1.0}) {
        const auto cfg = config_with(tau, a, b);
        std::size_t oracle_count = 0;
        const auto expected =
            oracle::estimate(x.tokens.tokens, oracle_train, cfg, &oracle_count);
        const auto got = estimate(x, train, cfg);
        EXPECT_EQ(got.neighbor_count, oracle_count);
        ASSERT_EQ(got.defined(), expected.has_value());
        if (!got.defined()) continue;
        EXPECT_NEAR(*got.estimate, *expected, 1e-12);
        const auto n = find_neighbors(x, train, cfg);
        double lo = 1.0;
        double hi = 0.0;
        for (const auto& nb : n) {
          lo = std::min(lo, train[nb.index].quality);
          hi = std::max(hi, train[nb.index].quality);
        }
        EXPECT_GE(*got.estimate, lo);
        EXPECT_LE(*got.estimate, hi);
      }
    }
  }
}

TEST_P(EstimatorProperties, NeighborhoodShrinksAsTauGrows) {
  const auto seed = static_cast<std::uint64_t>(GetParam());
  const auto corpus = synthetic::random_corpus(25, seed);
  const std::vector<ScoredExample> train(corpus.begin() + 1, corpus.end());
  std::set<std::string> previous;
  bool first = true;
  for (double tau = 0.0; tau <= 1.0; tau += 0.05) {
    std::set<std::string> ids;
    for (const auto& nb : find_neighbors(corpus[0].doc, train,
                                         config_with(tau, 1, 1.0))) {
      ids.insert(nb.id);
    }
    if (!first) {
      EXPECT_TRUE(std::includes(previous.begin(), previous.end(), ids.begin(),
                                ids.end()));
    }
    previous = ids;
    first = false;
  }
}

TEST_P(EstimatorProperties, PermutationAndScale) {
  const auto seed = static_cast<std::uint64_t>(GetParam());
  const auto corpus = synthetic::random_corpus(25, seed);
  const std::vector<ScoredExample> train(corpus.begin() + 1, corpus.end());
  auto shuffled = train;
  Rng rng(seed + 1000);
  rng.shuffle(std::span(shuffled));
  auto halved = train;
  for (auto& ex : halved) ex.quality *= 0.5;
  const auto cfg = config_with(0.08, 2, 1.0);
  const auto base = estimate(corpus[0].doc, train, cfg);
  const auto perm = estimate(corpus[0].doc, shuffled, cfg);
  const auto scaled = estimate(corpus[0].doc, halved, cfg);
  ASSERT_EQ(base.defined(), perm.defined());
  ASSERT_EQ(base.defined(), scaled.defined());
  EXPECT_EQ(base.neighbor_ids, perm.neighbor_ids);
  if (base.defined()) {
    EXPECT_EQ(*base.estimate, *perm.estimate);
    EXPECT_NEAR(*scaled.estimate, 0.5 * *base.estimate, 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, EstimatorProperties, ::testing::Range(0, 20));

}  // namespace
}  // namespace nnq
