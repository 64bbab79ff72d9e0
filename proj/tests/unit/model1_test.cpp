#include <gtest/gtest.h>

#include <random>

#include "rareword/align.hpp"
#include "support/model1_oracle.hpp"

using namespace rareword;
using testing_support::Model1Oracle;

namespace {

std::vector<SentencePair> toy_corpus()
{
  return {{{"the", "house"}, {"la", "maison"}}, {{"the", "flower"}, {"la", "fleur"}}};
}

// Compares model state with the oracle entry by entry.
void expect_matches(const Model1& model, const Model1Oracle& oracle, double tol)
{
  const auto counts = model.expected_counts();
  const auto ocounts = oracle.expected_counts();
  ASSERT_EQ(counts.size(), ocounts.size());
  for (const auto& [k, v] : ocounts) {
    const auto it = counts.find(k);
    ASSERT_NE(it, counts.end()) << k.first << " " << k.second;
    EXPECT_NEAR(it->second, v, tol) << k.first << " " << k.second;
  }
  const TTable t = model.table();
  ASSERT_EQ(t.size(), oracle.table().size());
  for (const auto& [k, v] : oracle.table()) EXPECT_NEAR(t.prob(k.first, k.second), v, tol);
}

} // namespace

TEST(Model1, UniformInitOverCooccurringWords)
{
  const Model1 m(toy_corpus());
  const TTable t = m.table();
  EXPECT_DOUBLE_EQ(t.prob("the", "la"), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(t.prob("the", "fleur"), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(t.prob("house", "maison"), 0.5);
  EXPECT_DOUBLE_EQ(t.prob(kNullWord, "la"), 1.0 / 3.0);
  EXPECT_EQ(t.prob("house", "fleur"), 0.0);
}

TEST(Model1, ToyCorpusPrefersLaForThe)
{
  const TTable t = train_model1(toy_corpus(), 10);
  const double la = t.prob("the", "la");
  EXPECT_GT(la, t.prob("the", "maison"));
  EXPECT_GT(la, t.prob("the", "fleur"));
  const auto links = viterbi_align(t, toy_corpus()[0]);
  EXPECT_TRUE(links.contains({2, 2}));  // maison - house
  // "the" and NULL occur in every pair, so they tie on "la" and NULL wins
  EXPECT_DOUBLE_EQ(t.prob(kNullWord, "la"), la);
  EXPECT_TRUE(links.for_target(1).empty());
}

TEST(Model1, SinglePairPosteriorsSplitEvenly)
{
  const std::vector<SentencePair> c{{{"a"}, {"x"}}};
  Model1 m(c);
  // one target word, two candidate sources (a, NULL), each row has a single f
  const auto counts = m.expected_counts();
  EXPECT_DOUBLE_EQ(counts.at({"a", "x"}), 0.5);
  EXPECT_DOUBLE_EQ(counts.at({std::string(kNullWord), "x"}), 0.5);
  for (int k = 0; k < 5; ++k) {
    m.iterate();
    const TTable t = m.table();
    EXPECT_DOUBLE_EQ(t.prob("a", "x"), 1.0);
    EXPECT_DOUBLE_EQ(t.prob(kNullWord, "x"), 1.0);
  }
}

TEST(Model1, Preconditions)
{
  EXPECT_THROW(train_model1(toy_corpus(), 0), UsageError);
  EXPECT_THROW(train_model1(std::vector<SentencePair>{}, 5), UsageError);
  const std::vector<SentencePair> with_empty{{{"a"}, {}}};
  EXPECT_THROW(Model1{with_empty}, DataError);
}

TEST(Model1, RowsStayNormalized)
{
  std::mt19937_64 rng(21);
  const std::vector<std::string> src{"a", "b", "c", "d", "e"}, tgt{"v", "w", "x", "y", "z"};
  std::vector<SentencePair> corpus;
  for (int k = 0; k < 40; ++k) {
    SentencePair p;
    for (int n = std::uniform_int_distribution<int>(1, 6)(rng); n > 0; --n) p.source.push_back(src[rng() % 5]);
    for (int n = std::uniform_int_distribution<int>(1, 6)(rng); n > 0; --n) p.target.push_back(tgt[rng() % 5]);
    corpus.push_back(p);
  }
  Model1 m(corpus);
  double prev = m.log_likelihood();
  for (int it = 0; it < 15; ++it) {
    m.iterate();
    for (const auto& [e, sum] : m.table().row_sums()) EXPECT_NEAR(sum, 1.0, 1e-6) << e;
    const double ll = m.log_likelihood();
    EXPECT_GE(ll, prev - 1e-9);
    prev = ll;
  }
}

TEST(Model1, LogLikelihoodMatchesEStep)
{
  const Model1 m(toy_corpus());
  double ll = 0;
  m.e_step(&ll);
  EXPECT_DOUBLE_EQ(ll, m.log_likelihood());
  const Model1Oracle o(toy_corpus(), std::string(kNullWord));
  EXPECT_NEAR(m.log_likelihood(), o.log_likelihood(), 1e-12);
}

TEST(Model1, MatchesBruteForceOnRandomSmallCorpora)
{
  std::mt19937_64 rng(99);
  const std::vector<std::string> src{"a", "b", "c", "d"}, tgt{"w", "x", "y", "z"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<SentencePair> corpus;
    for (int k = std::uniform_int_distribution<int>(1, 3)(rng); k > 0; --k) {
      SentencePair p;
      for (int n = std::uniform_int_distribution<int>(1, 3)(rng); n > 0; --n) p.source.push_back(src[rng() % 4]);
      for (int n = std::uniform_int_distribution<int>(1, 3)(rng); n > 0; --n) p.target.push_back(tgt[rng() % 4]);
      corpus.push_back(p);
    }
    Model1 m(corpus);
    Model1Oracle o(corpus, std::string(kNullWord));
    for (int it = 0; it < 3; ++it) {
      expect_matches(m, o, 1e-9);
      m.iterate();
      o.iterate();
    }
    expect_matches(m, o, 1e-9);
    if (HasFailure()) return;
  }
}

TEST(Model1, RepeatedWordsShareParameters)
{
  const std::vector<SentencePair> c{{{"a", "a"}, {"x", "x"}}};
  Model1 m(c);
  Model1Oracle o(c, std::string(kNullWord));
  for (int it = 0; it < 4; ++it) {
    expect_matches(m, o, 1e-12);
    m.iterate();
    o.iterate();
  }
}

TEST(Model1, Deterministic)
{
  std::vector<SentencePair> c = toy_corpus();
  c.push_back({{"a", "house"}, {"une", "maison"}});
  const auto a = train_model1(c, 7).entries();
  const auto b = train_model1(c, 7).entries();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].source, b[k].source);
    EXPECT_EQ(a[k].target, b[k].target);
    EXPECT_EQ(a[k].prob, b[k].prob);
  }
}
