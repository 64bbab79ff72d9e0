#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "rareword/eval.hpp"
#include "rareword/io.hpp"

using namespace rareword;

namespace {

Sentence S(std::string_view text) { return tokenize(text); }

std::vector<Sentence> read_lines(const std::string& path)
{
  io::Input in(path);
  std::vector<Sentence> out;
  std::string line;
  while (io::read_line(in.stream(), line)) out.push_back(tokenize(line));
  return out;
}

std::vector<std::vector<Sentence>> single_refs(const std::vector<Sentence>& refs)
{
  std::vector<std::vector<Sentence>> out;
  for (const auto& r : refs) out.push_back({r});
  return out;
}

FrequencyTable table_of(std::vector<WordCount> ranked) { return FrequencyTable(std::move(ranked)); }

} // namespace

TEST(Bleu, IdentityScoresOne)
{
  const std::vector<Sentence> hyps{S("the cat sat on the mat"), S("a dog ran fast")};
  const auto r = corpus_bleu(hyps, single_refs(hyps));
  EXPECT_EQ(r.bleu, 1.0);
  for (const auto p : r.precisions) EXPECT_EQ(p, 1.0);
  EXPECT_EQ(r.brevity_penalty, 1.0);
  EXPECT_EQ(r.hyp_length, 10u);
}

TEST(Bleu, ClippedUnigramPrecision)
{
  const std::vector<Sentence> hyps{S("the the the the")};
  const auto r = corpus_bleu(hyps, single_refs({S("the cat sat")}));
  EXPECT_DOUBLE_EQ(r.precisions[0], 0.25);
  EXPECT_EQ(r.precisions[1], 0.0);
  EXPECT_EQ(r.bleu, 0.0);
  EXPECT_EQ(r.brevity_penalty, 1.0);
}

TEST(Bleu, Errors)
{
  const std::vector<Sentence> none;
  EXPECT_THROW(corpus_bleu(none, std::vector<std::vector<Sentence>>{}), UsageError);
  const std::vector<Sentence> one{S("a")};
  EXPECT_THROW(corpus_bleu(one, std::vector<std::vector<Sentence>>{}), UsageError);
  EXPECT_THROW(corpus_bleu(one, single_refs({S("a"), S("b")})), UsageError);
  const std::vector<std::vector<Sentence>> no_refs{{}};
  EXPECT_THROW(corpus_bleu(one, no_refs), UsageError);
}

TEST(Bleu, BrevityPenalty)
{
  const std::vector<Sentence> hyps{S("a b c d")};
  const auto r = corpus_bleu(hyps, single_refs({S("a b c d e f g h")}));
  EXPECT_DOUBLE_EQ(r.brevity_penalty, std::exp(1.0 - 8.0 / 4.0));
  EXPECT_DOUBLE_EQ(r.bleu, std::exp(1.0 - 2.0));
}

TEST(Bleu, ClosestReferenceLengthShorterOnTies)
{
  const Sentence hyp = S("a b c d e");
  const std::vector<Sentence> refs{S("a b c d e f g"), S("a b c"), S("a b c d e f x")};
  EXPECT_EQ(sentence_stats(hyp, refs).ref_length, 3u);  // |5-3| = |5-7|, shorter wins
  const std::vector<Sentence> refs2{S("a b c d e f"), S("a")};
  EXPECT_EQ(sentence_stats(hyp, refs2).ref_length, 6u);
}

TEST(Bleu, ClipsAgainstMaxOverReferences)
{
  const Sentence hyp = S("the the the");
  const std::vector<Sentence> refs{S("the cat"), S("the the dog")};
  EXPECT_EQ(sentence_stats(hyp, refs).matches[0], 2u);
}

TEST(Bleu, CaseSensitiveUnlessLowercased)
{
  const std::vector<Sentence> hyps{S("The Cat")};
  const auto refs = single_refs({S("the cat")});
  EXPECT_EQ(corpus_bleu(hyps, refs, 1).bleu, 0.0);
  EXPECT_EQ(corpus_bleu(hyps, refs, 1, true).bleu, 1.0);
  // only ASCII letters fold
  const std::vector<Sentence> accented{S("É")};
  EXPECT_EQ(corpus_bleu(accented, single_refs({S("é")}), 1, true).bleu, 0.0);
}

TEST(Bleu, EmptyHypothesisLine)
{
  const std::vector<Sentence> hyps{Sentence{}, S("a b")};
  const auto r = corpus_bleu(hyps, single_refs({S("x y"), S("a b")}), 2);
  EXPECT_EQ(r.hyp_length, 2u);
  EXPECT_EQ(r.ref_length, 4u);
  const std::vector<Sentence> only_empty{Sentence{}};
  const auto z = corpus_bleu(only_empty, single_refs({S("x")}));
  EXPECT_EQ(z.bleu, 0.0);
  EXPECT_EQ(z.brevity_penalty, 0.0);
}

TEST(Bleu, FrozenFixtureSingleReference)
{
  const auto hyps = read_lines(RAREWORD_TEST_DATA "/bleu/hyp.txt");
  const auto refs = single_refs(read_lines(RAREWORD_TEST_DATA "/bleu/ref1.txt"));
  const auto r = corpus_bleu(hyps, refs);
  EXPECT_NEAR(r.bleu, 0.39441729367797818, 1e-12);
  EXPECT_NEAR(r.precisions[0], 123.0 / 161.0, 1e-15);
  EXPECT_NEAR(r.precisions[1], 69.0 / 141.0, 1e-15);
  EXPECT_NEAR(r.precisions[2], 42.0 / 121.0, 1e-15);
  EXPECT_NEAR(r.precisions[3], 25.0 / 102.0, 1e-15);
  EXPECT_NEAR(r.brevity_penalty, 0.93395877357719015, 1e-12);
  EXPECT_EQ(r.hyp_length, 161u);
  EXPECT_EQ(r.ref_length, 172u);
}

TEST(Bleu, FrozenFixtureTwoReferences)
{
  const auto hyps = read_lines(RAREWORD_TEST_DATA "/bleu/hyp.txt");
  const auto r1 = read_lines(RAREWORD_TEST_DATA "/bleu/ref1.txt");
  const auto r2 = read_lines(RAREWORD_TEST_DATA "/bleu/ref2.txt");
  std::vector<std::vector<Sentence>> refs;
  for (std::size_t k = 0; k < r1.size(); ++k) refs.push_back({r1[k], r2[k]});
  const auto r = corpus_bleu(hyps, refs);
  EXPECT_NEAR(r.bleu, 0.41368760588580034, 1e-12);
  EXPECT_NEAR(r.precisions[0], 129.0 / 161.0, 1e-15);
  EXPECT_NEAR(r.precisions[1], 74.0 / 141.0, 1e-15);
  EXPECT_NEAR(r.precisions[2], 43.0 / 121.0, 1e-15);
  EXPECT_NEAR(r.precisions[3], 25.0 / 102.0, 1e-15);
  EXPECT_NEAR(r.brevity_penalty, 0.94563310718190019, 1e-12);
  EXPECT_EQ(r.ref_length, 170u);
}

TEST(BleuProperties, PermutationInvarianceAndFormula)
{
  std::mt19937_64 rng(51);
  const std::vector<std::string> words{"a", "b", "c", "d", "e"};
  const auto random_sentence = [&](int max_len) {
    Sentence s;
    for (int k = std::uniform_int_distribution<int>(1, max_len)(rng); k > 0; --k) s.push_back(words[rng() % 5]);
    return s;
  };
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Sentence> hyps;
    std::vector<std::vector<Sentence>> refs;
    for (int k = std::uniform_int_distribution<int>(1, 15)(rng); k > 0; --k) {
      hyps.push_back(random_sentence(12));
      refs.push_back({random_sentence(12)});
      if (rng() % 2) refs.back().push_back(random_sentence(12));
    }
    const auto r = corpus_bleu(hyps, refs);
    double log_sum = 0.0;
    bool any_zero = false;
    for (const auto p : r.precisions) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      any_zero = any_zero || p == 0.0;
      if (p > 0.0) log_sum += std::log(p);
    }
    EXPECT_NEAR(r.bleu, any_zero ? 0.0 : r.brevity_penalty * std::exp(log_sum / 4.0), 1e-15);
    if (r.hyp_length >= r.ref_length) {
      EXPECT_EQ(r.brevity_penalty, 1.0);
    }
    EXPECT_GE(r.bleu, 0.0);
    EXPECT_LE(r.bleu, 1.0);

    std::vector<std::size_t> order(hyps.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Sentence> h2;
    std::vector<std::vector<Sentence>> r2;
    for (const auto k : order) {
      h2.push_back(hyps[k]);
      r2.push_back(refs[k]);
    }
    const auto p = corpus_bleu(h2, r2);
    EXPECT_EQ(p.bleu, r.bleu);
    EXPECT_EQ(p.precisions, r.precisions);
  }
}

// Corpus precisions are not ordered by n: short sentences add unigrams
// without adding bigrams.
TEST(Bleu, PrecisionsNeedNotDecreaseWithOrder)
{
  const std::vector<Sentence> hyps{S("a b"), S("x")};
  const auto r = corpus_bleu(hyps, single_refs({S("a b"), S("y")}), 2);
  EXPECT_DOUBLE_EQ(r.precisions[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.precisions[1], 1.0);
}

TEST(Rarity, InverseFrequency)
{
  const auto t = table_of({{"x", 4}, {"y", 4}, {"z", 1}});
  EXPECT_DOUBLE_EQ(rarity_score(S("z"), t), 1.0);
  EXPECT_DOUBLE_EQ(rarity_score(S("unseen other"), t), 1.0);
  EXPECT_DOUBLE_EQ(rarity_score(S("x y"), t), 0.25);
  EXPECT_THROW(rarity_score({}, t), UsageError);
}

TEST(Rarity, FrequencyRank)
{
  const auto t = table_of({{"the", 9}, {"cat", 2}, {"sat", 1}});
  EXPECT_DOUBLE_EQ(rarity_score(S("the"), t, RarityMetric::FrequencyRank), 1.0);
  EXPECT_DOUBLE_EQ(rarity_score(S("the sat"), t, RarityMetric::FrequencyRank), 2.0);
  EXPECT_DOUBLE_EQ(rarity_score(S("zebra"), t, RarityMetric::FrequencyRank), 4.0);
  EXPECT_EQ(parse_metric("frequency_rank"), RarityMetric::FrequencyRank);
  EXPECT_THROW(parse_metric("rank"), UsageError);
}

TEST(Bucketize, EqualSizeGroups)
{
  std::vector<Sentence> s(3003, S("w"));
  const auto t = table_of({{"w", 1}});
  const auto r = bucketize(s, t, 500);
  ASSERT_EQ(r.groups.size(), 7u);
  EXPECT_EQ(r.groups.back().ids.size(), 3u);
  EXPECT_EQ(bucketize(s, t, 5000).groups.size(), 1u);
  EXPECT_THROW(bucketize(s, t, 0), UsageError);
  EXPECT_TRUE(bucketize(std::vector<Sentence>{}, t, 5).groups.empty());
}

TEST(Bucketize, TiesKeepOriginalOrder)
{
  const std::vector<Sentence> s(7, S("w"));
  const auto r = bucketize(s, table_of({{"w", 3}}), 3);
  std::vector<std::size_t> flat;
  for (const auto& g : r.groups) flat.insert(flat.end(), g.ids.begin(), g.ids.end());
  EXPECT_EQ(flat, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
}

TEST(Bucketize, SortsAscendingAndPartitionsProperty)
{
  std::mt19937_64 rng(61);
  std::vector<WordCount> ranked;
  for (int k = 0; k < 50; ++k) ranked.push_back({"w" + std::to_string(k), static_cast<std::uint64_t>(100 - 2 * k)});
  const auto t = table_of(ranked);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Sentence> s;
    for (int k = std::uniform_int_distribution<int>(1, 200)(rng); k > 0; --k) {
      Sentence x;
      for (int n = std::uniform_int_distribution<int>(1, 8)(rng); n > 0; --n) x.push_back("w" + std::to_string(rng() % 60));
      s.push_back(x);
    }
    const std::size_t gs = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    for (const auto metric : {RarityMetric::InverseFrequency, RarityMetric::FrequencyRank}) {
      const auto r = bucketize(s, t, gs, metric);
      std::vector<int> seen(s.size(), 0);
      double prev = -1.0;
      for (std::size_t g = 0; g < r.groups.size(); ++g) {
        if (g + 1 < r.groups.size()) {
          EXPECT_EQ(r.groups[g].ids.size(), gs);
        }
        EXPECT_GE(r.groups[g].mean_rarity, prev - 1e-12);
        prev = r.groups[g].mean_rarity;
        for (const auto id : r.groups[g].ids) ++seen[id];
      }
      for (const auto c : seen) EXPECT_EQ(c, 1);
    }
  }
}

TEST(BucketBleu, SingleBucketEqualsCorpus)
{
  const auto hyps = read_lines(RAREWORD_TEST_DATA "/bleu/hyp.txt");
  const auto refs = single_refs(read_lines(RAREWORD_TEST_DATA "/bleu/ref1.txt"));
  const auto t = table_of({{"the", 5}});
  const auto r = bucket_bleu(bucketize(hyps, t, 1000), hyps, refs);
  ASSERT_EQ(r.groups.size(), 1u);
  EXPECT_NEAR(r.groups[0].bleu.bleu, corpus_bleu(hyps, refs).bleu, 1e-12);
}

TEST(BucketBleu, IdentityGroupsScoreOne)
{
  const std::vector<Sentence> s{S("a b c d"), S("e f g h"), S("i j k l"), S("m n o p")};
  const auto r = bucket_bleu(bucketize(s, table_of({}), 2), s, single_refs(s));
  for (const auto& g : r.groups) EXPECT_EQ(g.bleu.bleu, 1.0);
}

TEST(BucketBleu, GroupsAreIndependent)
{
  const std::vector<Sentence> s{S("a b c d"), S("e f g h"), S("i j k l"), S("m n o p")};
  const auto t = table_of({{"a", 9}, {"b", 9}, {"c", 9}, {"d", 9}, {"e", 8}, {"f", 8}, {"g", 8}, {"h", 8}});
  const auto buckets = bucketize(s, t, 2);
  auto hyps = s;
  const auto before = bucket_bleu(buckets, hyps, single_refs(s));
  hyps[buckets.groups[1].ids[0]] = S("x y z w");
  const auto after = bucket_bleu(buckets, hyps, single_refs(s));
  EXPECT_EQ(after.groups[0].bleu.bleu, before.groups[0].bleu.bleu);
  EXPECT_LT(after.groups[1].bleu.bleu, before.groups[1].bleu.bleu);
}

TEST(BucketBleu, MissingIdIsError)
{
  const std::vector<Sentence> s{S("a"), S("b"), S("c")};
  const auto buckets = bucketize(s, table_of({}), 2);
  const std::vector<Sentence> short_hyps{S("a")};
  EXPECT_THROW(bucket_bleu(buckets, short_hyps, single_refs(short_hyps)), DataError);
}

TEST(Reports, TsvHeaderAndRows)
{
  const std::vector<Sentence> s{S("a b c d"), S("e f g h"), S("i j k l")};
  const auto r = bucket_bleu(bucketize(s, table_of({}), 2), s, single_refs(s));
  std::ostringstream out;
  write_bucket_report(out, r);
  EXPECT_EQ(out.str(), "group\tsize\tmean_rarity\tbleu\tp1\tp2\tp3\tp4\tbp\n"
                       "1\t2\t1\t1\t1\t1\t1\t1\t1\n"
                       "2\t1\t1\t1\t1\t1\t1\t1\t1\n");
  std::ostringstream b;
  write_bleu_report(b, corpus_bleu(s, single_refs(s)));
  EXPECT_EQ(b.str(), "bleu\t1\np1\t1\np2\t1\np3\t1\np4\t1\nbrevity_penalty\t1\nhyp_length\t12\nref_length\t12\n");
}
