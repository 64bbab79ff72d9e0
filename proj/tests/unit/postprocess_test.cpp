#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "rareword/postprocess.hpp"
#include "support/running_example.hpp"
#include "support/synthetic.hpp"

using namespace rareword;
using namespace testing_support;

namespace {

Sentence S(std::string_view text) { return tokenize(text); }

TranslationDictionary dict_of(std::initializer_list<std::pair<std::string, std::string>> entries)
{
  DictionaryMap m;
  for (const auto& [s, t] : entries) m.emplace(s, DictionaryEntry{t, 1.0, 1});
  return TranslationDictionary(std::move(m));
}

const TranslationDictionary kEmpty;

} // namespace

TEST(PostprocessPosUnk, ReplacesPointedSourceWord)
{
  const auto out = postprocess_posunk(S("En outre , <unkpos_1> opérations"), S("An additional 2600 operations"), {});
  EXPECT_EQ(out, S("En outre , 2600 opérations"));
}

TEST(PostprocessPosUnk, NoUnknownsUnchanged)
{
  EXPECT_EQ(postprocess_posunk(S("a b c"), S("x"), {}), S("a b c"));
}

TEST(PostprocessPosUnk, IdentityTranslation)
{
  EXPECT_EQ(postprocess_posunk(S("<unkpos_0>"), S("Pont-de-Buis"), {}), S("Pont-de-Buis"));
}

TEST(PostprocessPosUnk, DictionaryAndFallbacks)
{
  const auto d = dict_of({{"ecotax", "écotaxe"}});
  Postprocessor post(d);
  const auto out = post.posunk(S("Le <unkpos_-1> <unkpos_1> de <unkpos_0> <unkpos_null> <unkpos_-5> <unk>"),
                               S("The ecotax portico in Pont-de-Buis"));
  // j=2,d=-1 -> portico; j=3,d=1 -> ecotax; j=5,d=0 -> Pont-de-Buis; null,
  // j=7,d=-5 -> i=12 out of bounds; bare <unk> has no pointer
  EXPECT_EQ(out, S("Le portico écotaxe de Pont-de-Buis"));
  const auto& st = post.stats();
  EXPECT_EQ(st.unknown_tokens, 6u);
  EXPECT_EQ(st.replaced, 3u);
  EXPECT_EQ(st.dictionary_hits, 1u);
  EXPECT_EQ(st.identity, 2u);
  EXPECT_EQ(st.fallback, 3u);
}

TEST(PostprocessPosUnk, OutOfWindowPointerFallsBack)
{
  Postprocessor post(kEmpty, {Fallback::Literal, 7});
  const Sentence src(20, "s");
  EXPECT_EQ(post.posunk(S("<unkpos_-9>"), src), S("UNK"));
  EXPECT_EQ(post.stats().fallback, 1u);
}

TEST(PostprocessPosUnk, StrayTagsDropped)
{
  Postprocessor post(kEmpty);
  EXPECT_EQ(post.posunk(S("a <p_0> b"), S("x")), S("a b"));
  EXPECT_EQ(post.stats().stray_tags, 1u);
  EXPECT_EQ(post.stats().unknown_tokens, 0u);
}

TEST(PostprocessPosAll, InvertsConstruction)
{
  const auto d = dict_of({{"portico", "portique"}});
  EXPECT_EQ(postprocess_posall(S("Le <p_0> <unk> <p_-1> de <p_null>"), S("The ecotax portico in"), d),
            S("Le portique de"));
}

TEST(PostprocessPosAll, KnownWordTagStripped)
{
  EXPECT_EQ(postprocess_posall(S("w <p_0>"), S("w"), {}), S("w"));
}

TEST(PostprocessPosAll, StructuralErrors)
{
  const auto col = [](const Sentence& out) -> std::size_t {
    try {
      postprocess_posall(out, S("a b c"), {});
    } catch (const ParseError& e) {
      return e.column();
    }
    return 0;
  };
  EXPECT_EQ(col(S("<unk>")), 1u);
  EXPECT_EQ(col(S("a <p_0> b")), 3u);
  EXPECT_EQ(col(S("a b")), 2u);
  EXPECT_EQ(col(S("<p_0> a")), 1u);
  EXPECT_EQ(col(S("a <p_0> <unkpos_1> <p_0>")), 3u);
  EXPECT_EQ(postprocess_posall({}, S("a"), {}), Sentence{});
}

TEST(PostprocessPosAll, NullTaggedUnknownFallsBack)
{
  Postprocessor post(kEmpty, {Fallback::Literal, 7});
  EXPECT_EQ(post.posall(S("<unk> <p_null> x <p_1>"), S("a b")), S("UNK x"));
}

TEST(PostprocessCopyable, RunningExampleInverted)
{
  const auto d = dict_of({{"ecotax", "écotaxe"}});
  Postprocessor post(d);
  const auto out = post.copyable(S("Le <unk_null> <unk_1> de <unk_2>"), {{1, "ecotax"}, {2, "Pont-de-Buis"}});
  EXPECT_EQ(out, S("Le écotaxe de Pont-de-Buis"));
  EXPECT_EQ(post.stats().fallback, 1u);
  EXPECT_EQ(post.stats().replaced, 2u);
}

TEST(PostprocessCopyable, NoCopyTokensUnchanged)
{
  EXPECT_EQ(postprocess_copyable(S("a b"), {{1, "x"}}, {}), S("a b"));
}

TEST(PostprocessCopyable, MissingIndexFallsBack)
{
  Postprocessor post(kEmpty);
  EXPECT_EQ(post.copyable(S("a <unk_3>"), {{1, "x"}}), S("a"));
  EXPECT_EQ(post.stats().fallback, 1u);
  // malformed copy tokens are null unknowns, not errors
  EXPECT_EQ(post.copyable(S("<unk_0> b"), {{1, "x"}}), S("b"));
}

TEST(PostprocessNoAlign, MonotoneRule)
{
  const auto d = dict_of({{"ecotax", "écotaxe"}});
  const std::vector<std::string> oovs{"ecotax", "Pont-de-Buis"};
  EXPECT_EQ(postprocess_noalign(S("Le <unk> <unk>"), oovs, d), S("Le écotaxe Pont-de-Buis"));
  EXPECT_EQ(postprocess_noalign(S("a b"), oovs, d), S("a b"));
  Postprocessor post(d, {Fallback::Literal, 7});
  EXPECT_EQ(post.noalign(S("<unk> <unk> <unk>"), oovs), S("écotaxe Pont-de-Buis UNK"));
  EXPECT_EQ(post.stats().fallback, 1u);
}

TEST(PostprocessNoAlign, SourceOovsInOrder)
{
  EXPECT_EQ(source_oovs(S("The ecotax portico in Pont-de-Buis ecotax"), example_src_vocab()),
            (std::vector<std::string>{"ecotax", "Pont-de-Buis", "ecotax"}));
}

TEST(Fallback, Parse)
{
  EXPECT_EQ(parse_fallback("drop"), Fallback::Drop);
  EXPECT_EQ(parse_fallback("literal"), Fallback::Literal);
  EXPECT_THROW(parse_fallback("keep"), UsageError);
  EXPECT_THROW(Postprocessor(kEmpty, {Fallback::Drop, -1}), UsageError);
}

TEST(Stats, WrittenAsKeyValue)
{
  PostprocessStats s;
  s.sentences = 2;
  s.fallback = 1;
  std::ostringstream out;
  write_stats(out, s);
  EXPECT_NE(out.str().find("sentences\t2\n"), std::string::npos);
  EXPECT_NE(out.str().find("fallback\t1\n"), std::string::npos);
  PostprocessStats t = s;
  t += s;
  EXPECT_EQ(t.sentences, 4u);
}

// Random translator outputs: counts add up, known words keep their order,
// and no reserved spelling leaks into the result.
TEST(PostprocessProperties, CountsAndPassThrough)
{
  std::mt19937_64 rng(41);
  const std::vector<std::string> pool{"a", "b", "c", "<unk>", "<unk_1>", "<unk_2>", "<unk_null>", "<unkpos_0>",
                                      "<unkpos_-2>", "<unkpos_5>", "<unkpos_-9>", "<unkpos_null>", "<p_1>", "<p_null>"};
  const auto d = dict_of({{"s1", "T1"}});
  for (int trial = 0; trial < 2000; ++trial) {
    Sentence out, src;
    for (int k = std::uniform_int_distribution<int>(0, 12)(rng); k > 0; --k) out.push_back(pool[rng() % pool.size()]);
    for (int k = std::uniform_int_distribution<int>(1, 8)(rng); k > 0; --k) src.push_back("s" + std::to_string(rng() % 3));
    Sentence known;
    std::uint64_t unknown = 0;
    for (const auto& t : out) {
      const auto kind = classify_token(t, {100, 100}).kind;
      if (kind == TokenKind::Word) known.push_back(t);
      unknown += is_unknown_class(kind);
    }
    const auto check = [&](const Sentence& result, const PostprocessStats& st) {
      EXPECT_EQ(st.replaced + st.fallback, st.unknown_tokens);
      EXPECT_EQ(st.dictionary_hits + st.identity, st.replaced);
      EXPECT_EQ(st.unknown_tokens, unknown);
      for (const auto& t : result) EXPECT_FALSE(is_reserved(t)) << t;
      // known words survive as a subsequence, in order
      std::size_t k = 0;
      for (const auto& t : result)
        if (k < known.size() && t == known[k]) ++k;
      EXPECT_EQ(k, known.size());
    };
    {
      Postprocessor p(d);
      check(p.posunk(out, src), p.stats());
    }
    {
      Postprocessor p(d);
      check(p.copyable(out, {{1, "s1"}}), p.stats());
    }
    {
      Postprocessor p(d);
      const std::vector<std::string> oovs{"s0", "s1"};
      check(p.noalign(out, oovs), p.stats());
    }
  }
}
