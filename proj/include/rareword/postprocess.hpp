#pragma once

// Replaces unknown tokens in translator output with dictionary or identity
// translations of the source words they point to.

#include <cstdint>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "annotate.hpp"
#include "corpus.hpp"
#include "dict.hpp"
#include "error.hpp"
#include "tokens.hpp"

namespace rareword {

enum class Fallback {
  Drop,
  Literal,  // emit kFallbackLiteral
};

inline constexpr std::string_view kFallbackLiteral = "UNK";

inline Fallback parse_fallback(std::string_view s)
{
  if (s == "drop") return Fallback::Drop;
  if (s == "literal") return Fallback::Literal;
  throw UsageError("unknown fallback '" + std::string(s) + "' (expected drop or literal)");
}

struct PostprocessOptions {
  Fallback fallback = Fallback::Drop;
  int window = kDefaultWindow;
};

// replaced + fallback == unknown_tokens always holds.
struct PostprocessStats {
  std::uint64_t sentences = 0;
  std::uint64_t unknown_tokens = 0;
  std::uint64_t replaced = 0;
  std::uint64_t dictionary_hits = 0;
  std::uint64_t identity = 0;
  std::uint64_t fallback = 0;
  std::uint64_t stray_tags = 0;  // positional tags outside PosAll, dropped

  PostprocessStats& operator+=(const PostprocessStats& o)
  {
    sentences += o.sentences;
    unknown_tokens += o.unknown_tokens;
    replaced += o.replaced;
    dictionary_hits += o.dictionary_hits;
    identity += o.identity;
    fallback += o.fallback;
    stray_tags += o.stray_tags;
    return *this;
  }

  friend bool operator==(const PostprocessStats&, const PostprocessStats&) = default;
};

inline void write_stats(std::ostream& out, const PostprocessStats& s)
{
  out << "sentences\t" << s.sentences << '\n'
      << "unknown_tokens\t" << s.unknown_tokens << '\n'
      << "replaced\t" << s.replaced << '\n'
      << "dictionary_hits\t" << s.dictionary_hits << '\n'
      << "identity\t" << s.identity << '\n'
      << "fallback\t" << s.fallback << '\n'
      << "stray_tags\t" << s.stray_tags << '\n';
}

// Holds a shared dictionary and accumulates statistics across sentences.
// The dictionary must outlive the postprocessor.
class Postprocessor {
public:
  explicit Postprocessor(const TranslationDictionary& dict, PostprocessOptions options = {})
    : dict_(&dict), options_(options)
  {
    if (options_.window < 0)
      throw UsageError("window must be non-negative");
  }
  Postprocessor(TranslationDictionary&&, PostprocessOptions = {}) = delete;

  // <unkpos_d> at output position j becomes the translation of source[j - d].
  Sentence posunk(const Sentence& output, const Sentence& source)
  {
    Sentence out;
    out.reserve(output.size());
    ++stats_.sentences;
    for (std::size_t jj = 0; jj < output.size(); ++jj) {
      const auto tok = decode(output[jj]);
      if (tok.kind == TokenKind::Word) {
        out.push_back(output[jj]);
      } else if (is_positional_tag(tok.kind)) {
        ++stats_.stray_tags;
      } else if (tok.kind == TokenKind::PosUnknown) {
        replace_pointer(out, static_cast<std::int64_t>(jj + 1), tok.value, source);
      } else {
        fallback(out);
      }
    }
    return out;
  }

  // Output must alternate word and tag. Throws ParseError on a structural
  // violation; the column is the 1-based token index.
  Sentence posall(const Sentence& output, const Sentence& source)
  {
    Sentence out;
    out.reserve(output.size() / 2);
    ++stats_.sentences;
    for (std::size_t k = 0; k < output.size(); k += 2) {
      const auto word = decode(output[k]);
      if (word.kind != TokenKind::Word && word.kind != TokenKind::Unknown)
        throw ParseError("expected a word, found '" + output[k] + "'", k + 1);
      if (k + 1 >= output.size())
        throw ParseError("word '" + output[k] + "' has no positional tag", k + 1);
      const auto tag = decode(output[k + 1]);
      if (!is_positional_tag(tag.kind))
        throw ParseError("expected a positional tag, found '" + output[k + 1] + "'", k + 2);
      if (word.kind == TokenKind::Word) {
        out.push_back(output[k]);
      } else if (tag.kind == TokenKind::Positional) {
        replace_pointer(out, static_cast<std::int64_t>(k / 2 + 1), tag.value, source);
      } else {
        fallback(out);
      }
    }
    return out;
  }

  // <unk_n> becomes the translation of the source word recorded for n.
  Sentence copyable(const Sentence& output, const CopyMap& copies)
  {
    Sentence out;
    out.reserve(output.size());
    ++stats_.sentences;
    for (const auto& t : output) {
      const auto tok = decode(t);
      if (tok.kind == TokenKind::Word) {
        out.push_back(t);
      } else if (is_positional_tag(tok.kind)) {
        ++stats_.stray_tags;
      } else if (tok.kind == TokenKind::Copy) {
        const auto it = copies.find(tok.value);
        if (it == copies.end())
          fallback(out);
        else
          replace(out, it->second);
      } else {
        fallback(out);
      }
    }
    return out;
  }

  // The k-th <unk> takes the k-th source OOV.
  Sentence noalign(const Sentence& output, std::span<const std::string> source_oovs)
  {
    Sentence out;
    out.reserve(output.size());
    ++stats_.sentences;
    std::size_t k = 0;
    for (const auto& t : output) {
      const auto tok = decode(t);
      if (tok.kind == TokenKind::Word) {
        out.push_back(t);
      } else if (is_positional_tag(tok.kind)) {
        ++stats_.stray_tags;
      } else if (tok.kind == TokenKind::Unknown && k < source_oovs.size()) {
        replace(out, source_oovs[k++]);
      } else {
        fallback(out);
      }
    }
    return out;
  }

  const PostprocessStats& stats() const noexcept { return stats_; }
  void reset_stats() noexcept { stats_ = {}; }

private:
  // Out-of-window offsets are dangling pointers and bad copy indices are
  // null unknowns; neither is an error here.
  static DecodedToken decode(std::string_view t)
  {
    try {
      return classify_token(t, {std::numeric_limits<int>::max(), std::numeric_limits<int>::max()});
    } catch (const DataError&) {
      return {TokenKind::NullUnknown, 0};
    }
  }

  void replace_pointer(Sentence& out, std::int64_t j, std::int64_t d, const Sentence& source)
  {
    const std::int64_t i = j - d;
    if (std::llabs(d) > options_.window || i < 1 || i > static_cast<std::int64_t>(source.size()))
      fallback(out);
    else
      replace(out, source[static_cast<std::size_t>(i - 1)]);
  }

  void replace(Sentence& out, const std::string& source_word)
  {
    ++stats_.unknown_tokens;
    ++stats_.replaced;
    if (const auto* e = dict_->find(source_word)) {
      ++stats_.dictionary_hits;
      out.push_back(e->translation);
    } else {
      ++stats_.identity;
      out.push_back(source_word);
    }
  }

  void fallback(Sentence& out)
  {
    ++stats_.unknown_tokens;
    ++stats_.fallback;
    if (options_.fallback == Fallback::Literal) out.emplace_back(kFallbackLiteral);
  }

  const TranslationDictionary* dict_;
  PostprocessOptions options_;
  PostprocessStats stats_;
};

inline Sentence postprocess_posunk(const Sentence& output, const Sentence& source, const TranslationDictionary& dict,
                                   int window = kDefaultWindow)
{
  return Postprocessor(dict, {Fallback::Drop, window}).posunk(output, source);
}

inline Sentence postprocess_posall(const Sentence& output, const Sentence& source, const TranslationDictionary& dict,
                                   int window = kDefaultWindow)
{
  return Postprocessor(dict, {Fallback::Drop, window}).posall(output, source);
}

inline Sentence postprocess_copyable(const Sentence& output, const CopyMap& copies, const TranslationDictionary& dict)
{
  return Postprocessor(dict).copyable(output, copies);
}

inline Sentence postprocess_noalign(const Sentence& output, std::span<const std::string> source_oovs,
                                    const TranslationDictionary& dict)
{
  return Postprocessor(dict).noalign(output, source_oovs);
}

// OOV words of a source sentence in order, repeats included.
inline std::vector<std::string> source_oovs(const Sentence& source, const Vocabulary& src_vocab)
{
  std::vector<std::string> out;
  for (const auto& w : source)
    if (is_oov(w, src_vocab)) out.push_back(w);
  return out;
}

} // namespace rareword
