#pragma once

// Alignment-driven unknown-word annotation of parallel training data.
//
// Offsets follow i = j - d: a target word at position j aligned to the source
// word at position i carries d = j - i. Positions count words only, so the
// tags PosAll interleaves never shift j. All positions refer to the original
// (unreversed) source order.

#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "align.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "tokens.hpp"

namespace rareword {

enum class SchemeKind { Copyable, PosAll, PosUnk };

struct Scheme {
  SchemeKind kind = SchemeKind::PosUnk;
  int window = kDefaultWindow;
  int max_copy = kDefaultMaxCopy;  // Copyable only

  void validate() const
  {
    if (window < 0)
      throw UsageError("window must be non-negative");
    if (max_copy < 1)
      throw UsageError("max_copy must be at least 1");
  }

  TokenGrammar grammar() const { return {window, max_copy}; }
};

inline std::string_view to_string(SchemeKind k)
{
  switch (k) {
  case SchemeKind::Copyable: return "copyable";
  case SchemeKind::PosAll: return "posall";
  case SchemeKind::PosUnk: return "posunk";
  }
  return "?";
}

inline SchemeKind parse_scheme(std::string_view s)
{
  if (s == "copyable") return SchemeKind::Copyable;
  if (s == "posall") return SchemeKind::PosAll;
  if (s == "posunk") return SchemeKind::PosUnk;
  throw UsageError("unknown scheme '" + std::string(s) + "'");
}

// Source position aligned to target position j: the nearest linked source
// word, smaller i on ties. Null when j has no link or the nearest is more
// than `window` positions away.
inline std::optional<std::uint32_t> resolve_alignment(std::uint32_t j, const AlignmentLinks& links,
                                                      int window = kDefaultWindow)
{
  std::optional<std::uint32_t> best;
  std::int64_t best_dist = 0;
  for (const auto& l : links.for_target(j)) {
    const std::int64_t dist = std::llabs(static_cast<std::int64_t>(j) - l.source);
    if (!best || dist < best_dist) {
      best = l.source;
      best_dist = dist;
    }
  }
  if (best && best_dist > window) return std::nullopt;
  return best;
}

// Original word behind an annotated position, and for target unknowns the
// resolved source position.
struct TokenOrigin {
  std::string word;
  std::optional<std::uint32_t> source_position;

  friend bool operator==(const TokenOrigin&, const TokenOrigin&) = default;
};

// Copy index n -> original source word.
using CopyMap = std::map<int, std::string>;

struct AnnotatedSource {
  Sentence tokens;
  std::vector<TokenOrigin> origin;  // per position
  CopyMap copies;                   // Copyable only

  // 1-based positions whose token differs from the original word.
  std::vector<std::uint32_t> replaced_positions() const
  {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (tokens[i] != origin[i].word) out.push_back(static_cast<std::uint32_t>(i + 1));
    return out;
  }
};

struct AnnotatedPair {
  Sentence source;
  Sentence target;
  std::vector<TokenOrigin> source_origin;  // per source position
  std::vector<TokenOrigin> target_origin;  // per target word (tags excluded)
  CopyMap copies;
};

// Source-side rule of a scheme: distinct OOV types get <unk_1>..<unk_K> in
// first-occurrence order for Copyable (overflow types get <unk_null>),
// <unk> otherwise.
inline AnnotatedSource annotate_source_only(const Sentence& sentence, const Vocabulary& src_vocab,
                                            const Scheme& scheme)
{
  scheme.validate();
  AnnotatedSource out;
  out.tokens.reserve(sentence.size());
  out.origin.reserve(sentence.size());
  StringMap<int> assigned;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    const auto& w = sentence[i];
    out.origin.push_back({w, std::nullopt});
    if (!is_oov(w, src_vocab)) {
      out.tokens.push_back(w);
      continue;
    }
    out.origin.back().source_position = static_cast<std::uint32_t>(i + 1);
    if (scheme.kind != SchemeKind::Copyable) {
      out.tokens.emplace_back(kUnk);
      continue;
    }
    auto it = assigned.find(w);
    if (it == assigned.end()) {
      const int n = static_cast<int>(assigned.size()) + 1;
      if (n > scheme.max_copy) {
        out.tokens.emplace_back(kUnkNull);
        continue;
      }
      it = assigned.emplace(w, n).first;
      out.copies.emplace(n, w);
    }
    out.tokens.push_back(copy_token(it->second));
  }
  return out;
}

namespace detail {

inline AnnotatedPair start_pair(const SentencePair& pair, const Vocabulary& src_vocab, const AlignmentLinks& links,
                                const Scheme& scheme)
{
  links.check_bounds(pair.source.size(), pair.target.size());
  AnnotatedSource src = annotate_source_only(pair.source, src_vocab, scheme);
  AnnotatedPair out;
  out.source = std::move(src.tokens);
  out.source_origin = std::move(src.origin);
  out.copies = std::move(src.copies);
  out.target_origin.reserve(pair.target.size());
  return out;
}

} // namespace detail

// Target OOVs aligned to a copy-annotated source word reuse its token; all
// other target OOVs get <unk_null>. Copying needs no offset, so no window.
inline AnnotatedPair annotate_copyable(const SentencePair& pair, const Vocabulary& src_vocab,
                                       const Vocabulary& tgt_vocab, const AlignmentLinks& links,
                                       int max_copy = kDefaultMaxCopy)
{
  const Scheme scheme{SchemeKind::Copyable, kDefaultWindow, max_copy};
  AnnotatedPair out = detail::start_pair(pair, src_vocab, links, scheme);
  out.target.reserve(pair.target.size());
  for (std::size_t j = 0; j < pair.target.size(); ++j) {
    const auto& w = pair.target[j];
    if (!is_oov(w, tgt_vocab)) {
      out.target.push_back(w);
      out.target_origin.push_back({w, std::nullopt});
      continue;
    }
    const auto i = resolve_alignment(static_cast<std::uint32_t>(j + 1), links, std::numeric_limits<int>::max());
    out.target_origin.push_back({w, i});
    if (i && classify_token(out.source[*i - 1], scheme.grammar()).kind == TokenKind::Copy)
      out.target.push_back(out.source[*i - 1]);
    else
      out.target.emplace_back(kUnkNull);
  }
  return out;
}

// Every target word is followed by <p_d> or <p_null>; OOVs become <unk>.
inline AnnotatedPair annotate_posall(const SentencePair& pair, const Vocabulary& src_vocab,
                                     const Vocabulary& tgt_vocab, const AlignmentLinks& links,
                                     int window = kDefaultWindow)
{
  const Scheme scheme{SchemeKind::PosAll, window, kDefaultMaxCopy};
  AnnotatedPair out = detail::start_pair(pair, src_vocab, links, scheme);
  out.target.reserve(2 * pair.target.size());
  for (std::size_t jj = 0; jj < pair.target.size(); ++jj) {
    const auto j = static_cast<std::uint32_t>(jj + 1);
    const auto& w = pair.target[jj];
    const bool oov = is_oov(w, tgt_vocab);
    const auto i = resolve_alignment(j, links, window);
    out.target.push_back(oov ? std::string(kUnk) : w);
    out.target.push_back(i ? positional_token(static_cast<int>(j) - static_cast<int>(*i)) : std::string(kPosNull));
    out.target_origin.push_back({w, oov ? i : std::nullopt});
  }
  return out;
}

// Only target OOVs are annotated, as <unkpos_d> or <unkpos_null>.
inline AnnotatedPair annotate_posunk(const SentencePair& pair, const Vocabulary& src_vocab,
                                     const Vocabulary& tgt_vocab, const AlignmentLinks& links,
                                     int window = kDefaultWindow)
{
  const Scheme scheme{SchemeKind::PosUnk, window, kDefaultMaxCopy};
  AnnotatedPair out = detail::start_pair(pair, src_vocab, links, scheme);
  out.target.reserve(pair.target.size());
  for (std::size_t jj = 0; jj < pair.target.size(); ++jj) {
    const auto j = static_cast<std::uint32_t>(jj + 1);
    const auto& w = pair.target[jj];
    if (!is_oov(w, tgt_vocab)) {
      out.target.push_back(w);
      out.target_origin.push_back({w, std::nullopt});
      continue;
    }
    const auto i = resolve_alignment(j, links, window);
    out.target.push_back(i ? unkpos_token(static_cast<int>(j) - static_cast<int>(*i)) : std::string(kUnkPosNull));
    out.target_origin.push_back({w, i});
  }
  return out;
}

inline AnnotatedPair annotate(const SentencePair& pair, const Vocabulary& src_vocab, const Vocabulary& tgt_vocab,
                              const AlignmentLinks& links, const Scheme& scheme)
{
  scheme.validate();
  switch (scheme.kind) {
  case SchemeKind::Copyable: return annotate_copyable(pair, src_vocab, tgt_vocab, links, scheme.max_copy);
  case SchemeKind::PosAll: return annotate_posall(pair, src_vocab, tgt_vocab, links, scheme.window);
  case SchemeKind::PosUnk: return annotate_posunk(pair, src_vocab, tgt_vocab, links, scheme.window);
  }
  throw UsageError("unknown scheme");
}

// Rebuilds the copy map from an annotated source line and the original words
// at its replaced positions.
inline CopyMap copy_map(const Sentence& annotated_source, const std::map<std::uint32_t, std::string>& originals,
                        const TokenGrammar& grammar = {})
{
  CopyMap out;
  for (const auto& [pos, word] : originals) {
    if (pos < 1 || pos > annotated_source.size())
      throw DataError("provenance position " + std::to_string(pos) + " outside a " +
                      std::to_string(annotated_source.size()) + "-token source");
    const auto tok = classify_token(annotated_source[pos - 1], grammar);
    if (tok.kind != TokenKind::Copy) continue;
    const auto [it, added] = out.emplace(tok.value, word);
    if (!added && it->second != word)
      throw DataError(copy_token(tok.value) + " maps to both '" + it->second + "' and '" + word + "'");
  }
  return out;
}

} // namespace rareword
