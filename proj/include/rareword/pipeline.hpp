#pragma once

// Line-streaming drivers for annotation and post-processing. Memory use is
// bounded by one line per input plus the vocabularies and dictionary.

#include <charconv>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "align.hpp"
#include "annotate.hpp"
#include "corpus.hpp"
#include "dict.hpp"
#include "error.hpp"
#include "io.hpp"
#include "postprocess.hpp"

namespace rareword {

// Like tokenize, but a blank line is an empty sentence.
inline Sentence tokenize_output(std::string_view line, TokenizeMode mode = TokenizeMode::Whitespace)
{
  utf8::validate(line);
  if (line.find_first_not_of(" \t\v\f\r\n") == std::string_view::npos) return {};
  return tokenize(line, mode);
}

inline void write_sentence(std::ostream& out, const Sentence& s)
{
  io::write_joined(out, s);
  out.put('\n');
}

// Per-line annotation over borrowed vocabularies.
class LineAnnotator {
public:
  LineAnnotator(const Vocabulary& src_vocab, const Vocabulary& tgt_vocab, Scheme scheme,
                TokenizeMode mode = TokenizeMode::Whitespace)
    : src_vocab_(&src_vocab), tgt_vocab_(&tgt_vocab), scheme_(scheme), mode_(mode)
  {
    scheme_.validate();
  }

  AnnotatedPair pair(std::string_view source, std::string_view target, std::string_view alignment) const
  {
    SentencePair p{tokenize(source, mode_), tokenize(target, mode_)};
    check_no_reserved(p.source);
    check_no_reserved(p.target);
    return annotate(p, *src_vocab_, *tgt_vocab_, parse_pharaoh(alignment), scheme_);
  }

  AnnotatedSource source(std::string_view source) const
  {
    const Sentence s = tokenize(source, mode_);
    check_no_reserved(s);
    return annotate_source_only(s, *src_vocab_, scheme_);
  }

  const Scheme& scheme() const noexcept { return scheme_; }

private:
  const Vocabulary* src_vocab_;
  const Vocabulary* tgt_vocab_;
  Scheme scheme_;
  TokenizeMode mode_;
};

inline void write_provenance(std::ostream& out, std::uint64_t line, const std::vector<TokenOrigin>& origin,
                             const Sentence& tokens)
{
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (tokens[i] != origin[i].word) out << line << '\t' << i + 1 << '\t' << origin[i].word << '\n';
}

struct AnnotateStreams {
  std::istream& source;
  std::istream* target = nullptr;     // null for source-only annotation
  std::istream* alignment = nullptr;  // required with target
  std::ostream& out_source;
  std::ostream* out_target = nullptr;
  std::ostream* provenance = nullptr;  // "line<TAB>position<TAB>word", 1-based
};

// Returns the number of lines processed. Errors carry the 1-based line.
inline std::uint64_t annotate_stream(const LineAnnotator& annotator, AnnotateStreams s)
{
  if (s.target && !s.alignment)
    throw UsageError("pair annotation needs an alignment stream");
  std::string ls, lt, la;
  std::uint64_t line = 0;
  for (;;) {
    const bool hs = io::read_line(s.source, ls);
    if (!s.target) {
      if (!hs) break;
      ++line;
      try {
        const auto a = annotator.source(ls);
        write_sentence(s.out_source, a.tokens);
        if (s.provenance) write_provenance(*s.provenance, line, a.origin, a.tokens);
      } catch (const DataError& e) {
        throw DataError("line " + std::to_string(line) + ": " + e.what());
      }
      continue;
    }
    const bool ht = io::read_line(*s.target, lt);
    const bool ha = io::read_line(*s.alignment, la);
    if (!hs && !ht && !ha) break;
    ++line;
    if (!(hs && ht && ha))
      throw DataError("source, target and alignment streams differ in length at line " + std::to_string(line));
    try {
      const auto a = annotator.pair(ls, lt, la);
      write_sentence(s.out_source, a.source);
      if (s.out_target) write_sentence(*s.out_target, a.target);
      if (s.provenance) write_provenance(*s.provenance, line, a.source_origin, a.source);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line) + ": " + e.what());
    }
  }
  return line;
}

// Sequential reader over a provenance sidecar sorted by line.
class ProvenanceReader {
public:
  explicit ProvenanceReader(std::istream& in)
    : in_(&in)
  {
    advance();
  }

  // position -> original word for the given 1-based line.
  std::map<std::uint32_t, std::string> take(std::uint64_t line)
  {
    std::map<std::uint32_t, std::string> out;
    while (pending_ && pending_->line == line) {
      out.emplace(pending_->position, pending_->word);
      advance();
    }
    if (pending_ && pending_->line < line)
      throw DataError("provenance record " + std::to_string(record_) + " is out of line order");
    return out;
  }

private:
  struct Record {
    std::uint64_t line;
    std::uint32_t position;
    std::string word;
  };

  void advance()
  {
    pending_.reset();
    std::string text;
    if (!io::read_line(*in_, text)) return;
    ++record_;
    const auto f = io::split(text, '\t');
    Record r{0, 0, {}};
    const auto num = [&](std::string_view v, auto& out) {
      const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
      return ec == std::errc{} && end == v.data() + v.size();
    };
    if (f.size() != 3 || !num(f[0], r.line) || !num(f[1], r.position) || f[2].empty())
      throw DataError("provenance record " + std::to_string(record_) + ": expected line<TAB>position<TAB>word");
    r.word = std::string(f[2]);
    pending_ = std::move(r);
  }

  std::istream* in_;
  std::optional<Record> pending_;
  std::uint64_t record_ = 0;
};

enum class PostprocessMode { Copyable, PosAll, PosUnk, NoAlign };

inline PostprocessMode parse_postprocess_mode(std::string_view s)
{
  if (s == "noalign") return PostprocessMode::NoAlign;
  switch (parse_scheme(s)) {
  case SchemeKind::Copyable: return PostprocessMode::Copyable;
  case SchemeKind::PosAll: return PostprocessMode::PosAll;
  case SchemeKind::PosUnk: return PostprocessMode::PosUnk;
  }
  throw UsageError("unknown scheme");
}

struct PostprocessStreams {
  std::istream& output;                      // translator output
  std::istream* source = nullptr;            // original source; PosAll, PosUnk, NoAlign
  std::istream* annotated_source = nullptr;  // Copyable
  std::istream* provenance = nullptr;        // Copyable
  std::ostream& out;
};

// Per-line driver for one post-processing mode. Translator output is split on
// whitespace only; the source uses the tokenization it was annotated with.
class LinePostprocessor {
public:
  LinePostprocessor(Postprocessor& post, PostprocessMode mode, const Vocabulary* src_vocab = nullptr,
                    TokenizeMode tokenize = TokenizeMode::Whitespace)
    : post_(&post), mode_(mode), src_vocab_(src_vocab), tokenize_(tokenize)
  {
    if (mode_ == PostprocessMode::NoAlign && !src_vocab_)
      throw UsageError("NoAlign post-processing needs the source vocabulary");
  }

  Sentence process(std::string_view output, std::string_view source) const
  {
    const Sentence out = tokenize_output(output);
    const Sentence src = tokenize_output(source, tokenize_);
    switch (mode_) {
    case PostprocessMode::PosUnk: return post_->posunk(out, src);
    case PostprocessMode::PosAll: return post_->posall(out, src);
    case PostprocessMode::NoAlign: return post_->noalign(out, source_oovs(src, *src_vocab_));
    case PostprocessMode::Copyable: break;
    }
    throw UsageError("Copyable post-processing needs a copy map");
  }

  Sentence process_copyable(std::string_view output, const CopyMap& copies) const
  {
    return post_->copyable(tokenize_output(output), copies);
  }

  PostprocessMode mode() const noexcept { return mode_; }

private:
  Postprocessor* post_;
  PostprocessMode mode_;
  const Vocabulary* src_vocab_;
  TokenizeMode tokenize_;
};

inline constexpr TokenGrammar kAnyCopyIndex{std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};

inline std::uint64_t postprocess_stream(const LinePostprocessor& proc, PostprocessStreams s)
{
  const bool copyable = proc.mode() == PostprocessMode::Copyable;
  std::istream* paired = copyable ? s.annotated_source : s.source;
  if (!paired)
    throw UsageError(copyable ? "Copyable post-processing needs the annotated source"
                              : "post-processing needs the original source");
  if (copyable && !s.provenance)
    throw UsageError("Copyable post-processing needs the provenance file");
  std::optional<ProvenanceReader> prov;
  if (copyable) prov.emplace(*s.provenance);

  std::string lo, ls;
  std::uint64_t line = 0;
  for (;;) {
    const bool ho = io::read_line(s.output, lo);
    const bool hs = io::read_line(*paired, ls);
    if (!ho && !hs) break;
    ++line;
    if (ho != hs)
      throw DataError("translator output and source differ in length at line " + std::to_string(line));
    try {
      if (copyable) {
        const auto originals = prov->take(line);
        const CopyMap copies = copy_map(tokenize_output(ls), originals, kAnyCopyIndex);
        write_sentence(s.out, proc.process_copyable(lo, copies));
      } else {
        write_sentence(s.out, proc.process(lo, ls));
      }
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line) + ": " + e.what());
    }
  }
  return line;
}

} // namespace rareword
