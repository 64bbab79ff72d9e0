#pragma once

// Parallel-corpus I/O, tokenization, vocabularies and length filtering.
//
// Positions handed out by this library are 1-based. Conversions to and from
// 0-based file formats happen at the format boundary only.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"
#include "io.hpp"
#include "tokens.hpp"
#include "utf8.hpp"

namespace rareword {

using Sentence = std::vector<std::string>;

struct SentencePair {
  Sentence source;
  Sentence target;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

template <class V>
using StringMap = std::unordered_map<std::string, V, StringHash, std::equal_to<>>;

// ---------------------------------------------------------------------------
// Tokenization

enum class TokenizeMode {
  Whitespace,
  // Also splits leading and trailing ASCII punctuation off word characters.
  Aggressive,
};

namespace detail {

constexpr bool is_space(char c) noexcept
{
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

constexpr bool is_punct(char c) noexcept
{
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

inline void push_aggressive(Sentence& out, std::string_view word)
{
  std::size_t b = 0, e = word.size();
  while (b < e && is_punct(word[b])) ++b;
  while (e > b && is_punct(word[e - 1])) --e;
  if (b == e) {
    // all punctuation: keep as one token
    out.emplace_back(word);
    return;
  }
  for (std::size_t i = 0; i < b; ++i) out.emplace_back(1, word[i]);
  out.emplace_back(word.substr(b, e - b));
  for (std::size_t i = e; i < word.size(); ++i) out.emplace_back(1, word[i]);
}

} // namespace detail

// Throws DecodeError on invalid UTF-8 and DataError on a line with no tokens.
inline Sentence tokenize(std::string_view text, TokenizeMode mode = TokenizeMode::Whitespace)
{
  utf8::validate(text);
  Sentence out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && detail::is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < n && !detail::is_space(text[i])) ++i;
    if (i == start) break;
    const auto word = text.substr(start, i - start);
    if (mode == TokenizeMode::Aggressive)
      detail::push_aggressive(out, word);
    else
      out.emplace_back(word);
  }
  if (out.empty())
    throw DataError("empty sentence");
  return out;
}

// Corpus text must not contain spellings that the annotation schemes reserve.
inline void check_no_reserved(const Sentence& s)
{
  for (std::size_t i = 0; i < s.size(); ++i)
    if (is_reserved(s[i]))
      throw DataError("token " + std::to_string(i + 1) + " '" + s[i] + "' collides with a reserved spelling");
}

inline std::string join(const Sentence& s)
{
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out.push_back(' ');
    out += s[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Word counts

struct WordCount {
  std::string word;
  std::uint64_t count = 0;

  friend bool operator==(const WordCount&, const WordCount&) = default;
};

// Occurrence counts that remember first-occurrence order, so ranking is
// deterministic: higher count first, then earlier first occurrence.
class WordCounter {
public:
  void add(std::string_view word)
  {
    if (auto it = index_.find(word); it != index_.end()) {
      ++entries_[it->second].count;
      return;
    }
    index_.emplace(std::string(word), entries_.size());
    entries_.push_back({std::string(word), 1});
  }

  void add(const Sentence& s)
  {
    for (const auto& w : s) add(w);
  }

  // Adds another counter's totals; new words are appended in its order.
  void merge(const WordCounter& other)
  {
    for (const auto& e : other.entries_) {
      if (auto it = index_.find(e.word); it != index_.end()) {
        entries_[it->second].count += e.count;
      } else {
        index_.emplace(e.word, entries_.size());
        entries_.push_back(e);
      }
    }
  }

  std::uint64_t count(std::string_view word) const
  {
    const auto it = index_.find(word);
    return it == index_.end() ? 0 : entries_[it->second].count;
  }

  std::size_t size() const noexcept { return entries_.size(); }

  std::vector<WordCount> ranked() const
  {
    std::vector<WordCount> out = entries_;
    std::stable_sort(out.begin(), out.end(),
                     [](const WordCount& a, const WordCount& b) { return a.count > b.count; });
    return out;
  }

private:
  StringMap<std::size_t> index_;
  std::vector<WordCount> entries_;
};

// Ranked training counts as persisted next to a vocabulary. Rank 1 is the
// most frequent word.
class FrequencyTable {
public:
  FrequencyTable() = default;

  explicit FrequencyTable(std::vector<WordCount> ranked)
    : ranked_(std::move(ranked))
  {
    for (std::size_t i = 0; i < ranked_.size(); ++i) {
      if (i > 0 && ranked_[i].count > ranked_[i - 1].count)
        throw DataError("frequency table not sorted by descending count at entry " + std::to_string(i + 1));
      if (!index_.emplace(ranked_[i].word, i).second)
        throw DataError("duplicate word '" + ranked_[i].word + "' in frequency table");
    }
  }

  std::uint64_t count(std::string_view word) const
  {
    const auto it = index_.find(word);
    return it == index_.end() ? 0 : ranked_[it->second].count;
  }

  std::optional<std::size_t> rank(std::string_view word) const
  {
    const auto it = index_.find(word);
    if (it == index_.end()) return std::nullopt;
    return it->second + 1;
  }

  std::size_t size() const noexcept { return ranked_.size(); }
  const std::vector<WordCount>& entries() const noexcept { return ranked_; }

private:
  std::vector<WordCount> ranked_;
  StringMap<std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Vocabulary

inline const std::vector<std::string>& default_specials()
{
  static const std::vector<std::string> specials{std::string(kUnk)};
  return specials;
}

// Ids are contiguous from 0; specials take the lowest ids.
class Vocabulary {
public:
  using Id = std::uint32_t;

  Vocabulary() = default;

  Vocabulary(std::vector<std::string> specials, std::vector<std::string> words, std::size_t capacity)
    : capacity_(capacity), num_specials_(specials.size())
  {
    if (words.size() > capacity)
      throw UsageError("vocabulary has " + std::to_string(words.size()) + " words but capacity " +
                       std::to_string(capacity));
    by_id_ = std::move(specials);
    by_id_.insert(by_id_.end(), std::make_move_iterator(words.begin()), std::make_move_iterator(words.end()));
    for (std::size_t i = 0; i < by_id_.size(); ++i)
      if (!ids_.emplace(by_id_[i], static_cast<Id>(i)).second)
        throw DataError("duplicate vocabulary entry '" + by_id_[i] + "'");
  }

  std::optional<Id> id(std::string_view word) const
  {
    const auto it = ids_.find(word);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(std::string_view word) const { return ids_.find(word) != ids_.end(); }
  bool is_special(std::string_view word) const
  {
    const auto i = id(word);
    return i && *i < num_specials_;
  }

  const std::string& word(Id id) const { return by_id_.at(id); }
  std::size_t size() const noexcept { return by_id_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t num_specials() const noexcept { return num_specials_; }

  std::vector<std::string> specials() const
  {
    return {by_id_.begin(), by_id_.begin() + static_cast<std::ptrdiff_t>(num_specials_)};
  }

  std::vector<std::string> words() const
  {
    return {by_id_.begin() + static_cast<std::ptrdiff_t>(num_specials_), by_id_.end()};
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b)
  {
    return a.capacity_ == b.capacity_ && a.num_specials_ == b.num_specials_ && a.by_id_ == b.by_id_;
  }

private:
  StringMap<Id> ids_;
  std::vector<std::string> by_id_;
  std::size_t capacity_ = 0;
  std::size_t num_specials_ = 0;
};

struct VocabularyBuild {
  Vocabulary vocab;
  FrequencyTable counts;  // every counted word, ranked
};

// Top-k words of a counter. Words spelled like a special are not ranked.
inline VocabularyBuild build_vocab(const WordCounter& counter, std::size_t k,
                                   std::vector<std::string> specials = default_specials())
{
  if (k < 1)
    throw UsageError("vocabulary size must be at least 1");
  std::vector<WordCount> ranked = counter.ranked();
  std::erase_if(ranked, [&](const WordCount& wc) {
    return std::find(specials.begin(), specials.end(), wc.word) != specials.end();
  });
  std::vector<std::string> words;
  words.reserve(std::min(k, ranked.size()));
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i)
    words.push_back(ranked[i].word);
  return {Vocabulary(std::move(specials), std::move(words), k), FrequencyTable(std::move(ranked))};
}

template <class SentenceRange>
VocabularyBuild build_vocab(const SentenceRange& sentences, std::size_t k,
                            std::vector<std::string> specials = default_specials())
  requires(!std::is_same_v<SentenceRange, WordCounter>)
{
  if (k < 1)
    throw UsageError("vocabulary size must be at least 1");
  WordCounter counter;
  for (const Sentence& s : sentences) counter.add(s);
  return build_vocab(counter, k, std::move(specials));
}

// Specials are always known.
inline bool is_oov(std::string_view word, const Vocabulary& vocab)
{
  return !vocab.contains(word);
}

// ---------------------------------------------------------------------------
// Length filter

constexpr std::size_t kDefaultMaxLength = 100;

// A pair is dropped when either side has more than max_len tokens.
inline bool within_length(const SentencePair& pair, std::size_t max_len) noexcept
{
  return pair.source.size() <= max_len && pair.target.size() <= max_len;
}

struct FilterResult {
  std::vector<SentencePair> kept;
  std::size_t dropped = 0;
};

template <class PairRange>
FilterResult filter_pairs(const PairRange& pairs, std::size_t max_len = kDefaultMaxLength)
{
  if (max_len < 1)
    throw UsageError("max_len must be at least 1");
  FilterResult out;
  for (const SentencePair& p : pairs) {
    if (within_length(p, max_len))
      out.kept.push_back(p);
    else
      ++out.dropped;
  }
  return out;
}

// ---------------------------------------------------------------------------
// File formats

// Non-special words, one per line, in id order.
inline void write_vocabulary(std::ostream& out, const Vocabulary& vocab)
{
  for (const auto& w : vocab.words()) out << w << '\n';
}

inline void write_counts(std::ostream& out, const FrequencyTable& counts)
{
  for (const auto& e : counts.entries()) out << e.word << '\t' << e.count << '\n';
}

inline Vocabulary read_vocabulary(std::istream& in, std::vector<std::string> specials = default_specials())
{
  std::vector<std::string> words;
  std::string line;
  std::size_t lineno = 0;
  while (io::read_line(in, line)) {
    ++lineno;
    utf8::validate(line);
    if (line.empty() || line.find_first_of(" \t") != std::string::npos)
      throw DataError("vocabulary line " + std::to_string(lineno) + ": expected a single word");
    words.push_back(line);
  }
  const std::size_t cap = words.size();
  return Vocabulary(std::move(specials), std::move(words), cap);
}

inline FrequencyTable read_counts(std::istream& in)
{
  std::vector<WordCount> entries;
  std::string line;
  std::size_t lineno = 0;
  while (io::read_line(in, line)) {
    ++lineno;
    const auto fields = io::split(line, '\t');
    std::uint64_t c = 0;
    if (fields.size() != 2 || fields[0].empty())
      throw DataError("counts line " + std::to_string(lineno) + ": expected word<TAB>count");
    const auto [end, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), c);
    if (ec != std::errc{} || end != fields[1].data() + fields[1].size())
      throw DataError("counts line " + std::to_string(lineno) + ": bad count '" + std::string(fields[1]) + "'");
    entries.push_back({std::string(fields[0]), c});
  }
  return FrequencyTable(std::move(entries));
}

// Reads a parallel corpus fully into memory. Sides must have equal line counts.
inline std::vector<SentencePair> read_parallel(std::istream& src, std::istream& tgt,
                                               TokenizeMode mode = TokenizeMode::Whitespace)
{
  std::vector<SentencePair> out;
  std::string ls, lt;
  std::size_t lineno = 0;
  for (;;) {
    const bool hs = io::read_line(src, ls);
    const bool ht = io::read_line(tgt, lt);
    if (!hs && !ht) break;
    ++lineno;
    if (hs != ht)
      throw DataError("parallel corpus sides differ in length at line " + std::to_string(lineno));
    try {
      SentencePair p{tokenize(ls, mode), tokenize(lt, mode)};
      check_no_reserved(p.source);
      check_no_reserved(p.target);
      out.push_back(std::move(p));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

} // namespace rareword
