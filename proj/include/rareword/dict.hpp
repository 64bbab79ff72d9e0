#pragma once

// Bilingual word dictionary estimated from alignment links.

#include <charconv>
#include <cstdint>
#include <istream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "align.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "io.hpp"

namespace rareword {

inline constexpr std::uint64_t kDefaultMinCount = 100;

// Link occurrence counts per (source word, target word).
class PairCounts {
public:
  void add(const std::string& source, const std::string& target, std::uint64_t n = 1)
  {
    counts_[source][target] += n;
    totals_[source] += n;
    links_ += n;
  }

  // Adds every link of one pair; throws DataError on an out-of-range link.
  void add(const SentencePair& pair, const AlignmentLinks& links)
  {
    links.check_bounds(pair.source.size(), pair.target.size());
    for (const auto& l : links) add(pair.source[l.source - 1], pair.target[l.target - 1]);
  }

  void merge(const PairCounts& other)
  {
    for (const auto& [s, row] : other.counts_)
      for (const auto& [t, n] : row) add(s, t, n);
  }

  std::uint64_t count(const std::string& source, const std::string& target) const
  {
    const auto r = counts_.find(source);
    if (r == counts_.end()) return 0;
    const auto c = r->second.find(target);
    return c == r->second.end() ? 0 : c->second;
  }

  std::uint64_t total(const std::string& source) const
  {
    const auto it = totals_.find(source);
    return it == totals_.end() ? 0 : it->second;
  }

  std::uint64_t total_links() const noexcept { return links_; }

  const std::map<std::string, std::map<std::string, std::uint64_t>>& rows() const noexcept { return counts_; }

  friend bool operator==(const PairCounts&, const PairCounts&) = default;

private:
  std::map<std::string, std::map<std::string, std::uint64_t>> counts_;
  std::map<std::string, std::uint64_t> totals_;
  std::uint64_t links_ = 0;
};

// Sequences must have equal length.
template <class PairRange, class LinksRange>
PairCounts accumulate_counts(const PairRange& pairs, const LinksRange& alignments)
{
  PairCounts out;
  auto a = std::begin(alignments);
  std::size_t line = 0;
  for (const SentencePair& p : pairs) {
    ++line;
    if (a == std::end(alignments))
      throw DataError("alignment stream ended before the corpus at line " + std::to_string(line));
    try {
      out.add(p, *a);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line) + ": " + e.what());
    }
    ++a;
  }
  if (a != std::end(alignments))
    throw DataError("alignment stream is longer than the corpus (" + std::to_string(line) + " pairs)");
  return out;
}

struct DictionaryEntry {
  std::string translation;
  double prob = 0.0;
  std::uint64_t count = 0;

  friend bool operator==(const DictionaryEntry&, const DictionaryEntry&) = default;
};

using DictionaryMap = std::map<std::string, DictionaryEntry, std::less<>>;

class TranslationDictionary {
public:
  TranslationDictionary() = default;
  explicit TranslationDictionary(DictionaryMap entries)
    : entries_(std::move(entries))
  {
  }

  const DictionaryEntry* find(std::string_view source) const
  {
    const auto it = entries_.find(source);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const DictionaryMap& entries() const noexcept { return entries_; }

  friend bool operator==(const TranslationDictionary&, const TranslationDictionary&) = default;

private:
  DictionaryMap entries_;
};

// A candidate needs count > min_count. The best candidate has the highest
// count / total; ties go to the higher count, then the smaller spelling.
inline TranslationDictionary build_dictionary(const PairCounts& counts, std::uint64_t min_count = kDefaultMinCount)
{
  DictionaryMap out;
  for (const auto& [s, row] : counts.rows()) {
    const double total = static_cast<double>(counts.total(s));
    bool found = false;
    DictionaryEntry best;
    for (const auto& [t, n] : row) {
      if (n <= min_count) continue;
      const double p = static_cast<double>(n) / total;
      // rows iterate in ascending t, so strict comparisons keep the smallest
      if (!found || p > best.prob || (p == best.prob && n > best.count)) {
        best = {t, p, n};
        found = true;
      }
    }
    if (found) out.emplace(s, std::move(best));
  }
  return TranslationDictionary(std::move(out));
}

// Dictionary translation, or the word itself.
inline const std::string& lookup(const TranslationDictionary& dict, const std::string& word)
{
  const auto* e = dict.find(word);
  return e ? e->translation : word;
}

inline void write_dictionary(std::ostream& out, const TranslationDictionary& dict)
{
  std::ostringstream buf;
  buf << std::setprecision(17);
  for (const auto& [s, e] : dict.entries()) buf << s << '\t' << e.translation << '\t' << e.prob << '\t' << e.count << '\n';
  out << buf.str();
}

inline TranslationDictionary read_dictionary(std::istream& in)
{
  DictionaryMap entries;
  std::string line;
  std::size_t lineno = 0;
  const auto fail = [&](const std::string& why) {
    throw DataError("dictionary line " + std::to_string(lineno) + ": " + why);
  };
  while (io::read_line(in, line)) {
    ++lineno;
    utf8::validate(line);
    const auto f = io::split(line, '\t');
    if (f.size() != 4 || f[0].empty() || f[1].empty())
      fail("expected source<TAB>translation<TAB>prob<TAB>count");
    DictionaryEntry e{std::string(f[1]), 0.0, 0};
    {
      const auto [end, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), e.prob);
      if (ec != std::errc{} || end != f[2].data() + f[2].size()) fail("bad probability '" + std::string(f[2]) + "'");
      if (!(e.prob >= 0.0 && e.prob <= 1.0)) fail("probability outside [0,1]");
    }
    {
      const auto [end, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), e.count);
      if (ec != std::errc{} || end != f[3].data() + f[3].size()) fail("bad count '" + std::string(f[3]) + "'");
    }
    if (!entries.emplace(std::string(f[0]), std::move(e)).second)
      fail("duplicate source word '" + std::string(f[0]) + "'");
  }
  return TranslationDictionary(std::move(entries));
}

} // namespace rareword
