#pragma once

// Word alignment: IBM Model 1 trained by EM, Viterbi link extraction,
// symmetrization, and the Pharaoh "i-j" text format.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <istream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "io.hpp"

namespace rareword {

// ---------------------------------------------------------------------------
// Links

// 1-based source and target positions.
struct Link {
  std::uint32_t source = 0;
  std::uint32_t target = 0;

  friend bool operator==(const Link&, const Link&) = default;
};

// Orders by target position first, which is also the Pharaoh output order.
struct LinkOrder {
  bool operator()(const Link& a, const Link& b) const noexcept
  {
    return a.target != b.target ? a.target < b.target : a.source < b.source;
  }
};

// Sorted, duplicate-free set of links for one sentence pair.
class AlignmentLinks {
public:
  AlignmentLinks() = default;
  AlignmentLinks(std::initializer_list<Link> links)
    : links_(links)
  {
    normalize();
  }
  explicit AlignmentLinks(std::vector<Link> links)
    : links_(std::move(links))
  {
    normalize();
  }

  void insert(Link l)
  {
    const auto it = std::lower_bound(links_.begin(), links_.end(), l, LinkOrder{});
    if (it == links_.end() || !(*it == l))
      links_.insert(it, l);
  }

  bool contains(Link l) const { return std::binary_search(links_.begin(), links_.end(), l, LinkOrder{}); }

  // Links whose target position is j, ordered by source position.
  std::span<const Link> for_target(std::uint32_t j) const
  {
    const auto lo = std::lower_bound(links_.begin(), links_.end(), Link{0, j}, LinkOrder{});
    auto hi = lo;
    while (hi != links_.end() && hi->target == j) ++hi;
    return {lo, hi};
  }

  AlignmentLinks transposed() const
  {
    std::vector<Link> t;
    t.reserve(links_.size());
    for (const auto& l : links_) t.push_back({l.target, l.source});
    return AlignmentLinks(std::move(t));
  }

  // Throws DataError when a link falls outside an n-by-m pair.
  void check_bounds(std::size_t source_len, std::size_t target_len) const
  {
    for (const auto& l : links_)
      if (l.source < 1 || l.source > source_len || l.target < 1 || l.target > target_len)
        throw DataError("link " + std::to_string(l.source - 1) + "-" + std::to_string(l.target - 1) +
                        " outside a " + std::to_string(source_len) + "x" + std::to_string(target_len) + " pair");
  }

  std::size_t size() const noexcept { return links_.size(); }
  bool empty() const noexcept { return links_.empty(); }
  auto begin() const noexcept { return links_.begin(); }
  auto end() const noexcept { return links_.end(); }
  const std::vector<Link>& links() const noexcept { return links_; }

  friend bool operator==(const AlignmentLinks&, const AlignmentLinks&) = default;

private:
  void normalize()
  {
    std::sort(links_.begin(), links_.end(), LinkOrder{});
    links_.erase(std::unique(links_.begin(), links_.end()), links_.end());
  }

  std::vector<Link> links_;
};

enum class Symmetrization { Intersection, Union };

// `backward` is in its own orientation (target-to-source) and is transposed
// before combining.
inline AlignmentLinks symmetrize(const AlignmentLinks& forward, const AlignmentLinks& backward,
                                 Symmetrization method)
{
  const AlignmentLinks back = backward.transposed();
  std::vector<Link> out;
  if (method == Symmetrization::Intersection)
    std::set_intersection(forward.begin(), forward.end(), back.begin(), back.end(), std::back_inserter(out),
                          LinkOrder{});
  else
    std::set_union(forward.begin(), forward.end(), back.begin(), back.end(), std::back_inserter(out),
                   LinkOrder{});
  return AlignmentLinks(std::move(out));
}

// ---------------------------------------------------------------------------
// Pharaoh format: "i-j" pairs, 0-based, separated by single spaces.

inline AlignmentLinks parse_pharaoh(std::string_view line)
{
  std::vector<Link> links;
  std::size_t pos = 0;
  const auto parse_index = [&](std::size_t begin, std::size_t end) -> std::uint32_t {
    std::uint32_t v = 0;
    if (begin == end)
      throw ParseError("expected an index", begin + 1);
    const auto [p, ec] = std::from_chars(line.data() + begin, line.data() + end, v);
    if (ec != std::errc{} || p != line.data() + end || v == std::numeric_limits<std::uint32_t>::max())
      throw ParseError("bad index '" + std::string(line.substr(begin, end - begin)) + "'", begin + 1);
    return v;
  };
  while (pos < line.size()) {
    const std::size_t end = std::min(line.find(' ', pos), line.size());
    if (end == pos)
      throw ParseError("empty link (stray space)", pos + 1);
    const std::size_t dash = line.find('-', pos);
    if (dash == std::string_view::npos || dash >= end)
      throw ParseError("missing '-' in link '" + std::string(line.substr(pos, end - pos)) + "'", pos + 1);
    const auto i = parse_index(pos, dash);
    const auto j = parse_index(dash + 1, end);
    links.push_back({i + 1, j + 1});
    if (end == line.size()) break;
    pos = end + 1;
    if (pos == line.size())
      throw ParseError("trailing space", end + 1);
  }
  return AlignmentLinks(std::move(links));
}

inline std::string format_pharaoh(const AlignmentLinks& links)
{
  std::string out;
  for (const auto& l : links) {
    if (!out.empty()) out.push_back(' ');
    out += std::to_string(l.source - 1);
    out.push_back('-');
    out += std::to_string(l.target - 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Translation table

inline constexpr std::string_view kNullWord = "<null>";
inline constexpr double kFloorProb = 1e-12;
inline constexpr int kDefaultIterations = 5;

// t(f|e) for source word e (or the NULL word) and target word f.
class TTable {
public:
  void set(std::string_view e, std::string_view f, double p)
  {
    if (!(p >= 0.0 && p <= 1.0))
      throw DataError("probability " + std::to_string(p) + " outside [0,1]");
    probs_[key(intern(sources_, source_words_, e), intern(targets_, target_words_, f))] = p;
  }

  // 0 for pairs never seen in training.
  double prob(std::string_view e, std::string_view f) const
  {
    const auto se = sources_.find(e);
    const auto tf = targets_.find(f);
    if (se == sources_.end() || tf == targets_.end()) return 0.0;
    const auto it = probs_.find(key(se->second, tf->second));
    return it == probs_.end() ? 0.0 : it->second;
  }

  bool empty() const noexcept { return probs_.empty(); }
  std::size_t size() const noexcept { return probs_.size(); }

  struct Entry {
    std::string source;
    std::string target;
    double prob;
  };

  // Sorted by (source, target) byte order.
  std::vector<Entry> entries() const
  {
    std::vector<Entry> out;
    out.reserve(probs_.size());
    for (const auto& [k, p] : probs_)
      out.push_back({source_words_[k >> 32], target_words_[k & 0xffffffffu], p});
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
      return a.source != b.source ? a.source < b.source : a.target < b.target;
    });
    return out;
  }

  // Σ_f t(f|e) per source word.
  std::map<std::string, double> row_sums() const
  {
    std::map<std::string, double> out;
    for (const auto& [k, p] : probs_) out[source_words_[k >> 32]] += p;
    return out;
  }

private:
  static std::uint64_t key(std::uint32_t e, std::uint32_t f) noexcept
  {
    return (static_cast<std::uint64_t>(e) << 32) | f;
  }

  static std::uint32_t intern(StringMap<std::uint32_t>& ids, std::vector<std::string>& words, std::string_view w)
  {
    if (auto it = ids.find(w); it != ids.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(words.size());
    ids.emplace(std::string(w), id);
    words.emplace_back(w);
    return id;
  }

  StringMap<std::uint32_t> sources_, targets_;
  std::vector<std::string> source_words_, target_words_;
  std::unordered_map<std::uint64_t, double> probs_;
};

inline void write_ttable(std::ostream& out, const TTable& table)
{
  std::ostringstream buf;
  buf << std::setprecision(17);
  for (const auto& e : table.entries()) buf << e.source << '\t' << e.target << '\t' << e.prob << '\n';
  out << buf.str();
}

inline TTable read_ttable(std::istream& in)
{
  TTable t;
  std::string line;
  std::size_t lineno = 0;
  while (io::read_line(in, line)) {
    ++lineno;
    const auto f = io::split(line, '\t');
    if (f.size() != 3 || f[0].empty() || f[1].empty())
      throw DataError("ttable line " + std::to_string(lineno) + ": expected e<TAB>f<TAB>prob");
    double p = 0;
    const auto [end, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), p);
    if (ec != std::errc{} || end != f[2].data() + f[2].size())
      throw DataError("ttable line " + std::to_string(lineno) + ": bad probability");
    t.set(f[0], f[1], p);
  }
  return t;
}

// ---------------------------------------------------------------------------
// IBM Model 1

// Expected link counts c(f|e) from one E-step, keyed by (e, f) with the NULL
// word spelled kNullWord.
using ExpectedCounts = std::map<std::pair<std::string, std::string>, double>;

// EM state over an interned copy of the corpus. Source id 0 is the NULL word.
// Accumulation runs in corpus order, so results are bit-reproducible.
class Model1 {
public:
  explicit Model1(std::span<const SentencePair> corpus)
  {
    if (corpus.empty())
      throw UsageError("Model 1 needs a non-empty corpus");
    source_words_.emplace_back(kNullWord);
    StringMap<std::uint32_t> sid, tid;
    const auto intern = [](StringMap<std::uint32_t>& ids, std::vector<std::string>& words, const std::string& w) {
      if (auto it = ids.find(w); it != ids.end()) return it->second;
      const auto id = static_cast<std::uint32_t>(words.size());
      ids.emplace(w, id);
      words.push_back(w);
      return id;
    };
    std::unordered_map<std::uint64_t, std::uint32_t> slot_of;
    pairs_.reserve(corpus.size());
    for (const auto& p : corpus) {
      if (p.source.empty() || p.target.empty())
        throw DataError("Model 1 corpus contains an empty sentence");
      Encoded enc;
      enc.source.push_back(0);
      for (const auto& w : p.source) enc.source.push_back(intern(sid, source_words_, w));
      for (const auto& w : p.target) enc.target.push_back(intern(tid, target_words_, w));
      enc.slots.resize(enc.source.size() * enc.target.size());
      for (std::size_t j = 0; j < enc.target.size(); ++j)
        for (std::size_t i = 0; i < enc.source.size(); ++i) {
          const std::uint64_t k = (static_cast<std::uint64_t>(enc.source[i]) << 32) | enc.target[j];
          auto [it, added] = slot_of.emplace(k, static_cast<std::uint32_t>(slot_source_.size()));
          if (added) {
            slot_source_.push_back(enc.source[i]);
            slot_target_.push_back(enc.target[j]);
          }
          enc.slots[j * enc.source.size() + i] = it->second;
        }
      pairs_.push_back(std::move(enc));
    }
    // uniform over the target words each source word co-occurs with
    std::vector<std::uint32_t> fanout(source_words_.size(), 0);
    for (const auto e : slot_source_) ++fanout[e];
    prob_.resize(slot_source_.size());
    for (std::size_t s = 0; s < prob_.size(); ++s) prob_[s] = 1.0 / fanout[slot_source_[s]];
  }

  // E-step under the current table; returns per-slot expected counts.
  std::vector<double> e_step(double* log_likelihood = nullptr) const
  {
    std::vector<double> counts(prob_.size(), 0.0);
    std::vector<double> col;
    double ll = 0.0;
    for (const auto& p : pairs_) {
      const std::size_t l1 = p.source.size();
      col.resize(l1);
      for (std::size_t j = 0; j < p.target.size(); ++j) {
        const std::uint32_t* slots = &p.slots[j * l1];
        double denom = 0.0;
        for (std::size_t i = 0; i < l1; ++i) {
          col[i] = prob_[slots[i]];
          denom += col[i];
        }
        ll += std::log(denom / static_cast<double>(l1));
        const double inv = 1.0 / denom;
        for (std::size_t i = 0; i < l1; ++i) counts[slots[i]] += col[i] * inv;
      }
    }
    if (log_likelihood) *log_likelihood = ll;
    return counts;
  }

  void m_step(const std::vector<double>& counts)
  {
    std::vector<double> totals(source_words_.size(), 0.0);
    for (std::size_t s = 0; s < counts.size(); ++s) totals[slot_source_[s]] += counts[s];
    for (std::size_t s = 0; s < counts.size(); ++s) {
      const double tot = totals[slot_source_[s]];
      prob_[s] = tot > 0.0 ? counts[s] / tot : 0.0;
    }
  }

  void iterate() { m_step(e_step()); }

  // Σ_pairs Σ_j log( (1/(l+1)) Σ_i t(f_j|e_i) ), constant length term dropped.
  double log_likelihood() const
  {
    double ll = 0.0;
    for (const auto& p : pairs_) {
      const std::size_t l1 = p.source.size();
      for (std::size_t j = 0; j < p.target.size(); ++j) {
        double denom = 0.0;
        for (std::size_t i = 0; i < l1; ++i) denom += prob_[p.slots[j * l1 + i]];
        ll += std::log(denom / static_cast<double>(l1));
      }
    }
    return ll;
  }

  ExpectedCounts expected_counts() const
  {
    const auto counts = e_step();
    ExpectedCounts out;
    for (std::size_t s = 0; s < counts.size(); ++s)
      out[{source_words_[slot_source_[s]], target_words_[slot_target_[s]]}] = counts[s];
    return out;
  }

  TTable table() const
  {
    TTable t;
    for (std::size_t s = 0; s < prob_.size(); ++s)
      t.set(source_words_[slot_source_[s]], target_words_[slot_target_[s]], prob_[s]);
    return t;
  }

private:
  struct Encoded {
    std::vector<std::uint32_t> source;  // with NULL at index 0
    std::vector<std::uint32_t> target;
    std::vector<std::uint32_t> slots;   // row-major [j][i]
  };

  std::vector<Encoded> pairs_;
  std::vector<std::string> source_words_;  // id 0 is NULL
  std::vector<std::string> target_words_;
  std::vector<std::uint32_t> slot_source_, slot_target_;
  std::vector<double> prob_;
};

inline TTable train_model1(std::span<const SentencePair> corpus, int iterations = kDefaultIterations)
{
  if (iterations < 1)
    throw UsageError("Model 1 needs at least one EM iteration");
  Model1 model(corpus);
  for (int k = 0; k < iterations; ++k) model.iterate();
  return model.table();
}

// Each target word links to its most probable source word; NULL wins ties
// and NULL links are omitted.
inline AlignmentLinks viterbi_align(const TTable& table, const SentencePair& pair)
{
  if (table.empty())
    throw UsageError("Viterbi alignment needs a non-empty translation table");
  std::vector<Link> links;
  for (std::size_t j = 0; j < pair.target.size(); ++j) {
    const auto& f = pair.target[j];
    double best = std::max(table.prob(kNullWord, f), kFloorProb);
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < pair.source.size(); ++i) {
      const double p = std::max(table.prob(pair.source[i], f), kFloorProb);
      if (p > best) {
        best = p;
        best_i = i + 1;
      }
    }
    if (best_i != 0)
      links.push_back({static_cast<std::uint32_t>(best_i), static_cast<std::uint32_t>(j + 1)});
  }
  return AlignmentLinks(std::move(links));
}

inline SentencePair reversed(const SentencePair& p) { return {p.target, p.source}; }

} // namespace rareword
