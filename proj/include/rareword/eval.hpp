#pragma once

// Tokenized corpus BLEU and rarity-bucketed evaluation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"

namespace rareword {

inline constexpr int kDefaultMaxOrder = 4;

struct BleuReport {
  double bleu = 0.0;
  std::vector<double> precisions;  // p_1..p_N
  double brevity_penalty = 0.0;
  std::uint64_t hyp_length = 0;
  std::uint64_t ref_length = 0;
};

// Additive sufficient statistics of corpus BLEU.
struct BleuStats {
  std::vector<std::uint64_t> matches;
  std::vector<std::uint64_t> totals;
  std::uint64_t hyp_length = 0;
  std::uint64_t ref_length = 0;

  explicit BleuStats(int max_n = kDefaultMaxOrder)
    : matches(static_cast<std::size_t>(max_n), 0), totals(static_cast<std::size_t>(max_n), 0)
  {
  }

  BleuStats& operator+=(const BleuStats& o)
  {
    for (std::size_t n = 0; n < matches.size(); ++n) {
      matches[n] += o.matches[n];
      totals[n] += o.totals[n];
    }
    hyp_length += o.hyp_length;
    ref_length += o.ref_length;
    return *this;
  }

  // Geometric mean of clipped precisions times min(1, e^(1 - r/c)); zero
  // when any precision is zero. No smoothing.
  BleuReport report() const
  {
    BleuReport r;
    r.hyp_length = hyp_length;
    r.ref_length = ref_length;
    r.precisions.assign(matches.size(), 0.0);
    bool any_zero = false;
    double log_sum = 0.0;
    for (std::size_t n = 0; n < matches.size(); ++n) {
      if (totals[n] > 0) r.precisions[n] = static_cast<double>(matches[n]) / static_cast<double>(totals[n]);
      if (matches[n] == 0)
        any_zero = true;
      else
        log_sum += std::log(r.precisions[n]);
    }
    if (hyp_length == 0)
      r.brevity_penalty = 0.0;
    else if (hyp_length >= ref_length)
      r.brevity_penalty = 1.0;
    else
      r.brevity_penalty = std::exp(1.0 - static_cast<double>(ref_length) / static_cast<double>(hyp_length));
    r.bleu = any_zero ? 0.0 : r.brevity_penalty * std::exp(log_sum / static_cast<double>(matches.size()));
    return r;
  }
};

namespace detail {

inline std::string ascii_lower(std::string_view s)
{
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

using NgramCounts = std::unordered_map<std::string, std::uint32_t>;

// n-grams keyed by their tokens joined with a separator no token contains.
inline void count_ngrams(const Sentence& s, int n, NgramCounts& out)
{
  out.clear();
  if (static_cast<int>(s.size()) < n) return;
  std::string key;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= s.size(); ++i) {
    key.clear();
    for (int k = 0; k < n; ++k) {
      if (k) key.push_back(' ');
      key += s[i + static_cast<std::size_t>(k)];
    }
    ++out[key];
  }
}

} // namespace detail

// Per-sentence statistics: clipped counts against the max count over the
// references, and the reference length closest to the hypothesis (shorter on
// ties).
inline BleuStats sentence_stats(const Sentence& hyp_in, std::span<const Sentence> refs_in, int max_n = kDefaultMaxOrder,
                                bool lowercase = false)
{
  if (refs_in.empty())
    throw UsageError("every hypothesis needs at least one reference");
  const auto prep = [&](const Sentence& s) {
    if (!lowercase) return s;
    Sentence out;
    out.reserve(s.size());
    for (const auto& t : s) out.push_back(detail::ascii_lower(t));
    return out;
  };
  const Sentence hyp = prep(hyp_in);
  std::vector<Sentence> refs;
  refs.reserve(refs_in.size());
  for (const auto& r : refs_in) refs.push_back(prep(r));

  BleuStats st(max_n);
  st.hyp_length = hyp.size();
  std::size_t best_len = refs.front().size();
  for (const auto& r : refs) {
    const auto diff = [&](std::size_t len) {
      return len > hyp.size() ? len - hyp.size() : hyp.size() - len;
    };
    if (diff(r.size()) < diff(best_len) || (diff(r.size()) == diff(best_len) && r.size() < best_len))
      best_len = r.size();
  }
  st.ref_length = best_len;

  detail::NgramCounts hc, rc;
  std::unordered_map<std::string, std::uint32_t> max_ref;
  for (int n = 1; n <= max_n; ++n) {
    detail::count_ngrams(hyp, n, hc);
    max_ref.clear();
    for (const auto& r : refs) {
      detail::count_ngrams(r, n, rc);
      for (const auto& [g, c] : rc) {
        auto& m = max_ref[g];
        m = std::max(m, c);
      }
    }
    std::uint64_t matched = 0, total = 0;
    for (const auto& [g, c] : hc) {
      total += c;
      if (const auto it = max_ref.find(g); it != max_ref.end()) matched += std::min(c, it->second);
    }
    st.matches[static_cast<std::size_t>(n - 1)] = matched;
    st.totals[static_cast<std::size_t>(n - 1)] = total;
  }
  return st;
}

// references[k] holds every reference for hypotheses[k].
inline BleuReport corpus_bleu(std::span<const Sentence> hypotheses, std::span<const std::vector<Sentence>> references,
                              int max_n = kDefaultMaxOrder, bool lowercase = false)
{
  if (hypotheses.empty())
    throw UsageError("BLEU needs a non-empty corpus");
  if (hypotheses.size() != references.size())
    throw UsageError("BLEU: " + std::to_string(hypotheses.size()) + " hypotheses but " +
                     std::to_string(references.size()) + " reference sets");
  if (max_n < 1)
    throw UsageError("BLEU order must be at least 1");
  BleuStats total(max_n);
  for (std::size_t k = 0; k < hypotheses.size(); ++k) total += sentence_stats(hypotheses[k], references[k], max_n, lowercase);
  return total.report();
}

// ---------------------------------------------------------------------------
// Rarity

enum class RarityMetric {
  InverseFrequency,  // mean of 1 / max(count, 1)
  FrequencyRank,     // mean 1-based rank; unseen words rank |table| + 1
};

inline RarityMetric parse_metric(std::string_view s)
{
  if (s == "inverse_frequency") return RarityMetric::InverseFrequency;
  if (s == "frequency_rank") return RarityMetric::FrequencyRank;
  throw UsageError("unknown rarity metric '" + std::string(s) + "'");
}

inline double rarity_score(const Sentence& sentence, const FrequencyTable& train_counts,
                           RarityMetric metric = RarityMetric::InverseFrequency)
{
  if (sentence.empty())
    throw UsageError("rarity of an empty sentence is undefined");
  double sum = 0.0;
  for (const auto& w : sentence) {
    if (metric == RarityMetric::InverseFrequency) {
      sum += 1.0 / static_cast<double>(std::max<std::uint64_t>(train_counts.count(w), 1));
    } else {
      const auto r = train_counts.rank(w);
      sum += static_cast<double>(r ? *r : train_counts.size() + 1);
    }
  }
  return sum / static_cast<double>(sentence.size());
}

struct Bucket {
  std::vector<std::size_t> ids;  // 0-based indices into the test set
  double mean_rarity = 0.0;
  BleuReport bleu;
};

struct BucketReport {
  std::vector<Bucket> groups;  // ascending rarity
};

// Stable sort by rarity, then consecutive slices of group_size; the last
// slice may be smaller.
inline BucketReport bucketize(std::span<const Sentence> sentences, const FrequencyTable& train_counts,
                              std::size_t group_size, RarityMetric metric = RarityMetric::InverseFrequency)
{
  if (group_size < 1)
    throw UsageError("group size must be at least 1");
  std::vector<double> score(sentences.size());
  for (std::size_t k = 0; k < sentences.size(); ++k) score[k] = rarity_score(sentences[k], train_counts, metric);
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  BucketReport out;
  for (std::size_t start = 0; start < order.size(); start += group_size) {
    Bucket b;
    const std::size_t end = std::min(order.size(), start + group_size);
    b.ids.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
    double sum = 0.0;
    for (const auto id : b.ids) sum += score[id];
    b.mean_rarity = sum / static_cast<double>(b.ids.size());
    out.groups.push_back(std::move(b));
  }
  return out;
}

// Fills in each group's BLEU from its own sentences only.
inline BucketReport bucket_bleu(BucketReport buckets, std::span<const Sentence> hypotheses,
                                std::span<const std::vector<Sentence>> references, int max_n = kDefaultMaxOrder,
                                bool lowercase = false)
{
  for (auto& g : buckets.groups) {
    std::vector<Sentence> hyps;
    std::vector<std::vector<Sentence>> refs;
    hyps.reserve(g.ids.size());
    refs.reserve(g.ids.size());
    for (const auto id : g.ids) {
      if (id >= hypotheses.size() || id >= references.size())
        throw DataError("bucket sentence id " + std::to_string(id) + " has no hypothesis or reference");
      hyps.push_back(hypotheses[id]);
      refs.push_back(references[id]);
    }
    g.bleu = corpus_bleu(hyps, refs, max_n, lowercase);
  }
  return buckets;
}

inline void write_bucket_report(std::ostream& out, const BucketReport& report)
{
  std::ostringstream buf;
  buf << std::setprecision(10);
  const std::size_t orders = report.groups.empty() ? kDefaultMaxOrder : report.groups.front().bleu.precisions.size();
  buf << "group\tsize\tmean_rarity\tbleu";
  for (std::size_t n = 1; n <= orders; ++n) buf << "\tp" << n;
  buf << "\tbp\n";
  for (std::size_t k = 0; k < report.groups.size(); ++k) {
    const auto& g = report.groups[k];
    buf << k + 1 << '\t' << g.ids.size() << '\t' << g.mean_rarity << '\t' << g.bleu.bleu;
    for (const auto p : g.bleu.precisions) buf << '\t' << p;
    buf << '\t' << g.bleu.brevity_penalty << '\n';
  }
  out << buf.str();
}

inline void write_bleu_report(std::ostream& out, const BleuReport& r)
{
  std::ostringstream buf;
  buf << std::setprecision(10);
  buf << "bleu\t" << r.bleu << '\n';
  for (std::size_t n = 0; n < r.precisions.size(); ++n) buf << 'p' << n + 1 << '\t' << r.precisions[n] << '\n';
  buf << "brevity_penalty\t" << r.brevity_penalty << '\n'
      << "hyp_length\t" << r.hyp_length << '\n'
      << "ref_length\t" << r.ref_length << '\n';
  out << buf.str();
}

} // namespace rareword
