#pragma once

// Flat key = value pipeline configuration. Unknown keys are errors.

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "align.hpp"
#include "annotate.hpp"
#include "corpus.hpp"
#include "dict.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "io.hpp"
#include "postprocess.hpp"

namespace rareword {

enum class AlignDirection { Intersection, Union, Forward, Backward };

inline AlignDirection parse_direction(std::string_view s)
{
  if (s == "intersection") return AlignDirection::Intersection;
  if (s == "union") return AlignDirection::Union;
  if (s == "forward") return AlignDirection::Forward;
  if (s == "backward") return AlignDirection::Backward;
  throw UsageError("unknown symmetrization '" + std::string(s) + "'");
}

struct PipelineConfig {
  std::string scheme = "posunk";  // copyable | posall | posunk | noalign (postprocess only)
  int window = kDefaultWindow;
  int max_copy = kDefaultMaxCopy;
  std::uint64_t src_vocab_size = 200000;
  std::uint64_t tgt_vocab_size = 40000;
  std::uint64_t min_count = kDefaultMinCount;
  std::uint64_t max_len = kDefaultMaxLength;
  int iterations = kDefaultIterations;
  std::string symmetrize = "intersection";
  std::string metric = "inverse_frequency";
  std::string fallback = "drop";
  std::uint64_t group_size = 500;
  std::string tokenize = "whitespace";
  bool lowercase = false;
  int max_order = kDefaultMaxOrder;

  static const std::vector<std::string>& keys()
  {
    static const std::vector<std::string> k{
      "scheme", "window", "max_copy", "src_vocab_size", "tgt_vocab_size", "min_count", "max_len", "iterations",
      "symmetrize", "metric", "fallback", "group_size", "tokenize", "lowercase", "max_order"};
    return k;
  }

  // Validates the value against the owning module's range.
  void set(std::string_view key, std::string_view value)
  {
    const std::string k(key), v(value);
    if (key == "scheme") {
      if (value != "noalign") parse_scheme(value);
      scheme = v;
    } else if (key == "window") {
      window = parse_int(k, v, 0);
    } else if (key == "max_copy") {
      max_copy = parse_int(k, v, 1);
    } else if (key == "src_vocab_size") {
      src_vocab_size = parse_u64(k, v, 1);
    } else if (key == "tgt_vocab_size") {
      tgt_vocab_size = parse_u64(k, v, 1);
    } else if (key == "min_count") {
      min_count = parse_u64(k, v, 0);
    } else if (key == "max_len") {
      max_len = parse_u64(k, v, 1);
    } else if (key == "iterations") {
      iterations = parse_int(k, v, 1);
    } else if (key == "symmetrize") {
      parse_direction(value);
      symmetrize = v;
    } else if (key == "metric") {
      parse_metric(value);
      metric = v;
    } else if (key == "fallback") {
      parse_fallback(value);
      fallback = v;
    } else if (key == "group_size") {
      group_size = parse_u64(k, v, 1);
    } else if (key == "tokenize") {
      if (value != "whitespace" && value != "aggressive")
        throw UsageError("tokenize must be whitespace or aggressive");
      tokenize = v;
    } else if (key == "lowercase") {
      if (value == "true" || value == "1")
        lowercase = true;
      else if (value == "false" || value == "0")
        lowercase = false;
      else
        throw UsageError("lowercase must be true or false");
    } else if (key == "max_order") {
      max_order = parse_int(k, v, 1);
    } else {
      throw UsageError("unknown config key '" + k + "'");
    }
  }

  std::map<std::string, std::string> values() const
  {
    return {{"scheme", scheme},
            {"window", std::to_string(window)},
            {"max_copy", std::to_string(max_copy)},
            {"src_vocab_size", std::to_string(src_vocab_size)},
            {"tgt_vocab_size", std::to_string(tgt_vocab_size)},
            {"min_count", std::to_string(min_count)},
            {"max_len", std::to_string(max_len)},
            {"iterations", std::to_string(iterations)},
            {"symmetrize", symmetrize},
            {"metric", metric},
            {"fallback", fallback},
            {"group_size", std::to_string(group_size)},
            {"tokenize", tokenize},
            {"lowercase", lowercase ? "true" : "false"},
            {"max_order", std::to_string(max_order)}};
  }

  // Blank lines and lines starting with '#' are ignored.
  void load(std::istream& in)
  {
    std::string line;
    std::size_t lineno = 0;
    while (io::read_line(in, line)) {
      ++lineno;
      const std::string_view sv = trim(line);
      if (sv.empty() || sv.front() == '#') continue;
      const auto eq = sv.find('=');
      if (eq == std::string_view::npos)
        throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
      try {
        set(trim(sv.substr(0, eq)), trim(sv.substr(eq + 1)));
      } catch (const UsageError& e) {
        throw UsageError("config line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  }

  void write(std::ostream& out) const
  {
    for (const auto& [k, v] : values()) out << k << " = " << v << '\n';
  }

  Scheme scheme_params() const
  {
    return {parse_scheme(scheme == "noalign" ? "posunk" : scheme), window, max_copy};
  }

private:
  static std::string_view trim(std::string_view s)
  {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  }

  static int parse_int(const std::string& key, const std::string& v, int min)
  {
    int out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || end != v.data() + v.size())
      throw UsageError(key + ": '" + v + "' is not an integer");
    if (out < min)
      throw UsageError(key + " must be at least " + std::to_string(min));
    return out;
  }

  static std::uint64_t parse_u64(const std::string& key, const std::string& v, std::uint64_t min)
  {
    std::uint64_t out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || end != v.data() + v.size())
      throw UsageError(key + ": '" + v + "' is not a non-negative integer");
    if (out < min)
      throw UsageError(key + " must be at least " + std::to_string(min));
    return out;
  }
};

} // namespace rareword
