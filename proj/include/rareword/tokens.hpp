#pragma once

// Reserved token spellings shared by annotation and post-processing.
//
//   <unk>                    universal unknown
//   <unk_1> ... <unk_K>      copy tokens
//   <unk_null>               null unknown
//   <p_-w> ... <p_w>         positional tag after a word
//   <p_null>                 positional tag of an unaligned word
//   <unkpos_-w> ... <unkpos_w>, <unkpos_null>

#include <charconv>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

#include "error.hpp"

namespace rareword {

inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kUnkNull = "<unk_null>";
inline constexpr std::string_view kPosNull = "<p_null>";
inline constexpr std::string_view kUnkPosNull = "<unkpos_null>";

inline constexpr int kDefaultWindow = 7;
inline constexpr int kDefaultMaxCopy = 10;

enum class TokenKind {
  Word,
  Unknown,         // <unk>
  Copy,            // <unk_n>
  NullUnknown,     // <unk_null>
  Positional,      // <p_d>
  PositionalNull,  // <p_null>
  PosUnknown,      // <unkpos_d>
  PosUnknownNull,  // <unkpos_null>
};

struct DecodedToken {
  TokenKind kind = TokenKind::Word;
  int value = 0;  // d for positional kinds, n for copy tokens

  friend bool operator==(const DecodedToken&, const DecodedToken&) = default;
};

// Tokens that stand for an unknown word in translator output.
constexpr bool is_unknown_class(TokenKind k) noexcept
{
  return k == TokenKind::Unknown || k == TokenKind::Copy || k == TokenKind::NullUnknown ||
         k == TokenKind::PosUnknown || k == TokenKind::PosUnknownNull;
}

constexpr bool is_positional_tag(TokenKind k) noexcept
{
  return k == TokenKind::Positional || k == TokenKind::PositionalNull;
}

// Numeric bounds used when decoding. Spellings outside them are malformed.
struct TokenGrammar {
  int window = kDefaultWindow;
  int max_copy = kDefaultMaxCopy;
};

inline std::string copy_token(int n) { return "<unk_" + std::to_string(n) + ">"; }
inline std::string positional_token(int d) { return "<p_" + std::to_string(d) + ">"; }
inline std::string unkpos_token(int d) { return "<unkpos_" + std::to_string(d) + ">"; }

namespace detail {

// Body of "<prefix" INT ">" in canonical decimal form (no '+', no leading
// zeros, no "-0").
inline std::optional<int> parse_numbered(std::string_view tok, std::string_view prefix)
{
  if (tok.size() <= prefix.size() + 1 || !tok.starts_with(prefix) || tok.back() != '>')
    return std::nullopt;
  const std::string_view body = tok.substr(prefix.size(), tok.size() - prefix.size() - 1);
  int v = 0;
  const auto [end, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
  if (ec != std::errc{} || end != body.data() + body.size())
    return std::nullopt;
  if (std::to_string(v) != body)
    return std::nullopt;
  return v;
}

inline std::optional<DecodedToken> match_reserved(std::string_view tok)
{
  if (tok.size() < 5 || tok.front() != '<')
    return std::nullopt;
  if (tok == kUnk) return DecodedToken{TokenKind::Unknown, 0};
  if (tok == kUnkNull) return DecodedToken{TokenKind::NullUnknown, 0};
  if (tok == kPosNull) return DecodedToken{TokenKind::PositionalNull, 0};
  if (tok == kUnkPosNull) return DecodedToken{TokenKind::PosUnknownNull, 0};
  if (auto n = parse_numbered(tok, "<unk_")) return DecodedToken{TokenKind::Copy, *n};
  if (auto d = parse_numbered(tok, "<p_")) return DecodedToken{TokenKind::Positional, *d};
  if (auto d = parse_numbered(tok, "<unkpos_")) return DecodedToken{TokenKind::PosUnknown, *d};
  return std::nullopt;
}

} // namespace detail

// True for any spelling of the reserved grammar regardless of numeric range.
// Corpus tokens must never be reserved.
inline bool is_reserved(std::string_view tok)
{
  return detail::match_reserved(tok).has_value();
}

// Throws DataError for reserved spellings whose number is out of range.
inline DecodedToken classify_token(std::string_view tok, const TokenGrammar& grammar = {})
{
  const auto m = detail::match_reserved(tok);
  if (!m) return {};
  switch (m->kind) {
  case TokenKind::Copy:
    if (m->value < 1 || m->value > grammar.max_copy)
      throw DataError("malformed token '" + std::string(tok) + "': copy index outside 1.." +
                      std::to_string(grammar.max_copy));
    break;
  case TokenKind::Positional:
  case TokenKind::PosUnknown:
    if (std::abs(m->value) > grammar.window)
      throw DataError("malformed token '" + std::string(tok) + "': offset outside window " +
                      std::to_string(grammar.window));
    break;
  default:
    break;
  }
  return *m;
}

} // namespace rareword
