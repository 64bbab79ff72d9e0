#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "error.hpp"

namespace rareword::utf8 {

// Offset of the first byte that breaks well-formed UTF-8, or npos.
// Rejects overlong forms, surrogates and code points above U+10FFFF.
inline std::size_t find_invalid(std::string_view text) noexcept
{
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = s[i];
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len = 0;
    unsigned char lo = 0x80, hi = 0xBF;
    if (c >= 0xC2 && c <= 0xDF) {
      len = 2;
    } else if (c >= 0xE0 && c <= 0xEF) {
      len = 3;
      if (c == 0xE0) lo = 0xA0;
      if (c == 0xED) hi = 0x9F;
    } else if (c >= 0xF0 && c <= 0xF4) {
      len = 4;
      if (c == 0xF0) lo = 0x90;
      if (c == 0xF4) hi = 0x8F;
    } else {
      return i;
    }
    if (i + len > n) return i;
    if (s[i + 1] < lo || s[i + 1] > hi) return i;
    for (std::size_t k = 2; k < len; ++k)
      if ((s[i + k] & 0xC0) != 0x80) return i;
    i += len;
  }
  return std::string_view::npos;
}

inline bool is_valid(std::string_view text) noexcept
{
  return find_invalid(text) == std::string_view::npos;
}

inline void validate(std::string_view text)
{
  if (const auto at = find_invalid(text); at != std::string_view::npos)
    throw DecodeError("invalid UTF-8", at);
}

} // namespace rareword::utf8
