#include "hof/unicode.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "hof/error.hpp"

namespace hof::unicode {

std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  const auto* s = reinterpret_cast<const uint8_t*>(bytes.data());
  const auto length = static_cast<int32_t>(bytes.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t at = i;
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) {
      throw Error(ErrorCode::InvalidEncoding,
                  "malformed UTF-8 at byte offset " + std::to_string(at));
    }
    out.push_back(static_cast<char32_t>(c));
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size() * 2);
  for (char32_t c : text) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(c), error);
    if (error) throw Error(ErrorCode::InvalidEncoding, "code point not encodable");
    out.append(reinterpret_cast<const char*>(buf), static_cast<size_t>(n));
  }
  return out;
}

bool is_valid_utf8(std::string_view bytes) {
  const auto* s = reinterpret_cast<const uint8_t*>(bytes.data());
  const auto length = static_cast<int32_t>(bytes.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) return false;
  }
  return true;
}

bool is_emoji(char32_t c) {
  return c > 0x7F && u_hasBinaryProperty(static_cast<UChar32>(c), UCHAR_EMOJI);
}

bool is_emoji_component(char32_t c) {
  return c == 0xFE0F || c == 0x200D || c == 0x20E3 ||
         (c >= 0xE0020 && c <= 0xE007F);
}

bool is_keycap_base(char32_t c) {
  return (c >= U'0' && c <= U'9') || c == U'#' || c == U'*';
}

bool is_punctuation(char32_t c) {
  const auto mask = U_GET_GC_MASK(static_cast<UChar32>(c));
  return (mask & (U_GC_P_MASK | U_GC_SC_MASK | U_GC_SM_MASK)) != 0 &&
         !is_emoji(c);
}

bool is_white_space(char32_t c) {
  return u_isUWhiteSpace(static_cast<UChar32>(c));
}

bool is_latin_letter(char32_t c) {
  if ((c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z')) return true;
  if (c == 0xAA || c == 0xBA) return true;
  if (c >= 0xC0 && c <= 0xFF) return c != 0xD7 && c != 0xF7;
  return c >= 0x100 && c <= 0x24F;
}

bool is_combining_diacritic(char32_t c) { return c >= 0x300 && c <= 0x36F; }

bool is_target_digit(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= 0x9E6 && c <= 0x9EF) ||
         (c >= 0xAE6 && c <= 0xAEF);
}

bool is_letter_or_mark(char32_t c) {
  const auto mask = U_GET_GC_MASK(static_cast<UChar32>(c));
  return (mask & (U_GC_L_MASK | U_GC_M_MASK)) != 0;
}

std::vector<bool> emoji_protection_mask(std::u32string_view text) {
  const size_t n = text.size();
  std::vector<bool> mask(n, false);
  for (size_t i = 0; i < n; ++i) {
    if (is_emoji(text[i])) mask[i] = true;
  }
  // Keycaps: base, optional U+FE0F, then U+20E3.
  for (size_t i = 0; i < n; ++i) {
    if (!is_keycap_base(text[i])) continue;
    size_t j = i + 1;
    if (j < n && text[j] == 0xFE0F) ++j;
    if (j < n && text[j] == 0x20E3) {
      for (size_t k = i; k <= j; ++k) mask[k] = true;
      i = j;
    }
  }
  for (size_t i = 0; i < n; ++i) {
    if (mask[i] || !is_emoji_component(text[i])) continue;
    const bool after_protected = i > 0 && mask[i - 1];
    const bool before_emoji = i + 1 < n && is_emoji(text[i + 1]);
    if (after_protected || before_emoji) mask[i] = true;
  }
  return mask;
}

}  // namespace hof::unicode
