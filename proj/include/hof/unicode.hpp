#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hof::unicode {

// Throws Error(InvalidEncoding) on malformed input.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view text);
bool is_valid_utf8(std::string_view bytes);

// Code points with the Emoji property, excluding the ASCII keycap bases
// (0-9, '#', '*'), which behave as digits and punctuation in running text.
bool is_emoji(char32_t c);

// Joiners and modifiers that only count as emoji next to an emoji:
// U+FE0F, U+200D, U+20E3 and the tag characters U+E0020..U+E007F.
bool is_emoji_component(char32_t c);

bool is_keycap_base(char32_t c);

// General categories P*, Sc and Sm, minus anything that is_emoji().
bool is_punctuation(char32_t c);

bool is_white_space(char32_t c);

// Basic Latin letters, Latin-1 letters and Latin Extended-A/B.
bool is_latin_letter(char32_t c);

bool is_combining_diacritic(char32_t c);

// ASCII digits plus Bengali/Assamese and Gujarati native digits.
bool is_target_digit(char32_t c);

bool is_letter_or_mark(char32_t c);

// Marks every code point that belongs to an emoji sequence: emoji
// themselves, keycap sequences, and components chained onto them.
std::vector<bool> emoji_protection_mask(std::u32string_view text);

}  // namespace hof::unicode
