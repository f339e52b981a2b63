#include "hof/tokenizer.hpp"

#include <fstream>
#include <optional>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "hof/error.hpp"
#include "hof/unicode.hpp"

namespace hof {

std::vector<TokenId> Tokenizer::encode(std::string_view text,
                                       size_t max_length,
                                       bool truncate) const {
  std::vector<TokenId> pieces = tokenize(text);
  if (max_length < 2) {
    throw Error(ErrorCode::ConfigInvalid, "max_sequence_length must be >= 2");
  }
  if (pieces.size() + 2 > max_length) {
    if (!truncate) {
      throw Error(ErrorCode::SequenceTooLong,
                  std::to_string(pieces.size() + 2) + " tokens exceed limit " +
                      std::to_string(max_length));
    }
    pieces.resize(max_length - 2);
  }
  std::vector<TokenId> ids;
  ids.reserve(pieces.size() + 2);
  ids.push_back(cls_id_);
  ids.insert(ids.end(), pieces.begin(), pieces.end());
  ids.push_back(sep_id_);
  return ids;
}

HashingTokenizer::HashingTokenizer(size_t vocab_size)
    : vocab_size_(vocab_size) {
  if (vocab_size < 8) {
    throw Error(ErrorCode::ConfigInvalid, "hashing vocabulary too small");
  }
}

std::vector<TokenId> HashingTokenizer::tokenize(std::string_view text) const {
  std::vector<TokenId> ids;
  const std::u32string cps = unicode::decode_utf8(text);
  const size_t reserved = 4;
  size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && unicode::is_white_space(cps[i])) ++i;
    if (i == cps.size()) break;
    // FNV-1a over the word's code points.
    uint64_t h = 14695981039346656037ull;
    while (i < cps.size() && !unicode::is_white_space(cps[i])) {
      h ^= static_cast<uint64_t>(cps[i]);
      h *= 1099511628211ull;
      ++i;
    }
    ids.push_back(static_cast<TokenId>(reserved + h % (vocab_size_ - reserved)));
  }
  return ids;
}

namespace {

bool is_bert_whitespace(char32_t c) {
  if (c == U' ' || c == U'\t' || c == U'\n' || c == U'\r') return true;
  return u_charType(static_cast<UChar32>(c)) == U_SPACE_SEPARATOR;
}

bool is_bert_control(char32_t c) {
  if (c == U'\t' || c == U'\n' || c == U'\r') return false;
  const auto mask = U_GET_GC_MASK(static_cast<UChar32>(c));
  return (mask & U_GC_C_MASK) != 0;
}

bool is_bert_punctuation(char32_t c) {
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
      (c >= 123 && c <= 126)) {
    return true;
  }
  return (U_GET_GC_MASK(static_cast<UChar32>(c)) & U_GC_P_MASK) != 0;
}

bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0x20000 && c <= 0x2A6DF) || (c >= 0x2A700 && c <= 0x2B73F) ||
         (c >= 0x2B740 && c <= 0x2B81F) || (c >= 0x2B820 && c <= 0x2CEAF) ||
         (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x2F800 && c <= 0x2FA1F);
}

icu::UnicodeString to_icu(std::u32string_view s) {
  return icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(s.data()),
                                       static_cast<int32_t>(s.size()));
}

std::u32string from_icu(const icu::UnicodeString& s) {
  std::u32string out(static_cast<size_t>(s.countChar32()), U'\0');
  UErrorCode status = U_ZERO_ERROR;
  s.toUTF32(reinterpret_cast<UChar32*>(out.data()),
            static_cast<int32_t>(out.size()), status);
  return out;
}

std::u32string normalize_form(std::u32string_view s, bool decompose) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = decompose
                                     ? icu::Normalizer2::getNFDInstance(status)
                                     : icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::IoFailure, "ICU normalizer unavailable");
  }
  icu::UnicodeString out = norm->normalize(to_icu(s), status);
  return from_icu(out);
}

}  // namespace

WordPieceTokenizer::WordPieceTokenizer(std::vector<std::string> vocab,
                                       bool do_lower_case)
    : vocab_(std::move(vocab)), do_lower_case_(do_lower_case) {
  for (size_t i = 0; i < vocab_.size(); ++i) {
    index_.emplace(vocab_[i], static_cast<TokenId>(i));
  }
  auto require = [&](const char* token) {
    auto it = index_.find(token);
    if (it == index_.end()) {
      throw Error(ErrorCode::CheckpointUnavailable,
                  std::string("vocabulary lacks ") + token);
    }
    return it->second;
  };
  pad_id_ = require("[PAD]");
  unk_id_ = require("[UNK]");
  cls_id_ = require("[CLS]");
  sep_id_ = require("[SEP]");
}

WordPieceTokenizer WordPieceTokenizer::from_file(
    const std::filesystem::path& vocab_file, bool do_lower_case) {
  std::ifstream in(vocab_file);
  if (!in) {
    throw Error(ErrorCode::CheckpointUnavailable,
                "cannot open vocabulary " + vocab_file.string());
  }
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    vocab.push_back(line);
  }
  return WordPieceTokenizer(std::move(vocab), do_lower_case);
}

std::vector<std::string> WordPieceTokenizer::basic_tokenize(
    std::string_view text) const {
  std::u32string cleaned;
  for (char32_t c : unicode::decode_utf8(text)) {
    if (c == 0 || c == 0xFFFD || is_bert_control(c)) continue;
    if (is_bert_whitespace(c)) {
      cleaned.push_back(U' ');
    } else if (is_cjk(c)) {
      cleaned += U' ';
      cleaned.push_back(c);
      cleaned += U' ';
    } else {
      cleaned.push_back(c);
    }
  }
  cleaned = normalize_form(cleaned, false);

  std::vector<std::string> out;
  size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && is_bert_whitespace(cleaned[i])) ++i;
    if (i == cleaned.size()) break;
    const size_t start = i;
    while (i < cleaned.size() && !is_bert_whitespace(cleaned[i])) ++i;
    std::u32string word = cleaned.substr(start, i - start);
    if (do_lower_case_) {
      icu::UnicodeString lowered = to_icu(word);
      lowered.toLower(icu::Locale::getRoot());
      std::u32string stripped;
      for (char32_t c : normalize_form(from_icu(lowered), true)) {
        if (u_charType(static_cast<UChar32>(c)) != U_NON_SPACING_MARK) {
          stripped.push_back(c);
        }
      }
      word = std::move(stripped);
    }
    std::u32string piece;
    for (char32_t c : word) {
      if (is_bert_punctuation(c)) {
        if (!piece.empty()) out.push_back(unicode::encode_utf8(piece));
        piece.clear();
        out.push_back(unicode::encode_utf8(std::u32string(1, c)));
      } else {
        piece.push_back(c);
      }
    }
    if (!piece.empty()) out.push_back(unicode::encode_utf8(piece));
  }
  return out;
}

std::vector<TokenId> WordPieceTokenizer::tokenize(std::string_view text) const {
  constexpr size_t kMaxCharsPerWord = 100;
  std::vector<TokenId> ids;
  for (const std::string& word : basic_tokenize(text)) {
    const std::u32string chars = unicode::decode_utf8(word);
    if (chars.size() > kMaxCharsPerWord) {
      ids.push_back(unk_id_);
      continue;
    }
    std::vector<TokenId> pieces;
    size_t start = 0;
    bool bad = false;
    while (start < chars.size()) {
      size_t end = chars.size();
      std::optional<TokenId> found;
      while (start < end) {
        std::string candidate =
            unicode::encode_utf8(std::u32string_view(chars).substr(start, end - start));
        if (start > 0) candidate = "##" + candidate;
        auto it = index_.find(candidate);
        if (it != index_.end()) {
          found = it->second;
          break;
        }
        --end;
      }
      if (!found) {
        bad = true;
        break;
      }
      pieces.push_back(*found);
      start = end;
    }
    if (bad) {
      ids.push_back(unk_id_);
    } else {
      ids.insert(ids.end(), pieces.begin(), pieces.end());
    }
  }
  return ids;
}

}  // namespace hof
