#include "hof/normalize.hpp"

#include <spdlog/spdlog.h>

#include "hof/unicode.hpp"

namespace hof {

namespace uc = unicode;

std::string_view rule_name(Rule rule) {
  switch (rule) {
    case Rule::strip_urls: return "strip_urls";
    case Rule::strip_mentions: return "strip_mentions";
    case Rule::strip_hashtags: return "strip_hashtags";
    case Rule::strip_roman_letters: return "strip_roman_letters";
    case Rule::strip_numbers: return "strip_numbers";
    case Rule::strip_punctuation: return "strip_punctuation";
    case Rule::normalize_whitespace: return "normalize_whitespace";
  }
  return "";
}

std::optional<Rule> parse_rule(std::string_view name) {
  for (Rule r : kRuleOrder) {
    if (rule_name(r) == name) return r;
  }
  return std::nullopt;
}

namespace {

char32_t ascii_lower(char32_t c) {
  return (c >= U'A' && c <= U'Z') ? c + (U'a' - U'A') : c;
}

bool starts_with_ci(std::u32string_view text, size_t at, size_t end,
                    std::u32string_view prefix) {
  if (end - at < prefix.size()) return false;
  for (size_t k = 0; k < prefix.size(); ++k) {
    if (ascii_lower(text[at + k]) != prefix[k]) return false;
  }
  return true;
}

bool is_host_char(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') ||
         (c >= U'0' && c <= U'9') || c == U'-';
}

// Does [begin, end) start with "label(.label)+/"?
bool starts_with_bare_domain(std::u32string_view text, size_t begin,
                             size_t end) {
  size_t i = begin;
  size_t dots = 0;
  while (true) {
    const size_t label_start = i;
    while (i < end && is_host_char(text[i])) ++i;
    if (i == label_start) return false;
    if (i < end && text[i] == U'/') return dots > 0;
    if (i < end && text[i] == U'.') {
      ++dots;
      ++i;
      continue;
    }
    return false;
  }
}

std::u32string strip_urls(std::u32string_view text) {
  const auto guard = uc::emoji_protection_mask(text);
  const size_t n = text.size();
  std::u32string out;
  out.reserve(n);
  size_t i = 0;
  while (i < n) {
    if (guard[i] || uc::is_white_space(text[i])) {
      out.push_back(text[i++]);
      continue;
    }
    size_t end = i;
    while (end < n && !guard[end] && !uc::is_white_space(text[end])) ++end;
    size_t cut = end;
    if (starts_with_bare_domain(text, i, end)) {
      cut = i;
    } else {
      for (size_t p = i; p < end; ++p) {
        if (starts_with_ci(text, p, end, U"http://") ||
            starts_with_ci(text, p, end, U"https://") ||
            starts_with_ci(text, p, end, U"www.")) {
          cut = p;
          break;
        }
      }
    }
    out.append(text.substr(i, cut - i));
    if (cut < end) out.push_back(U' ');
    i = end;
  }
  return out;
}

std::u32string strip_marked_tokens(std::u32string_view text, char32_t marker,
                                   bool whole_token) {
  const auto guard = uc::emoji_protection_mask(text);
  const size_t n = text.size();
  std::u32string out;
  out.reserve(n);
  size_t i = 0;
  while (i < n) {
    if (text[i] != marker || guard[i]) {
      out.push_back(text[i++]);
      continue;
    }
    size_t j = i + 1;
    while (j < n && !guard[j] && !uc::is_white_space(text[j]) &&
           (text[j] == U'_' || !uc::is_punctuation(text[j]))) {
      ++j;
    }
    if (whole_token) {
      out.push_back(U' ');
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

std::u32string strip_roman_letters(std::u32string_view text) {
  const auto guard = uc::emoji_protection_mask(text);
  std::u32string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    if (!guard[i] && uc::is_latin_letter(text[i])) {
      ++i;
      while (i < text.size() && !guard[i] &&
             uc::is_combining_diacritic(text[i])) {
        ++i;
      }
      continue;
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::u32string strip_numbers(std::u32string_view text) {
  const auto guard = uc::emoji_protection_mask(text);
  std::u32string out;
  out.reserve(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    if (!guard[i] && uc::is_target_digit(text[i])) continue;
    out.push_back(text[i]);
  }
  return out;
}

std::u32string strip_punctuation(std::u32string_view text) {
  const auto guard = uc::emoji_protection_mask(text);
  std::u32string out;
  out.reserve(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    out.push_back(!guard[i] && uc::is_punctuation(text[i]) ? U' ' : text[i]);
  }
  return out;
}

std::u32string normalize_whitespace(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char32_t c : text) {
    if (uc::is_white_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::u32string apply_rule(Rule rule, std::u32string_view text,
                          const Pipeline& pipeline) {
  switch (rule) {
    case Rule::strip_urls: return strip_urls(text);
    case Rule::strip_mentions: return strip_marked_tokens(text, U'@', true);
    case Rule::strip_hashtags:
      return strip_marked_tokens(
          text, U'#', pipeline.hashtag_mode == HashtagMode::whole_token);
    case Rule::strip_roman_letters: return strip_roman_letters(text);
    case Rule::strip_numbers: return strip_numbers(text);
    case Rule::strip_punctuation: return strip_punctuation(text);
    case Rule::normalize_whitespace: return normalize_whitespace(text);
  }
  return std::u32string(text);
}

Normalization normalize_detailed(std::string_view text,
                                 const Pipeline& pipeline) {
  std::u32string current = uc::decode_utf8(text);
  std::array<bool, kRuleCount> changed{};
  // Every pass that changes anything strictly shrinks the text or turns
  // removed code points into spaces that the next pass collapses, so this
  // terminates after a handful of passes.
  while (true) {
    bool any = false;
    for (Rule rule : kRuleOrder) {
      if (!pipeline.is_enabled(rule)) continue;
      std::u32string next = apply_rule(rule, current, pipeline);
      if (next != current) {
        changed[static_cast<size_t>(rule)] = true;
        current = std::move(next);
        any = true;
      }
    }
    if (!any) break;
  }
  Normalization result;
  result.text = uc::encode_utf8(current);
  for (Rule rule : kRuleOrder) {
    if (changed[static_cast<size_t>(rule)]) result.applied.push_back(rule);
  }
  return result;
}

std::string normalize_text(std::string_view text, const Pipeline& pipeline) {
  return normalize_detailed(text, pipeline).text;
}

NormalizedCorpus normalize_corpus(const Corpus& corpus,
                                  const Pipeline& pipeline) {
  NormalizedCorpus out;
  out.labeled = corpus.labeled;
  out.posts.reserve(corpus.size());
  for (const RawPost& post : corpus.posts) {
    Normalization n = normalize_detailed(post.text, pipeline);
    NormalizedPost np;
    np.id = post.id;
    np.text = std::move(n.text);
    np.applied = std::move(n.applied);
    np.became_empty = np.text.empty();
    np.label = post.label;
    for (Rule r : np.applied) ++out.rule_changes[static_cast<size_t>(r)];
    if (np.became_empty) ++out.empty_posts;
    out.posts.push_back(std::move(np));
  }
  if (out.empty_posts > 0) {
    spdlog::info("{}: {} of {} posts are empty after normalization (kept)",
                 corpus.source, out.empty_posts, out.size());
  }
  return out;
}

}  // namespace hof
