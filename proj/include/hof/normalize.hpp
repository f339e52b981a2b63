#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hof/corpus.hpp"

namespace hof {

// Listed in application order.
enum class Rule {
  strip_urls,
  strip_mentions,
  strip_hashtags,
  strip_roman_letters,
  strip_numbers,
  strip_punctuation,
  normalize_whitespace,
};

inline constexpr size_t kRuleCount = 7;
inline constexpr std::array<Rule, kRuleCount> kRuleOrder = {
    Rule::strip_urls,          Rule::strip_mentions,
    Rule::strip_hashtags,      Rule::strip_roman_letters,
    Rule::strip_numbers,       Rule::strip_punctuation,
    Rule::normalize_whitespace};

std::string_view rule_name(Rule rule);
std::optional<Rule> parse_rule(std::string_view name);

enum class HashtagMode {
  whole_token,   // "#word" disappears entirely
  strip_marker,  // only the '#' goes, the word stays
};

struct Pipeline {
  std::array<bool, kRuleCount> enabled{true, true, true, true,
                                       true, true, true};
  HashtagMode hashtag_mode = HashtagMode::whole_token;

  bool is_enabled(Rule rule) const {
    return enabled[static_cast<size_t>(rule)];
  }
  Pipeline& set(Rule rule, bool on) {
    enabled[static_cast<size_t>(rule)] = on;
    return *this;
  }
};

// One application of a single rule. Emoji sequences are never touched.
std::u32string apply_rule(Rule rule, std::u32string_view text,
                          const Pipeline& pipeline = {});

struct Normalization {
  std::string text;
  std::vector<Rule> applied;  // rules that changed the text, in rule order
};

// Runs the enabled rules in order, repeating until nothing changes, so the
// result is a fixpoint of the pipeline.
Normalization normalize_detailed(std::string_view text,
                                 const Pipeline& pipeline = {});

std::string normalize_text(std::string_view text,
                           const Pipeline& pipeline = {});

struct NormalizedPost {
  std::string id;
  std::string text;
  std::vector<Rule> applied;
  bool became_empty = false;
  std::optional<Label> label;
};

struct NormalizedCorpus {
  std::vector<NormalizedPost> posts;
  bool labeled = false;
  // Number of posts each rule changed, indexed by Rule.
  std::array<size_t, kRuleCount> rule_changes{};
  size_t empty_posts = 0;

  size_t size() const { return posts.size(); }
};

NormalizedCorpus normalize_corpus(const Corpus& corpus,
                                  const Pipeline& pipeline = {});

}  // namespace hof
