#pragma once

#include <array>
#include <string>

// Independent normalizer built from ICU regular expressions and Unicode
// property sets rather than the hand-written scanners in the library.
namespace oracle {

struct ReferenceResult {
  std::string text;
  std::array<bool, 7> changed{};  // indexed like hof::Rule
};

ReferenceResult reference_normalize(const std::string& utf8,
                                    bool hashtag_whole_token = true);

}  // namespace oracle
