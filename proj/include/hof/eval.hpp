#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hof {

// counts[gold][predicted] over labels {0 = NOT, 1 = HOF}.
struct ConfusionMatrix {
  std::array<std::array<size_t, 2>, 2> counts{};

  size_t total() const;
  size_t at(int gold, int predicted) const { return counts[gold][predicted]; }
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t support = 0;
};

struct EvalReport {
  std::array<ClassScores, 2> per_class;  // indexed by label code
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  size_t n = 0;
};

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred);

// Undefined precision, recall or F1 (zero denominator) count as 0.
ClassScores class_scores(const ConfusionMatrix& matrix, int label);

// Mean of the two per-class F1 values. Throws EmptyInput on empty vectors.
double macro_f1(std::span<const int> gold, std::span<const int> pred);

EvalReport report(std::span<const int> gold, std::span<const int> pred);

// Flat key=value lines, also used for the run registry.
std::vector<std::pair<std::string, std::string>> to_key_values(
    const EvalReport& report);
std::string format_report(const EvalReport& report);

}  // namespace hof
