#include "hof/eval.hpp"

#include <fmt/format.h>

#include "hof/error.hpp"

namespace hof {

size_t ConfusionMatrix::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred) {
  if (gold.size() != pred.size()) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} gold labels vs {} predictions", gold.size(),
                            pred.size()));
  }
  ConfusionMatrix m;
  for (size_t i = 0; i < gold.size(); ++i) {
    const int g = gold[i];
    const int p = pred[i];
    if ((g != 0 && g != 1) || (p != 0 && p != 1)) {
      throw Error(ErrorCode::InvalidLabelValue,
                  fmt::format("position {}: gold={} pred={}", i, g, p));
    }
    ++m.counts[g][p];
  }
  return m;
}

ClassScores class_scores(const ConfusionMatrix& m, int c) {
  const int other = 1 - c;
  const double tp = static_cast<double>(m.at(c, c));
  const double fp = static_cast<double>(m.at(other, c));
  const double fn = static_cast<double>(m.at(c, other));
  ClassScores s;
  s.support = m.at(c, c) + m.at(c, other);
  s.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

EvalReport report(std::span<const int> gold, std::span<const int> pred) {
  EvalReport r;
  r.confusion = confusion(gold, pred);
  if (gold.empty()) throw Error(ErrorCode::EmptyInput, "nothing to evaluate");
  r.n = gold.size();
  for (int c = 0; c < 2; ++c) r.per_class[c] = class_scores(r.confusion, c);
  r.macro_f1 = (r.per_class[0].f1 + r.per_class[1].f1) / 2.0;
  r.accuracy = static_cast<double>(r.confusion.at(0, 0) + r.confusion.at(1, 1)) /
               static_cast<double>(r.n);
  return r;
}

double macro_f1(std::span<const int> gold, std::span<const int> pred) {
  return report(gold, pred).macro_f1;
}

std::vector<std::pair<std::string, std::string>> to_key_values(
    const EvalReport& r) {
  const char* names[2] = {"NOT", "HOF"};
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("n", std::to_string(r.n));
  kv.emplace_back("macro_f1", fmt::format("{:.6f}", r.macro_f1));
  kv.emplace_back("accuracy", fmt::format("{:.6f}", r.accuracy));
  for (int c = 0; c < 2; ++c) {
    const std::string p = names[c];
    kv.emplace_back(p + ".precision", fmt::format("{:.6f}", r.per_class[c].precision));
    kv.emplace_back(p + ".recall", fmt::format("{:.6f}", r.per_class[c].recall));
    kv.emplace_back(p + ".f1", fmt::format("{:.6f}", r.per_class[c].f1));
    kv.emplace_back(p + ".support", std::to_string(r.per_class[c].support));
  }
  for (int g = 0; g < 2; ++g) {
    for (int p = 0; p < 2; ++p) {
      kv.emplace_back(fmt::format("confusion.{}.{}", names[g], names[p]),
                      std::to_string(r.confusion.at(g, p)));
    }
  }
  return kv;
}

std::string format_report(const EvalReport& r) {
  std::string out;
  for (const auto& [k, v] : to_key_values(r)) out += k + "=" + v + "\n";
  return out;
}

}  // namespace hof
