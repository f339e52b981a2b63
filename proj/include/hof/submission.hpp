#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hof/corpus.hpp"
#include "hof/encoder.hpp"
#include "hof/normalize.hpp"

namespace hof {

struct PredictionRecord {
  std::string id;
  Label label = Label::NOT;
  double score = 0.0;  // probability of HOF
};

// HOF when P(HOF) >= 0.5, i.e. the argmax of the two logits.
std::vector<PredictionRecord> predict(const ClassifierModel& model,
                                      const NormalizedCorpus& corpus,
                                      size_t batch_size = 32);

// "id<TAB>label<TAB>score" with a header row; score printed to 6 places.
void write_predictions(std::span<const PredictionRecord> records,
                       const std::filesystem::path& path);

// Accepts either a predictions file (with header) or a submission file.
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);

// One "id<TAB>HOF|NOT" line per post, no header. With expected_ids the
// output follows that order and must cover it exactly, otherwise
// IncompletePredictions.
void export_submission(std::span<const PredictionRecord> records,
                       const std::filesystem::path& path,
                       std::optional<std::span<const std::string>> expected_ids =
                           std::nullopt);

// Label codes aligned with `ids`; IncompletePredictions on any gap.
std::vector<int> labels_for(std::span<const PredictionRecord> records,
                            std::span<const std::string> ids);

}  // namespace hof
