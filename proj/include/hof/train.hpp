#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hof/encoder.hpp"
#include "hof/normalize.hpp"

namespace hof {

struct TrainConfig {
  size_t epochs = 4;
  // Conventional transformer fine-tuning default.
  double learning_rate = 5e-5;
  size_t batch_size = 16;
  uint64_t seed = 42;
  // AdamW, no schedule.
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Inverse-frequency class weights in the loss; off reproduces plain
  // cross-entropy.
  bool class_weighting = false;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct TrainingSet {
  std::vector<std::string> texts;
  std::vector<int> labels;

  size_t size() const { return texts.size(); }
};

// Throws UnlabeledPost when any post lacks a label.
TrainingSet make_training_set(const NormalizedCorpus& corpus);

class AdamW {
 public:
  explicit AdamW(const TrainConfig& config);

  // Decoupled weight decay then the Adam update, for trainable parameters.
  void step(ClassifierModel& model);
  size_t steps_taken() const { return step_; }

 private:
  TrainConfig config_;
  size_t step_ = 0;
  std::vector<Matrix> first_moment_;
  std::vector<Matrix> second_moment_;
};

// Loss before the update. Throws NonFiniteLoss without touching weights.
double training_step(ClassifierModel& model,
                     std::span<const TokenSequence> batch,
                     std::span<const int> labels, AdamW& optimizer,
                     std::span<const double> class_weights = {});

struct RunRecord {
  std::string run_id;
  TrainConfig config;
  std::vector<double> epoch_losses;
  size_t optimizer_steps = 0;
  std::string checkpoint;
  double duration_seconds = 0.0;
  std::string started_at;  // ISO-8601 UTC
};

std::vector<double> balanced_class_weights(std::span<const int> labels);

// Fine-tunes in place: config.epochs passes over the data, each in a
// seed-determined shuffled order, ceil(N / batch_size) steps per epoch.
// When checkpoint_dir is given the final weights are saved there.
RunRecord train(ClassifierModel& model, const TrainingSet& data,
                const TrainConfig& config,
                const std::optional<std::filesystem::path>& checkpoint_dir =
                    std::nullopt);

std::vector<std::pair<std::string, std::string>> to_key_values(
    const TrainConfig& config);

}  // namespace hof
