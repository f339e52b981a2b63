#include "hof/train.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hof/checkpoint.hpp"
#include "hof/checksum.hpp"
#include "hof/error.hpp"
#include "hof/rng.hpp"

namespace hof {

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::ConfigInvalid, "epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::ConfigInvalid, "learning_rate must be > 0");
  }
  if (batch_size < 1) {
    throw Error(ErrorCode::ConfigInvalid, "batch_size must be >= 1");
  }
  if (weight_decay < 0.0) {
    throw Error(ErrorCode::ConfigInvalid, "weight_decay must be >= 0");
  }
}

TrainingSet make_training_set(const NormalizedCorpus& corpus) {
  TrainingSet set;
  for (const NormalizedPost& post : corpus.posts) {
    if (!post.label) {
      throw Error(ErrorCode::UnlabeledPost,
                  "post '" + post.id + "' has no label");
    }
    set.texts.push_back(post.text);
    set.labels.push_back(LabelCodec::encode(*post.label));
  }
  return set;
}

AdamW::AdamW(const TrainConfig& config) : config_(config) {}

void AdamW::step(ClassifierModel& model) {
  auto& params = model.parameters();
  if (first_moment_.empty()) {
    first_moment_.resize(params.size());
    second_moment_.resize(params.size());
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double bias1 = 1.0 - std::pow(config_.beta1, t);
  const double bias2 = 1.0 - std::pow(config_.beta2, t);
  const double lr = config_.learning_rate;
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    if (!p.trainable) continue;
    Matrix& m = first_moment_[i];
    Matrix& v = second_moment_[i];
    if (m.size() == 0) {
      m = Matrix::Zero(p.value.rows(), p.value.cols());
      v = Matrix::Zero(p.value.rows(), p.value.cols());
    }
    if (p.decay && config_.weight_decay > 0.0) {
      p.value *= 1.0 - lr * config_.weight_decay;
    }
    m = config_.beta1 * m + (1.0 - config_.beta1) * p.grad;
    v = config_.beta2 * v + (1.0 - config_.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr * (m.array() / bias1) /
                       ((v.array() / bias2).sqrt() + config_.epsilon);
  }
}

double training_step(ClassifierModel& model,
                     std::span<const TokenSequence> batch,
                     std::span<const int> labels, AdamW& optimizer,
                     std::span<const double> class_weights) {
  const double loss = model.loss_and_gradients(batch, labels, class_weights);
  if (!std::isfinite(loss)) {
    throw Error(ErrorCode::NonFiniteLoss,
                fmt::format("loss {} at optimizer step {} (batch of {})", loss,
                            optimizer.steps_taken() + 1, batch.size()));
  }
  for (const Parameter& p : model.parameters()) {
    if (p.trainable && !p.grad.allFinite()) {
      throw Error(ErrorCode::NonFiniteLoss,
                  "non-finite gradient for " + p.name + " at step " +
                      std::to_string(optimizer.steps_taken() + 1));
    }
  }
  optimizer.step(model);
  return loss;
}

std::vector<double> balanced_class_weights(std::span<const int> labels) {
  double counts[2] = {0.0, 0.0};
  for (int y : labels) counts[y == 1 ? 1 : 0] += 1.0;
  const double n = static_cast<double>(labels.size());
  std::vector<double> w(2, 1.0);
  for (int c = 0; c < 2; ++c) {
    if (counts[c] > 0.0) w[static_cast<size_t>(c)] = n / (2.0 * counts[c]);
  }
  return w;
}

namespace {

std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> to_key_values(
    const TrainConfig& c) {
  return {
      {"epochs", std::to_string(c.epochs)},
      {"learning_rate", fmt::format("{}", c.learning_rate)},
      {"batch_size", std::to_string(c.batch_size)},
      {"seed", std::to_string(c.seed)},
      {"optimizer", "adamw"},
      {"weight_decay", fmt::format("{}", c.weight_decay)},
      {"beta1", fmt::format("{}", c.beta1)},
      {"beta2", fmt::format("{}", c.beta2)},
      {"epsilon", fmt::format("{}", c.epsilon)},
      {"class_weighting", c.class_weighting ? "true" : "false"},
  };
}

RunRecord train(ClassifierModel& model, const TrainingSet& data,
                const TrainConfig& config,
                const std::optional<std::filesystem::path>& checkpoint_dir) {
  config.validate();
  if (data.size() == 0) {
    throw Error(ErrorCode::EmptyCorpus, "no training examples");
  }
  if (data.labels.size() != data.texts.size()) {
    throw Error(ErrorCode::LengthMismatch, "texts and labels differ in length");
  }
  const auto started = std::chrono::system_clock::now();
  const auto clock_start = std::chrono::steady_clock::now();

  RunRecord record;
  record.config = config;
  record.started_at = utc_timestamp(started);
  std::ostringstream id_source;
  for (const auto& [k, v] : to_key_values(config)) id_source << k << '=' << v << ';';
  id_source << model.spec().backbone << ';' << record.started_at;
  record.run_id = "run-" + hex32(crc32(id_source.str()));

  const std::vector<TokenSequence> encoded = model.encode_batch(data.texts);
  const std::vector<double> class_weights =
      config.class_weighting ? balanced_class_weights(data.labels)
                             : std::vector<double>{};

  AdamW optimizer(config);
  Rng rng(config.seed);
  const size_t n = data.size();
  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<size_t> order = rng.permutation(n);
    double weighted = 0.0;
    for (size_t start = 0; start < n; start += config.batch_size) {
      const size_t end = std::min(n, start + config.batch_size);
      std::vector<TokenSequence> batch;
      std::vector<int> labels;
      for (size_t k = start; k < end; ++k) {
        batch.push_back(encoded[order[k]]);
        labels.push_back(data.labels[order[k]]);
      }
      const double loss =
          training_step(model, batch, labels, optimizer, class_weights);
      weighted += loss * static_cast<double>(end - start);
    }
    record.epoch_losses.push_back(weighted / static_cast<double>(n));
    spdlog::info("epoch {}/{}: loss {:.6f}", epoch + 1, config.epochs,
                 record.epoch_losses.back());
  }
  record.optimizer_steps = optimizer.steps_taken();
  if (checkpoint_dir) {
    save_checkpoint(model, *checkpoint_dir, &config);
    record.checkpoint = checkpoint_dir->string();
  }
  record.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start)
          .count();
  return record;
}

}  // namespace hof
