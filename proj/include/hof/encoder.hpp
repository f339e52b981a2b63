#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hof/tokenizer.hpp"

namespace hof {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Pooling { cls_token, mean_pool };
enum class Family { bert, sbert };
enum class LanguageScope { mono, multi };

std::string_view pooling_name(Pooling pooling);
std::optional<Pooling> parse_pooling(std::string_view name);
std::string_view family_name(Family family);

struct BackboneEntry {
  std::string name;
  // Hub-style "org/model" resolved under the checkpoint root, or an
  // absolute directory.
  std::string locator;
  LanguageScope scope = LanguageScope::mono;
  Family family = Family::bert;
  size_t layers = 12;
  Pooling pooling = Pooling::cls_token;
  std::vector<std::string> aliases;
  // Deterministic randomly initialised backbone built in memory; never
  // touches the filesystem.
  bool toy = false;
};

class BackboneRegistry {
 public:
  // The checkpoints used for the Gujarati, Assamese and Bengali runs plus
  // the in-memory toy backbone.
  static BackboneRegistry builtin();

  const BackboneEntry& resolve(std::string_view name) const;
  bool contains(std::string_view name) const;
  void add(BackboneEntry entry);
  const std::vector<BackboneEntry>& entries() const { return entries_; }

  std::filesystem::path checkpoint_dir(const BackboneEntry& entry) const;

  // Defaults to $HOF_MODEL_CACHE, else ~/.cache/hof/models.
  std::filesystem::path checkpoint_root;

 private:
  std::vector<BackboneEntry> entries_;
};

inline constexpr std::string_view kToyBackbone = "tiny-random-2layer";

struct ModelSpec {
  std::string backbone;
  Pooling pooling = Pooling::cls_token;
  // Encoder layers frozen from the bottom.
  size_t freeze_layers = 6;
  // Whether the embedding block freezes together with the bottom layers.
  bool freeze_embeddings = true;
  size_t num_classes = 2;
  size_t max_sequence_length = 128;
  bool truncate = true;

  bool operator==(const ModelSpec&) const = default;
};

// Defaults for a backbone: its pooling, six frozen layers (clamped to the
// layer count), 128 tokens.
ModelSpec default_spec(const BackboneEntry& entry);

struct EncoderConfig {
  size_t vocab_size = 0;
  size_t hidden = 0;
  size_t layers = 0;
  size_t heads = 0;
  size_t intermediate = 0;
  size_t max_positions = 0;
  size_t type_vocab = 2;
  double layer_norm_eps = 1e-12;

  bool operator==(const EncoderConfig&) const = default;
};

EncoderConfig toy_encoder_config();

// Parameter blocks: 0 = embeddings, 1..L = encoder layers, L+1 = head.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;  // allocated only while trainable
  size_t block = 0;
  bool trainable = true;
  bool decay = true;  // weight decay applies (matrices, not biases/norms)
};

struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<uint8_t> attention_mask;  // 1 = real token, 0 = padding
};

struct FreezeReport {
  size_t frozen = 0;     // scalar parameter counts
  size_t trainable = 0;
  size_t total = 0;
};

class ClassifierModel {
 public:
  ClassifierModel(ModelSpec spec, BackboneEntry backbone, EncoderConfig config,
                  std::shared_ptr<const Tokenizer> tokenizer);

  const ModelSpec& spec() const { return spec_; }
  const BackboneEntry& backbone() const { return backbone_; }
  const EncoderConfig& config() const { return config_; }
  const Tokenizer& tokenizer() const { return *tokenizer_; }

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  Parameter& parameter(std::string_view name);
  const Parameter& parameter(std::string_view name) const;

  size_t head_block() const { return config_.layers + 1; }

  // Embeddings plus encoder layers [0, freeze_layers) become non-trainable;
  // everything above and the head stay trainable.
  FreezeReport apply_freeze(size_t freeze_layers);
  FreezeReport freeze_report() const;

  TokenSequence encode(std::string_view text) const;
  std::vector<TokenSequence> encode_batch(std::span<const std::string> texts) const;

  // batch x hidden pooled sentence vectors.
  Matrix pooled(std::span<const TokenSequence> batch) const;
  // batch x num_classes.
  Matrix forward(std::span<const TokenSequence> batch) const;

  // Weighted mean cross-entropy of the batch. Gradients of trainable
  // parameters are overwritten with d(loss)/d(param).
  double loss_and_gradients(std::span<const TokenSequence> batch,
                            std::span<const int> labels,
                            std::span<const double> class_weights = {});

  void zero_grad();

 private:
  struct LayerIndex {
    size_t q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b, ln1_g, ln1_b;
    size_t ff1_w, ff1_b, ff2_w, ff2_b, ln2_g, ln2_b;
  };
  struct NormCache {
    Matrix normalized;
    Eigen::VectorXd inv_std;
  };
  struct LayerCache {
    Matrix input, q, k, v, context;
    std::vector<Matrix> probs;
    NormCache ln1;
    Matrix attended;  // output of the attention sub-block
    Matrix ff_pre, ff_act;
    NormCache ln2;
  };
  struct SequenceCache {
    std::vector<TokenId> ids;
    std::vector<size_t> positions;
    NormCache embed_ln;
    std::vector<LayerCache> layers;
    Matrix output;
  };

  void build_parameters();
  size_t add_parameter(std::string name, size_t rows, size_t cols,
                       size_t block, bool decay);
  const Matrix& value(size_t index) const { return params_[index].value; }

  Eigen::RowVectorXd encode_sequence(const TokenSequence& sequence,
                                     SequenceCache* cache) const;
  Matrix layer_norm(const Matrix& x, size_t gamma, size_t beta,
                    NormCache* cache) const;
  Matrix layer_norm_backward(const Matrix& grad_out, const NormCache& cache,
                             size_t gamma, size_t beta);
  Matrix layer_forward(size_t layer, const Matrix& input,
                       LayerCache* cache) const;
  Matrix layer_backward(size_t layer, const Matrix& grad_out,
                        const LayerCache& cache);
  void accumulate(size_t index, const Matrix& grad);
  bool block_trainable(size_t block) const;

  ModelSpec spec_;
  BackboneEntry backbone_;
  EncoderConfig config_;
  std::shared_ptr<const Tokenizer> tokenizer_;
  std::vector<Parameter> params_;
  size_t word_emb_ = 0, pos_emb_ = 0, type_emb_ = 0, emb_ln_g_ = 0,
         emb_ln_b_ = 0, head_w_ = 0, head_b_ = 0;
  std::vector<LayerIndex> layers_;
};

// Builds the classifier for a registry backbone with a freshly initialised
// head drawn from head_seed. Real backbones read config.json,
// model.safetensors and vocab.txt from the entry's checkpoint directory.
ClassifierModel load_backbone(std::string_view name,
                              const BackboneRegistry& registry,
                              uint64_t head_seed,
                              std::optional<ModelSpec> spec = std::nullopt);

FreezeReport apply_freeze(ClassifierModel& model, size_t freeze_layers);

// Numerically stable softmax over each row.
Matrix softmax_rows(const Matrix& logits);

}  // namespace hof
