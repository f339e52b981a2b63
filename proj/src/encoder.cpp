#include "hof/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "hof/error.hpp"
#include "hof/rng.hpp"
#include "hof/safetensors.hpp"

namespace hof {

std::string_view pooling_name(Pooling pooling) {
  return pooling == Pooling::cls_token ? "cls_token" : "mean_pool";
}

std::optional<Pooling> parse_pooling(std::string_view name) {
  if (name == "cls_token") return Pooling::cls_token;
  if (name == "mean_pool") return Pooling::mean_pool;
  return std::nullopt;
}

std::string_view family_name(Family family) {
  return family == Family::bert ? "bert" : "sbert";
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
    return std::tolower(static_cast<unsigned char>(x)) ==
           std::tolower(static_cast<unsigned char>(y));
  });
}

std::filesystem::path default_checkpoint_root() {
  if (const char* env = std::getenv("HOF_MODEL_CACHE"); env && *env) {
    return env;
  }
  if (const char* home = std::getenv("HOME"); home && *home) {
    return std::filesystem::path(home) / ".cache" / "hof" / "models";
  }
  return std::filesystem::path(".hof-models");
}

constexpr uint64_t kToyWeightsSeed = 0x70795eed;
constexpr double kToyInitStd = 0.1;
constexpr double kHeadInitStd = 0.02;

}  // namespace

BackboneRegistry BackboneRegistry::builtin() {
  BackboneRegistry r;
  r.checkpoint_root = default_checkpoint_root();
  const auto mono = LanguageScope::mono;
  const auto multi = LanguageScope::multi;
  r.add({"gujarati-sbert", "l3cube-pune/gujarati-sentence-bert-nli", mono,
         Family::sbert, 12, Pooling::mean_pool, {"GujaratiSBERT"}});
  r.add({"bengali-sbert", "l3cube-pune/bengali-sentence-bert-nli", mono,
         Family::sbert, 12, Pooling::mean_pool, {"BengaliSBERT"}});
  r.add({"indic-sbert", "l3cube-pune/indic-sentence-bert-nli", multi,
         Family::sbert, 12, Pooling::mean_pool, {"IndicSBERT"}});
  r.add({"bengali-bert", "l3cube-pune/bengali-bert", mono, Family::bert, 12,
         Pooling::cls_token, {}});
  r.add({"assamese-bert", "l3cube-pune/assamese-bert", mono, Family::bert, 12,
         Pooling::cls_token, {}});
  r.add({"indic-bert", "ai4bharat/indic-bert", multi, Family::bert, 12,
         Pooling::cls_token, {}});
  BackboneEntry toy{std::string(kToyBackbone), "builtin:tiny-random-2layer",
                    multi, Family::sbert, 2, Pooling::mean_pool, {}};
  toy.toy = true;
  r.add(std::move(toy));
  return r;
}

const BackboneEntry& BackboneRegistry::resolve(std::string_view name) const {
  for (const BackboneEntry& e : entries_) {
    if (iequals(e.name, name)) return e;
    for (const std::string& alias : e.aliases) {
      if (iequals(alias, name)) return e;
    }
  }
  throw Error(ErrorCode::UnknownBackbone,
              "'" + std::string(name) + "' is not in the backbone registry");
}

bool BackboneRegistry::contains(std::string_view name) const {
  try {
    resolve(name);
    return true;
  } catch (const Error&) {
    return false;
  }
}

void BackboneRegistry::add(BackboneEntry entry) {
  for (BackboneEntry& e : entries_) {
    if (iequals(e.name, entry.name)) {
      e = std::move(entry);
      return;
    }
  }
  entries_.push_back(std::move(entry));
}

std::filesystem::path BackboneRegistry::checkpoint_dir(
    const BackboneEntry& entry) const {
  std::filesystem::path locator(entry.locator);
  if (locator.is_absolute()) return locator;
  return checkpoint_root / locator;
}

ModelSpec default_spec(const BackboneEntry& entry) {
  ModelSpec spec;
  spec.backbone = entry.name;
  spec.pooling = entry.pooling;
  spec.freeze_layers = std::min<size_t>(6, entry.layers);
  return spec;
}

EncoderConfig toy_encoder_config() {
  EncoderConfig c;
  c.vocab_size = 1024;
  c.hidden = 32;
  c.layers = 2;
  c.heads = 4;
  c.intermediate = 64;
  c.max_positions = 128;
  c.type_vocab = 2;
  c.layer_norm_eps = 1e-12;
  return c;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

namespace {

double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
}

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf =
      std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

// x * W^T + b with W stored (out, in) and b as a 1 x out row.
Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix y = x * w.transpose();
  y.rowwise() += b.row(0);
  return y;
}

Matrix column_sums(const Matrix& m) { return m.colwise().sum(); }

}  // namespace

ClassifierModel::ClassifierModel(ModelSpec spec, BackboneEntry backbone,
                                 EncoderConfig config,
                                 std::shared_ptr<const Tokenizer> tokenizer)
    : spec_(std::move(spec)),
      backbone_(std::move(backbone)),
      config_(config),
      tokenizer_(std::move(tokenizer)) {
  if (spec_.num_classes != 2) {
    throw Error(ErrorCode::ConfigInvalid, "num_classes must be 2");
  }
  if (config_.heads == 0 || config_.hidden % config_.heads != 0) {
    throw Error(ErrorCode::ConfigInvalid,
                "hidden size must be divisible by the head count");
  }
  build_parameters();
  apply_freeze(spec_.freeze_layers);
}

size_t ClassifierModel::add_parameter(std::string name, size_t rows,
                                      size_t cols, size_t block, bool decay) {
  Parameter p;
  p.name = std::move(name);
  p.value = Matrix::Zero(static_cast<Eigen::Index>(rows),
                         static_cast<Eigen::Index>(cols));
  p.block = block;
  p.decay = decay;
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

void ClassifierModel::build_parameters() {
  const size_t h = config_.hidden;
  word_emb_ = add_parameter("embeddings.word_embeddings.weight",
                            config_.vocab_size, h, 0, true);
  pos_emb_ = add_parameter("embeddings.position_embeddings.weight",
                           config_.max_positions, h, 0, true);
  type_emb_ = add_parameter("embeddings.token_type_embeddings.weight",
                            config_.type_vocab, h, 0, true);
  emb_ln_g_ = add_parameter("embeddings.LayerNorm.weight", 1, h, 0, false);
  emb_ln_b_ = add_parameter("embeddings.LayerNorm.bias", 1, h, 0, false);
  params_[emb_ln_g_].value.setOnes();

  for (size_t l = 0; l < config_.layers; ++l) {
    const std::string p = "encoder.layer." + std::to_string(l) + ".";
    const size_t block = l + 1;
    LayerIndex li{};
    li.q_w = add_parameter(p + "attention.self.query.weight", h, h, block, true);
    li.q_b = add_parameter(p + "attention.self.query.bias", 1, h, block, false);
    li.k_w = add_parameter(p + "attention.self.key.weight", h, h, block, true);
    li.k_b = add_parameter(p + "attention.self.key.bias", 1, h, block, false);
    li.v_w = add_parameter(p + "attention.self.value.weight", h, h, block, true);
    li.v_b = add_parameter(p + "attention.self.value.bias", 1, h, block, false);
    li.o_w = add_parameter(p + "attention.output.dense.weight", h, h, block, true);
    li.o_b = add_parameter(p + "attention.output.dense.bias", 1, h, block, false);
    li.ln1_g = add_parameter(p + "attention.output.LayerNorm.weight", 1, h, block, false);
    li.ln1_b = add_parameter(p + "attention.output.LayerNorm.bias", 1, h, block, false);
    li.ff1_w = add_parameter(p + "intermediate.dense.weight",
                             config_.intermediate, h, block, true);
    li.ff1_b = add_parameter(p + "intermediate.dense.bias", 1,
                             config_.intermediate, block, false);
    li.ff2_w = add_parameter(p + "output.dense.weight", h, config_.intermediate,
                             block, true);
    li.ff2_b = add_parameter(p + "output.dense.bias", 1, h, block, false);
    li.ln2_g = add_parameter(p + "output.LayerNorm.weight", 1, h, block, false);
    li.ln2_b = add_parameter(p + "output.LayerNorm.bias", 1, h, block, false);
    params_[li.ln1_g].value.setOnes();
    params_[li.ln2_g].value.setOnes();
    layers_.push_back(li);
  }
  head_w_ = add_parameter("classifier.weight", spec_.num_classes, h,
                          head_block(), true);
  head_b_ = add_parameter("classifier.bias", 1, spec_.num_classes,
                          head_block(), false);
}

Parameter& ClassifierModel::parameter(std::string_view name) {
  for (Parameter& p : params_) {
    if (p.name == name) return p;
  }
  throw Error(ErrorCode::SpecMismatch, "no parameter named " + std::string(name));
}

const Parameter& ClassifierModel::parameter(std::string_view name) const {
  return const_cast<ClassifierModel*>(this)->parameter(name);
}

FreezeReport ClassifierModel::apply_freeze(size_t freeze_layers) {
  if (freeze_layers > config_.layers) {
    throw Error(ErrorCode::FreezeOutOfRange,
                "cannot freeze " + std::to_string(freeze_layers) +
                    " layers of a " + std::to_string(config_.layers) +
                    "-layer backbone");
  }
  spec_.freeze_layers = freeze_layers;
  for (Parameter& p : params_) {
    if (p.block == 0) {
      p.trainable = !(freeze_layers > 0 && spec_.freeze_embeddings);
    } else if (p.block <= config_.layers) {
      p.trainable = p.block - 1 >= freeze_layers;
    } else {
      p.trainable = true;
    }
    if (p.trainable) {
      p.grad = Matrix::Zero(p.value.rows(), p.value.cols());
    } else {
      p.grad.resize(0, 0);
    }
  }
  return freeze_report();
}

FreezeReport ClassifierModel::freeze_report() const {
  FreezeReport r;
  for (const Parameter& p : params_) {
    const auto n = static_cast<size_t>(p.value.size());
    (p.trainable ? r.trainable : r.frozen) += n;
    r.total += n;
  }
  return r;
}

bool ClassifierModel::block_trainable(size_t block) const {
  for (const Parameter& p : params_) {
    if (p.block == block) return p.trainable;
  }
  return false;
}

void ClassifierModel::zero_grad() {
  for (Parameter& p : params_) {
    if (p.trainable) p.grad.setZero();
  }
}

void ClassifierModel::accumulate(size_t index, const Matrix& grad) {
  Parameter& p = params_[index];
  if (p.trainable) p.grad += grad;
}

TokenSequence ClassifierModel::encode(std::string_view text) const {
  TokenSequence seq;
  seq.ids = tokenizer_->encode(text, spec_.max_sequence_length, spec_.truncate);
  seq.attention_mask.assign(seq.ids.size(), 1);
  return seq;
}

std::vector<TokenSequence> ClassifierModel::encode_batch(
    std::span<const std::string> texts) const {
  std::vector<TokenSequence> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(encode(t));
  return out;
}

Matrix ClassifierModel::layer_norm(const Matrix& x, size_t gamma, size_t beta,
                                   NormCache* cache) const {
  const Eigen::Index cols = x.cols();
  Matrix normalized(x.rows(), cols);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const auto centered = (x.row(r).array() - mean).eval();
    const double var = centered.square().sum() / static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + config_.layer_norm_eps);
    normalized.row(r) = (centered * inv_std[r]).matrix();
  }
  Matrix y = normalized.array().rowwise() * value(gamma).row(0).array();
  y.rowwise() += value(beta).row(0);
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix ClassifierModel::layer_norm_backward(const Matrix& grad_out,
                                            const NormCache& cache,
                                            size_t gamma, size_t beta) {
  if (params_[gamma].trainable) {
    accumulate(gamma,
               column_sums((grad_out.array() * cache.normalized.array()).matrix()));
    accumulate(beta, column_sums(grad_out));
  }
  const Matrix dnorm = grad_out.array().rowwise() * value(gamma).row(0).array();
  Matrix dx(grad_out.rows(), grad_out.cols());
  const double n = static_cast<double>(grad_out.cols());
  for (Eigen::Index r = 0; r < grad_out.rows(); ++r) {
    const double mean_d = dnorm.row(r).sum() / n;
    const double mean_dx =
        (dnorm.row(r).array() * cache.normalized.row(r).array()).sum() / n;
    dx.row(r) = ((dnorm.row(r).array() - mean_d -
                  cache.normalized.row(r).array() * mean_dx) *
                 cache.inv_std[r])
                    .matrix();
  }
  return dx;
}

Matrix ClassifierModel::layer_forward(size_t layer, const Matrix& input,
                                      LayerCache* cache) const {
  const LayerIndex& li = layers_[layer];
  const Eigen::Index heads = static_cast<Eigen::Index>(config_.heads);
  const Eigen::Index d = static_cast<Eigen::Index>(config_.hidden) / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  Matrix q = affine(input, value(li.q_w), value(li.q_b));
  Matrix k = affine(input, value(li.k_w), value(li.k_b));
  Matrix v = affine(input, value(li.v_w), value(li.v_b));
  Matrix context(input.rows(), input.cols());
  std::vector<Matrix> probs;
  for (Eigen::Index h = 0; h < heads; ++h) {
    Matrix scores = q.middleCols(h * d, d) * k.middleCols(h * d, d).transpose();
    scores *= scale;
    Matrix p = softmax_rows(scores);
    context.middleCols(h * d, d) = p * v.middleCols(h * d, d);
    if (cache) probs.push_back(std::move(p));
  }
  Matrix residual = affine(context, value(li.o_w), value(li.o_b)) + input;
  NormCache ln1;
  Matrix attended = layer_norm(residual, li.ln1_g, li.ln1_b, cache ? &ln1 : nullptr);

  Matrix ff_pre = affine(attended, value(li.ff1_w), value(li.ff1_b));
  Matrix ff_act = ff_pre.unaryExpr([](double x) { return gelu(x); });
  Matrix out_pre = affine(ff_act, value(li.ff2_w), value(li.ff2_b)) + attended;
  NormCache ln2;
  Matrix out = layer_norm(out_pre, li.ln2_g, li.ln2_b, cache ? &ln2 : nullptr);

  if (cache) {
    cache->input = input;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->context = std::move(context);
    cache->probs = std::move(probs);
    cache->ln1 = std::move(ln1);
    cache->attended = std::move(attended);
    cache->ff_pre = std::move(ff_pre);
    cache->ff_act = std::move(ff_act);
    cache->ln2 = std::move(ln2);
  }
  return out;
}

Matrix ClassifierModel::layer_backward(size_t layer, const Matrix& grad_out,
                                       const LayerCache& c) {
  const LayerIndex& li = layers_[layer];
  const bool train = params_[li.q_w].trainable;
  const Eigen::Index heads = static_cast<Eigen::Index>(config_.heads);
  const Eigen::Index d = static_cast<Eigen::Index>(config_.hidden) / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  // Feed-forward sub-block.
  const Matrix d_out_pre = layer_norm_backward(grad_out, c.ln2, li.ln2_g, li.ln2_b);
  if (train) {
    accumulate(li.ff2_w, d_out_pre.transpose() * c.ff_act);
    accumulate(li.ff2_b, column_sums(d_out_pre));
  }
  Matrix d_ff = d_out_pre * value(li.ff2_w);
  d_ff.array() *= c.ff_pre.unaryExpr([](double x) { return gelu_derivative(x); }).array();
  if (train) {
    accumulate(li.ff1_w, d_ff.transpose() * c.attended);
    accumulate(li.ff1_b, column_sums(d_ff));
  }
  const Matrix d_attended = d_ff * value(li.ff1_w) + d_out_pre;

  // Attention sub-block.
  const Matrix d_residual = layer_norm_backward(d_attended, c.ln1, li.ln1_g, li.ln1_b);
  if (train) {
    accumulate(li.o_w, d_residual.transpose() * c.context);
    accumulate(li.o_b, column_sums(d_residual));
  }
  const Matrix d_context = d_residual * value(li.o_w);
  Matrix dq(c.q.rows(), c.q.cols());
  Matrix dk(c.k.rows(), c.k.cols());
  Matrix dv(c.v.rows(), c.v.cols());
  for (Eigen::Index h = 0; h < heads; ++h) {
    const Matrix& p = c.probs[static_cast<size_t>(h)];
    const auto d_ctx_h = d_context.middleCols(h * d, d);
    const Matrix d_p = d_ctx_h * c.v.middleCols(h * d, d).transpose();
    dv.middleCols(h * d, d) = p.transpose() * d_ctx_h;
    const Eigen::VectorXd row_dot = (d_p.array() * p.array()).rowwise().sum();
    Matrix d_scores = p.array() * (d_p.colwise() - row_dot).array();
    d_scores *= scale;
    dq.middleCols(h * d, d) = d_scores * c.k.middleCols(h * d, d);
    dk.middleCols(h * d, d) = d_scores.transpose() * c.q.middleCols(h * d, d);
  }
  if (train) {
    accumulate(li.q_w, dq.transpose() * c.input);
    accumulate(li.q_b, column_sums(dq));
    accumulate(li.k_w, dk.transpose() * c.input);
    accumulate(li.k_b, column_sums(dk));
    accumulate(li.v_w, dv.transpose() * c.input);
    accumulate(li.v_b, column_sums(dv));
  }
  return dq * value(li.q_w) + dk * value(li.k_w) + dv * value(li.v_w) +
         d_residual;
}

Eigen::RowVectorXd ClassifierModel::encode_sequence(const TokenSequence& sequence,
                                                    SequenceCache* cache) const {
  std::vector<TokenId> ids;
  std::vector<size_t> positions;
  for (size_t i = 0; i < sequence.ids.size(); ++i) {
    if (sequence.attention_mask.empty() || sequence.attention_mask[i]) {
      ids.push_back(sequence.ids[i]);
      positions.push_back(i);
    }
  }
  if (ids.empty()) {
    throw Error(ErrorCode::EmptyInput, "sequence has no unmasked tokens");
  }
  if (positions.back() >= config_.max_positions ||
      positions.back() >= spec_.max_sequence_length) {
    throw Error(ErrorCode::SequenceTooLong,
                "token position " + std::to_string(positions.back()) +
                    " exceeds the model's sequence limit");
  }
  const Eigen::Index t = static_cast<Eigen::Index>(ids.size());
  Matrix x(t, static_cast<Eigen::Index>(config_.hidden));
  for (Eigen::Index r = 0; r < t; ++r) {
    const TokenId id = ids[static_cast<size_t>(r)];
    if (id < 0 || static_cast<size_t>(id) >= config_.vocab_size) {
      throw Error(ErrorCode::ConfigInvalid,
                  "token id " + std::to_string(id) + " outside vocabulary");
    }
    x.row(r) = value(word_emb_).row(id) +
               value(pos_emb_).row(static_cast<Eigen::Index>(positions[static_cast<size_t>(r)])) +
               value(type_emb_).row(0);
  }
  Matrix hidden = layer_norm(x, emb_ln_g_, emb_ln_b_, cache ? &cache->embed_ln : nullptr);
  if (cache) cache->layers.resize(config_.layers);
  for (size_t l = 0; l < config_.layers; ++l) {
    hidden = layer_forward(l, hidden, cache ? &cache->layers[l] : nullptr);
  }
  Eigen::RowVectorXd pooled = spec_.pooling == Pooling::cls_token
                                  ? Eigen::RowVectorXd(hidden.row(0))
                                  : Eigen::RowVectorXd(hidden.colwise().mean());
  if (cache) {
    cache->ids = std::move(ids);
    cache->positions = std::move(positions);
    cache->output = std::move(hidden);
  }
  return pooled;
}

Matrix ClassifierModel::pooled(std::span<const TokenSequence> batch) const {
  Matrix out(static_cast<Eigen::Index>(batch.size()),
             static_cast<Eigen::Index>(config_.hidden));
  for (size_t i = 0; i < batch.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = encode_sequence(batch[i], nullptr);
  }
  return out;
}

Matrix ClassifierModel::forward(std::span<const TokenSequence> batch) const {
  return affine(pooled(batch), value(head_w_), value(head_b_));
}

double ClassifierModel::loss_and_gradients(std::span<const TokenSequence> batch,
                                           std::span<const int> labels,
                                           std::span<const double> class_weights) {
  if (batch.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "batch and label counts differ");
  }
  if (batch.empty()) throw Error(ErrorCode::EmptyInput, "empty batch");
  zero_grad();

  auto weight_of = [&](int label) {
    return class_weights.empty() ? 1.0 : class_weights[static_cast<size_t>(label)];
  };
  double total_weight = 0.0;
  for (int y : labels) {
    if (y < 0 || static_cast<size_t>(y) >= spec_.num_classes) {
      throw Error(ErrorCode::InvalidLabelValue, "label " + std::to_string(y));
    }
    total_weight += weight_of(y);
  }

  bool backbone_trainable = false;
  size_t lowest_layer = config_.layers;
  const bool embeddings_trainable = block_trainable(0);
  for (size_t l = 0; l < config_.layers; ++l) {
    if (block_trainable(l + 1)) {
      lowest_layer = std::min(lowest_layer, l);
      backbone_trainable = true;
    }
  }
  if (embeddings_trainable) {
    lowest_layer = 0;
    backbone_trainable = true;
  }

  double loss = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    SequenceCache cache;
    const Eigen::RowVectorXd pooled =
        encode_sequence(batch[i], backbone_trainable ? &cache : nullptr);
    Eigen::RowVectorXd logits = pooled * value(head_w_).transpose();
    logits += value(head_b_).row(0);
    const double m = logits.maxCoeff();
    const double log_z = m + std::log((logits.array() - m).exp().sum());
    const int y = labels[i];
    const double w = weight_of(y) / total_weight;
    loss += w * (log_z - logits[y]);

    Eigen::RowVectorXd d_logits = (logits.array() - log_z).exp().matrix();
    d_logits[y] -= 1.0;
    d_logits *= w;
    accumulate(head_w_, d_logits.transpose() * pooled);
    accumulate(head_b_, d_logits);
    if (!backbone_trainable) continue;

    const Eigen::RowVectorXd d_pooled = d_logits * value(head_w_);
    Matrix d_hidden = Matrix::Zero(cache.output.rows(), cache.output.cols());
    if (spec_.pooling == Pooling::cls_token) {
      d_hidden.row(0) = d_pooled;
    } else {
      d_hidden.rowwise() = d_pooled / static_cast<double>(cache.output.rows());
    }
    for (size_t l = config_.layers; l-- > lowest_layer;) {
      d_hidden = layer_backward(l, d_hidden, cache.layers[l]);
    }
    if (embeddings_trainable) {
      const Matrix dx = layer_norm_backward(d_hidden, cache.embed_ln, emb_ln_g_, emb_ln_b_);
      for (Eigen::Index r = 0; r < dx.rows(); ++r) {
        params_[word_emb_].grad.row(cache.ids[static_cast<size_t>(r)]) += dx.row(r);
        params_[pos_emb_].grad.row(
            static_cast<Eigen::Index>(cache.positions[static_cast<size_t>(r)])) += dx.row(r);
      }
      params_[type_emb_].grad.row(0) += dx.colwise().sum();
    }
  }
  return loss;
}

FreezeReport apply_freeze(ClassifierModel& model, size_t freeze_layers) {
  return model.apply_freeze(freeze_layers);
}

namespace {

void init_normal(Matrix& m, Rng& rng, double stddev) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, stddev);
}

size_t json_size(const nlohmann::json& j, const char* key, size_t fallback) {
  return j.contains(key) ? j.at(key).get<size_t>() : fallback;
}

void load_checkpoint_weights(ClassifierModel& model,
                             const std::filesystem::path& weights) {
  const auto tensors = read_safetensors(weights);
  auto lookup = [&](const std::string& name) -> const TensorData* {
    std::vector<std::string> candidates{name, "bert." + name};
    if (name.ends_with("LayerNorm.weight")) {
      const std::string legacy = name.substr(0, name.size() - 6) + "gamma";
      candidates.push_back(legacy);
      candidates.push_back("bert." + legacy);
    }
    if (name.ends_with("LayerNorm.bias")) {
      const std::string legacy = name.substr(0, name.size() - 4) + "beta";
      candidates.push_back(legacy);
      candidates.push_back("bert." + legacy);
    }
    for (const auto& c : candidates) {
      if (auto it = tensors.find(c); it != tensors.end()) return &it->second;
    }
    return nullptr;
  };
  for (Parameter& p : model.parameters()) {
    if (p.block == model.head_block()) continue;
    const TensorData* t = lookup(p.name);
    if (!t) {
      throw Error(ErrorCode::CheckpointUnavailable,
                  weights.string() + " lacks tensor " + p.name);
    }
    if (t->element_count() != p.value.size()) {
      throw Error(ErrorCode::CheckpointUnavailable,
                  weights.string() + ": tensor " + p.name + " has wrong size");
    }
    std::copy(t->values.begin(), t->values.end(), p.value.data());
  }
}

}  // namespace

ClassifierModel load_backbone(std::string_view name,
                              const BackboneRegistry& registry,
                              uint64_t head_seed,
                              std::optional<ModelSpec> requested) {
  const BackboneEntry& entry = registry.resolve(name);
  ModelSpec spec = requested ? *requested : default_spec(entry);
  if (requested && !spec.backbone.empty() &&
      registry.resolve(spec.backbone).name != entry.name) {
    throw Error(ErrorCode::SpecMismatch,
                "spec names backbone " + spec.backbone + ", asked for " +
                    std::string(name));
  }
  spec.backbone = entry.name;

  std::optional<ClassifierModel> model;
  if (entry.toy) {
    const EncoderConfig config = toy_encoder_config();
    model.emplace(spec, entry, config,
                  std::make_shared<HashingTokenizer>(config.vocab_size));
    Rng rng(kToyWeightsSeed);
    for (Parameter& p : model->parameters()) {
      if (p.block == model->head_block()) continue;
      if (p.name.find("LayerNorm") != std::string::npos) continue;
      if (p.name.ends_with(".bias")) continue;
      init_normal(p.value, rng, kToyInitStd);
    }
  } else {
    const std::filesystem::path dir = registry.checkpoint_dir(entry);
    const auto config_file = dir / "config.json";
    const auto weights_file = dir / "model.safetensors";
    const auto vocab_file = dir / "vocab.txt";
    for (const auto& f : {config_file, weights_file, vocab_file}) {
      if (!std::filesystem::exists(f)) {
        throw Error(ErrorCode::CheckpointUnavailable,
                    "backbone '" + entry.name + "' needs " + f.string() +
                        " (download " + entry.locator +
                        " and convert weights to safetensors under the "
                        "checkpoint root, HOF_MODEL_CACHE)");
      }
    }
    nlohmann::json cfg;
    try {
      std::ifstream in(config_file);
      cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::CheckpointUnavailable,
                  config_file.string() + ": " + e.what());
    }
    const std::string model_type = cfg.value("model_type", "bert");
    if (model_type != "bert") {
      throw Error(ErrorCode::CheckpointUnavailable,
                  entry.name + " has architecture '" + model_type +
                      "'; only BERT-architecture checkpoints load");
    }
    if (cfg.value("hidden_act", "gelu") != "gelu") {
      throw Error(ErrorCode::CheckpointUnavailable,
                  entry.name + " uses an unsupported activation");
    }
    EncoderConfig config;
    config.vocab_size = json_size(cfg, "vocab_size", 0);
    config.hidden = json_size(cfg, "hidden_size", 768);
    config.layers = json_size(cfg, "num_hidden_layers", 12);
    config.heads = json_size(cfg, "num_attention_heads", 12);
    config.intermediate = json_size(cfg, "intermediate_size", 3072);
    config.max_positions = json_size(cfg, "max_position_embeddings", 512);
    config.type_vocab = json_size(cfg, "type_vocab_size", 2);
    config.layer_norm_eps = cfg.value("layer_norm_eps", 1e-12);
    if (config.layers != entry.layers) {
      throw Error(ErrorCode::CheckpointUnavailable,
                  entry.name + ": checkpoint has " +
                      std::to_string(config.layers) + " layers, registry says " +
                      std::to_string(entry.layers));
    }
    bool lower = true;
    if (std::filesystem::exists(dir / "tokenizer_config.json")) {
      std::ifstream in(dir / "tokenizer_config.json");
      const auto tcfg = nlohmann::json::parse(in, nullptr, false);
      if (!tcfg.is_discarded()) lower = tcfg.value("do_lower_case", true);
    }
    auto tokenizer = std::make_shared<WordPieceTokenizer>(
        WordPieceTokenizer::from_file(vocab_file, lower));
    if (config.vocab_size == 0) config.vocab_size = tokenizer->vocab_size();
    model.emplace(spec, entry, config, std::move(tokenizer));
    load_checkpoint_weights(*model, weights_file);
  }

  Rng head_rng(head_seed);
  init_normal(model->parameter("classifier.weight").value, head_rng, kHeadInitStd);
  model->parameter("classifier.bias").value.setZero();
  model->apply_freeze(spec.freeze_layers);
  return std::move(*model);
}

}  // namespace hof
