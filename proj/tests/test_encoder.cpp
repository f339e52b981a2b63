#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "hof/encoder.hpp"
#include "hof/error.hpp"
#include "hof/tokenizer.hpp"
#include "support.hpp"

using namespace hof;
using testing_support::TempDir;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected hof::Error");
  return ErrorCode::ConfigInvalid;
}

ClassifierModel toy(size_t freeze = 2, uint64_t head_seed = 1) {
  const auto registry = BackboneRegistry::builtin();
  ModelSpec spec = default_spec(registry.resolve(kToyBackbone));
  spec.freeze_layers = freeze;
  return load_backbone(kToyBackbone, registry, head_seed, spec);
}

// A deep, narrow model to exercise freezing on a 12-layer layout.
ClassifierModel twelve_layer(size_t freeze, bool freeze_embeddings = true) {
  EncoderConfig c;
  c.vocab_size = 16;
  c.hidden = 4;
  c.layers = 12;
  c.heads = 2;
  c.intermediate = 8;
  c.max_positions = 16;
  BackboneEntry e;
  e.name = "deep";
  e.layers = 12;
  e.toy = true;
  ModelSpec s;
  s.backbone = "deep";
  s.freeze_layers = freeze;
  s.freeze_embeddings = freeze_embeddings;
  s.max_sequence_length = 16;
  return ClassifierModel(s, e, c, std::make_shared<HashingTokenizer>(16));
}

std::vector<bool> trainable_blocks(const ClassifierModel& m) {
  std::vector<bool> blocks(m.head_block() + 1, false);
  for (const Parameter& p : m.parameters()) {
    if (p.trainable) blocks[p.block] = true;
  }
  return blocks;
}

Eigen::RowVectorXd layer_norm(const Eigen::RowVectorXd& x, const Matrix& g,
                              const Matrix& b, double eps) {
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  Eigen::RowVectorXd y = (x.array() - mean) / std::sqrt(var + eps);
  return y.cwiseProduct(g.row(0)) + b.row(0);
}

double gelu(double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); }

BackboneRegistry with_fixture_bert(Pooling pooling) {
  auto registry = BackboneRegistry::builtin();
  BackboneEntry e;
  e.name = "hf-tiny";
  e.locator = testing_support::fixture("tiny_bert").string();
  e.family = pooling == Pooling::mean_pool ? Family::sbert : Family::bert;
  e.pooling = pooling;
  e.layers = 2;
  registry.add(e);
  return registry;
}

std::vector<double> as_vector(const nlohmann::json& j) { return j.get<std::vector<double>>(); }

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("registry resolves every published model name") {
  const auto r = BackboneRegistry::builtin();
  for (const char* name : {"GujaratiSBERT", "IndicSBERT", "assamese-bert", "indic-bert",
                           "BengaliSBERT", "bengali-bert", "gujarati-sbert", "bengali-sbert",
                           "indic-sbert"}) {
    CAPTURE(name);
    CHECK(r.contains(name));
  }
  const BackboneEntry& b = r.resolve("bengali-sbert");
  CHECK(b.family == Family::sbert);
  CHECK(b.pooling == Pooling::mean_pool);
  CHECK(b.layers == 12);
  CHECK(r.resolve("BengaliSBERT").name == "bengali-sbert");
  CHECK(r.resolve("assamese-bert").pooling == Pooling::cls_token);
  CHECK(r.resolve("indic-sbert").scope == LanguageScope::multi);
  CHECK(code_of([&] { r.resolve("not-a-model"); }) == ErrorCode::UnknownBackbone);
  CHECK(code_of([&] { load_backbone("not-a-model", r, 1); }) == ErrorCode::UnknownBackbone);
}

TEST_CASE("default spec follows the recipe") {
  const auto r = BackboneRegistry::builtin();
  const ModelSpec s = default_spec(r.resolve("bengali-sbert"));
  CHECK(s.freeze_layers == 6);
  CHECK(s.freeze_embeddings);
  CHECK(s.num_classes == 2);
  CHECK(s.max_sequence_length == 128);
  CHECK(s.pooling == Pooling::mean_pool);
  CHECK(default_spec(r.resolve(kToyBackbone)).freeze_layers == 2);
}

TEST_CASE("real backbones need their checkpoint files") {
  TempDir dir("ckroot");
  auto r = BackboneRegistry::builtin();
  r.checkpoint_root = dir.path();
  CHECK(code_of([&] { load_backbone("bengali-sbert", r, 1); }) ==
        ErrorCode::CheckpointUnavailable);

  const auto albert = r.checkpoint_dir(r.resolve("indic-bert"));
  std::filesystem::create_directories(albert);
  testing_support::write_file(albert / "config.json", R"({"model_type": "albert"})");
  testing_support::write_file(albert / "model.safetensors", "");
  testing_support::write_file(albert / "vocab.txt", "[PAD]\n[UNK]\n[CLS]\n[SEP]\n");
  CHECK(code_of([&] { load_backbone("indic-bert", r, 1); }) == ErrorCode::CheckpointUnavailable);
}

TEST_CASE("toy backbone shape") {
  const ClassifierModel m = toy();
  CHECK(m.config().layers == 2);
  CHECK(m.config().hidden == 32);
  CHECK(m.spec().pooling == Pooling::mean_pool);
  CHECK(m.backbone().family == Family::sbert);
  CHECK(m.parameter("classifier.weight").value.rows() == 2);
  CHECK(m.parameter("classifier.weight").value.cols() == 32);
}

TEST_CASE("toy backbone is deterministic, head depends on the seed") {
  const ClassifierModel a = toy(2, 5), b = toy(2, 5), c = toy(2, 6);
  for (size_t i = 0; i < a.parameters().size(); ++i) {
    CHECK(a.parameters()[i].value == b.parameters()[i].value);
  }
  CHECK(a.parameter("embeddings.word_embeddings.weight").value ==
        c.parameter("embeddings.word_embeddings.weight").value);
  CHECK(a.parameter("classifier.weight").value != c.parameter("classifier.weight").value);
}

TEST_CASE("freeze six of twelve") {
  ClassifierModel m = twelve_layer(6);
  const auto blocks = trainable_blocks(m);
  CHECK_FALSE(blocks[0]);
  for (size_t layer = 0; layer < 12; ++layer) {
    CAPTURE(layer);
    CHECK(blocks[layer + 1] == (layer >= 6));
  }
  CHECK(blocks[m.head_block()]);
}

TEST_CASE("freeze zero and freeze all") {
  ClassifierModel m = twelve_layer(0);
  for (bool b : trainable_blocks(m)) CHECK(b);
  m.apply_freeze(12);
  const auto blocks = trainable_blocks(m);
  for (size_t i = 0; i < m.head_block(); ++i) CHECK_FALSE(blocks[i]);
  CHECK(blocks[m.head_block()]);
  CHECK(code_of([&] { m.apply_freeze(13); }) == ErrorCode::FreezeOutOfRange);
  CHECK(code_of([&] { twelve_layer(13); }) == ErrorCode::FreezeOutOfRange);
}

TEST_CASE("embeddings can stay trainable") {
  ClassifierModel m = twelve_layer(3, false);
  const auto blocks = trainable_blocks(m);
  CHECK(blocks[0]);
  CHECK_FALSE(blocks[1]);
  CHECK(blocks[4]);
}

TEST_CASE("partition is complete for every freeze setting") {
  ClassifierModel m = twelve_layer(0);
  size_t total = 0;
  for (const Parameter& p : m.parameters()) total += p.value.size();
  for (size_t k = 0; k <= 12; ++k) {
    const FreezeReport r = m.apply_freeze(k);
    CHECK(r.frozen + r.trainable == r.total);
    CHECK(r.total == total);
    size_t frozen = 0;
    for (const Parameter& p : m.parameters()) {
      if (!p.trainable) frozen += p.value.size();
    }
    CHECK(frozen == r.frozen);
    const FreezeReport again = m.freeze_report();
    CHECK(again.frozen == r.frozen);
  }
}

TEST_CASE("forward shape and finiteness") {
  const ClassifierModel m = toy();
  const std::vector<std::string> texts{"ভালো না", "খারাপ কথা", "ভালো না", ""};
  const auto batch = m.encode_batch(texts);
  const Matrix logits = m.forward(batch);
  CHECK(logits.rows() == 4);
  CHECK(logits.cols() == 2);
  CHECK(logits.allFinite());
  CHECK(logits.row(0) == logits.row(2));
  CHECK(logits.row(0) != logits.row(1));
}

TEST_CASE("padding does not change logits") {
  for (Pooling pooling : {Pooling::mean_pool, Pooling::cls_token}) {
    const auto registry = BackboneRegistry::builtin();
    ModelSpec spec = default_spec(registry.resolve(kToyBackbone));
    spec.pooling = pooling;
    const ClassifierModel m = load_backbone(kToyBackbone, registry, 3, spec);
    TokenSequence plain = m.encode("খারাপ কথা বলো না");
    TokenSequence padded = plain;
    for (int k = 0; k < 9; ++k) {
      padded.ids.push_back(m.tokenizer().pad_id());
      padded.attention_mask.push_back(0);
    }
    const std::vector<TokenSequence> a{plain}, b{padded};
    CHECK(m.forward(a) == m.forward(b));
  }
}

TEST_CASE("mean pooling of a single token matches a hand computation") {
  const ClassifierModel m = toy();
  const EncoderConfig& c = m.config();
  const TokenId token = 17;
  const std::vector<TokenSequence> batch{{{token}, {1}}};

  auto P = [&](const std::string& name) -> const Matrix& { return m.parameter(name).value; };
  Eigen::RowVectorXd h = P("embeddings.word_embeddings.weight").row(token) +
                         P("embeddings.position_embeddings.weight").row(0) +
                         P("embeddings.token_type_embeddings.weight").row(0);
  h = layer_norm(h, P("embeddings.LayerNorm.weight"), P("embeddings.LayerNorm.bias"),
                 c.layer_norm_eps);
  for (size_t l = 0; l < c.layers; ++l) {
    const std::string p = "encoder.layer." + std::to_string(l) + ".";
    // One token attends only to itself, so attention reduces to the value path.
    Eigen::RowVectorXd v = h * P(p + "attention.self.value.weight").transpose() +
                           P(p + "attention.self.value.bias");
    Eigen::RowVectorXd o = v * P(p + "attention.output.dense.weight").transpose() +
                           P(p + "attention.output.dense.bias");
    h = layer_norm(h + o, P(p + "attention.output.LayerNorm.weight"),
                   P(p + "attention.output.LayerNorm.bias"), c.layer_norm_eps);
    Eigen::RowVectorXd f = h * P(p + "intermediate.dense.weight").transpose() +
                           P(p + "intermediate.dense.bias");
    f = f.unaryExpr([](double x) { return gelu(x); });
    Eigen::RowVectorXd g = f * P(p + "output.dense.weight").transpose() +
                           P(p + "output.dense.bias");
    h = layer_norm(h + g, P(p + "output.LayerNorm.weight"), P(p + "output.LayerNorm.bias"),
                   c.layer_norm_eps);
  }
  const Matrix pooled = m.pooled(batch);
  CHECK((pooled.row(0) - h).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::RowVectorXd expected = h * P("classifier.weight").transpose() + P("classifier.bias");
  CHECK((m.forward(batch).row(0) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sequence length limits") {
  auto registry = BackboneRegistry::builtin();
  ModelSpec spec = default_spec(registry.resolve(kToyBackbone));
  spec.max_sequence_length = 6;
  const ClassifierModel cut = load_backbone(kToyBackbone, registry, 1, spec);
  const TokenSequence s = cut.encode("এক দুই তিন চার পাঁচ ছয় সাত");
  CHECK(s.ids.size() == 6);
  CHECK(s.ids.front() == cut.tokenizer().cls_id());
  CHECK(s.ids.back() == cut.tokenizer().sep_id());

  spec.truncate = false;
  const ClassifierModel strict = load_backbone(kToyBackbone, registry, 1, spec);
  CHECK(code_of([&] { strict.encode("এক দুই তিন চার পাঁচ ছয় সাত"); }) ==
        ErrorCode::SequenceTooLong);
  CHECK(strict.encode("এক দুই").ids.size() == 4);
}

TEST_CASE("spec naming another backbone is rejected") {
  const auto registry = BackboneRegistry::builtin();
  ModelSpec spec = default_spec(registry.resolve("bengali-sbert"));
  CHECK(code_of([&] { load_backbone(kToyBackbone, registry, 1, spec); }) ==
        ErrorCode::SpecMismatch);
}

TEST_CASE("Hugging Face BERT checkpoint: tokenizer and hidden states") {
  const auto expected = nlohmann::json::parse(
      testing_support::slurp(testing_support::fixture("tiny_bert/expected.json")));
  for (Pooling pooling : {Pooling::mean_pool, Pooling::cls_token}) {
    const auto registry = with_fixture_bert(pooling);
    const ClassifierModel m = load_backbone("hf-tiny", registry, 1);
    CHECK(m.config().hidden == 16);
    for (const auto& c : expected.at("cases")) {
      const std::string text = c.at("text");
      CAPTURE(text);
      const TokenSequence seq = m.encode(text);
      CHECK(seq.ids == c.at("ids").get<std::vector<TokenId>>());
      const std::vector<TokenSequence> batch{seq};
      const Matrix pooled = m.pooled(batch);
      const auto want = as_vector(c.at(pooling == Pooling::mean_pool ? "mean" : "cls"));
      REQUIRE(pooled.cols() == static_cast<Eigen::Index>(want.size()));
      for (size_t k = 0; k < want.size(); ++k) CHECK(pooled(0, k) == doctest::Approx(want[k]).epsilon(1e-9));
    }
  }

  const auto registry = with_fixture_bert(Pooling::mean_pool);
  const ClassifierModel m = load_backbone("hf-tiny", registry, 1);
  const auto& pb = expected.at("padded_batch");
  std::vector<TokenSequence> batch;
  for (size_t i = 0; i < pb.at("ids").size(); ++i) {
    TokenSequence s;
    s.ids = pb.at("ids")[i].get<std::vector<TokenId>>();
    s.attention_mask = pb.at("mask")[i].get<std::vector<uint8_t>>();
    batch.push_back(s);
  }
  const Matrix pooled = m.pooled(batch);
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto want = as_vector(pb.at("mean")[i]);
    for (size_t k = 0; k < want.size(); ++k) CHECK(pooled(i, k) == doctest::Approx(want[k]).epsilon(1e-9));
  }
}

TEST_CASE("softmax rows") {
  Matrix logits(2, 2);
  logits << 0.0, 0.0, 1000.0, -1000.0;
  const Matrix p = softmax_rows(logits);
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(p(1, 0) == doctest::Approx(1.0));
  CHECK(p.allFinite());
}

}  // TEST_SUITE
