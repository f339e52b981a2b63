#include <doctest.h>

#include <cstdlib>
#include <map>
#include <sstream>

#include <json.hpp>

#include "hof/cli.hpp"
#include "hof/config.hpp"
#include "hof/error.hpp"
#include "hof/registry.hpp"
#include "support.hpp"

using namespace hof;
using testing_support::CliResult;
using testing_support::run_cli;
using testing_support::TempDir;

namespace {

std::string config() { return testing_support::fixture("toy_config.json").string(); }

CliResult run_in(const TempDir& out, std::vector<std::string> args) {
  args.insert(args.begin() + 1, {"--config", config(), "--output-dir", out.path().string()});
  return run_cli(args);
}

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config defaults follow the recipe") {
  const RunConfig c = load_run_config(config());
  CHECK(c.task == Task::bengali_task4);
  CHECK(c.train.epochs == 4);
  CHECK(c.train.learning_rate == 5e-5);
  CHECK(c.train.batch_size == 16);
  CHECK(c.model.freeze_layers == 2);
  CHECK(c.model.pooling == Pooling::mean_pool);
  CHECK(c.dev_fraction == 0.0);
  CHECK(c.data.train->is_absolute());
  CHECK(c.data.train->filename() == "train.tsv");
  CHECK(c.registry == c.output_dir / "registry.txt");

  const RunConfig bengali = default_run_config(Task::bengali_task4);
  CHECK(bengali.model.backbone == "bengali-sbert");
  CHECK(bengali.model.freeze_layers == 6);
  CHECK(default_run_config(Task::gujarati_task1).model.backbone == "gujarati-sbert");
  CHECK(default_run_config(Task::assamese_task4).model.backbone == "assamese-bert");
}

TEST_CASE("every design knob appears in the config snapshot") {
  const nlohmann::json j = to_json(load_run_config(config()));
  for (const char* path : {"/model/backbone", "/model/pooling", "/model/freeze_layers",
                           "/model/freeze_embeddings", "/model/max_sequence_length",
                           "/model/truncate", "/train/epochs", "/train/learning_rate",
                           "/train/batch_size", "/train/seed", "/train/optimizer",
                           "/train/weight_decay", "/train/class_weighting",
                           "/train/dev_fraction", "/normalize/strip_urls",
                           "/normalize/strip_mentions", "/normalize/strip_hashtags",
                           "/normalize/strip_roman_letters", "/normalize/strip_numbers",
                           "/normalize/strip_punctuation", "/normalize/normalize_whitespace",
                           "/normalize/hashtag_mode", "/columns/delimiter", "/columns/id",
                           "/columns/text", "/columns/label", "/output_dir", "/registry"}) {
    CAPTURE(path);
    CHECK(j.contains(nlohmann::json::json_pointer(path)));
  }
}

TEST_CASE("snapshot reloads to the same config") {
  const RunConfig c = load_run_config(config(), {"train.seed=9", "normalize.hashtag_mode=strip_marker"});
  const RunConfig again = parse_run_config(to_json(c), "/");
  CHECK(to_json(again) == to_json(c));
  CHECK(config_hash(again) == config_hash(c));
}

TEST_CASE("overrides and hashing") {
  const RunConfig base = load_run_config(config());
  const RunConfig o = load_run_config(
      config(), {"train.epochs=7", "model.freeze_layers=1", "normalize.strip_urls=false",
                 "columns.delimiter=comma", "output_dir=/tmp/elsewhere"});
  CHECK(o.train.epochs == 7);
  CHECK(o.model.freeze_layers == 1);
  CHECK_FALSE(o.normalize.is_enabled(Rule::strip_urls));
  CHECK(o.columns.delimiter == ',');
  CHECK(config_hash(base) != config_hash(o));
  CHECK(config_hash(base) == config_hash(load_run_config(config(), {"output_dir=/tmp/x"})));
}

TEST_CASE("invalid configurations") {
  auto code = [](std::vector<std::string> overrides) {
    try {
      load_run_config(config(), overrides);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::EmptyInput;
  };
  CHECK(code({"train.epochz=3"}) == ErrorCode::ConfigInvalid);
  CHECK(code({"train.epochs=0"}) == ErrorCode::ConfigInvalid);
  CHECK(code({"train.optimizer=sgd"}) == ErrorCode::ConfigInvalid);
  CHECK(code({"model.backbone=not-a-model"}) == ErrorCode::UnknownBackbone);
  CHECK(code({"model.freeze_layers=3"}) == ErrorCode::FreezeOutOfRange);
  CHECK(code({"task=task9"}) == ErrorCode::ConfigInvalid);
  CHECK(code({"normalize.strip_emoji=true"}) == ErrorCode::ConfigInvalid);
  CHECK(code({"train.dev_fraction=1.5"}) == ErrorCode::ConfigInvalid);
}

TEST_CASE("model cache root comes from the environment") {
  const char* old = std::getenv("HOF_MODEL_CACHE");
  const std::string saved = old ? old : "";
  ::setenv("HOF_MODEL_CACHE", "/srv/models", 1);
  CHECK(BackboneRegistry::builtin().checkpoint_root == "/srv/models");
  if (old) {
    ::setenv("HOF_MODEL_CACHE", saved.c_str(), 1);
  } else {
    ::unsetenv("HOF_MODEL_CACHE");
  }
  const RunConfig c = load_run_config(config(), {"model.checkpoint_root=/opt/ckpt"});
  CHECK(registry_for(c).checkpoint_root == "/opt/ckpt");
}

TEST_CASE("exit code mapping") {
  using namespace hof::cli;
  CHECK(exit_code_for(ErrorCode::ConfigInvalid) == kUsage);
  CHECK(exit_code_for(ErrorCode::UnknownBackbone) == kUsage);
  CHECK(exit_code_for(ErrorCode::InvalidLabel) == kDataError);
  CHECK(exit_code_for(ErrorCode::IncompletePredictions) == kDataError);
  CHECK(exit_code_for(ErrorCode::ChecksumMismatch) == kRuntimeFailure);
  CHECK(exit_code_for(ErrorCode::RegistryLocked) == kRuntimeFailure);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli({}).code == 1);
  CHECK(run_cli({"train"}).code == 1);
  CHECK(run_cli({"frobnicate"}).code == 1);
  TempDir out("cli");
  CHECK(run_in(out, {"train", "--set", "model.backbone=nope"}).code == 1);
  CHECK(run_in(out, {"train", "--set", "train.bogus=1"}).code == 1);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("data errors exit 2, runtime failures exit 3") {
  TempDir out("cli");
  testing_support::write_file(out / "bad.tsv", "id\ttext\tlabel\n1\tক\tOFF\n");
  const CliResult bad = run_in(out, {"train", "--set", "data.train=\"" + (out / "bad.tsv").string() + "\""});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("InvalidLabel") != std::string::npos);
  CHECK(run_in(out, {"predict", "--checkpoint", (out / "missing").string()}).code == 3);
}

TEST_CASE("stats writes the table") {
  TempDir out("cli");
  const CliResult r = run_in(out, {"stats"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("train\tbengali\t12\t12\t0\t24") != std::string::npos);
  CHECK(r.out.find("test\tbengali\t0\t0\t5\t5") != std::string::npos);
  CHECK(std::filesystem::exists(out / "stats.tsv"));
}

TEST_CASE("normalize writes cleaned corpora and a summary") {
  TempDir out("cli");
  const CliResult r = run_in(out, {"normalize"});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(out / "normalized" / "train.tsv"));
  CHECK(std::filesystem::exists(out / "normalized" / "summary.txt"));
  CHECK(r.out.find("strip_urls=") != std::string::npos);
  const Corpus cleaned = ingest(out / "normalized" / "test_unlabeled.tsv", {});
  REQUIRE(cleaned.size() == 5);
  CHECK(cleaned.posts[4].text.empty());
  CHECK(cleaned.posts[1].text == "ধন্যবাদ বন্ধু");
}

TEST_CASE("train, predict, evaluate, export, runs") {
  TempDir out("cli");
  const CliResult t = run_in(out, {"train"});
  REQUIRE(t.code == 0);
  const auto record = key_values(testing_support::slurp(out / "run_record.txt"));
  CHECK(record.count("epoch.4.loss") == 1);
  CHECK(record.count("epoch.5.loss") == 0);
  CHECK(record.at("optimizer_steps") == "8");
  CHECK(std::filesystem::exists(out / "checkpoint" / "manifest.txt"));
  CHECK(std::filesystem::exists(out / "config.json"));

  const CliResult p = run_in(out, {"predict"});
  REQUIRE(p.code == 0);
  const std::string sub = testing_support::slurp(out / "submission.tsv");
  std::istringstream lines(sub);
  std::string line;
  std::vector<std::string> ids;
  while (std::getline(lines, line)) {
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    ids.push_back(line.substr(0, tab));
    const std::string label = line.substr(tab + 1);
    CHECK((label == "HOF" || label == "NOT"));
  }
  CHECK(ids == std::vector<std::string>{"ts_1", "ts_2", "ts_3", "ts_4", "ts_5"});

  const CliResult e = run_in(out, {"evaluate"});
  REQUIRE(e.code == 0);
  CHECK(std::filesystem::exists(out / "eval_report.txt"));
  CHECK(e.out.find("macro_f1") != std::string::npos);

  const CliResult x = run_in(out, {"export", "--out", (out / "again.tsv").string()});
  REQUIRE(x.code == 0);
  CHECK(testing_support::slurp(out / "again.tsv") == sub);

  const CliResult runs = run_in(out, {"runs", "--task", "bengali_task4"});
  REQUIRE(runs.code == 0);
  CHECK(runs.out.find("kind=train") != std::string::npos);
  CHECK(runs.out.find("kind=evaluate") != std::string::npos);
  CHECK(run_in(out, {"runs", "--task", "gujarati_task1"}).out.empty());
}

TEST_CASE("evaluate on perfect predictions reports 1.0") {
  TempDir out("cli");
  const Corpus gold = ingest(testing_support::fixture("dev.tsv"), {});
  std::string sub;
  for (const RawPost& p : gold.posts) sub += p.id + "\t" + std::string(LabelCodec::name(*p.label)) + "\n";
  testing_support::write_file(out / "perfect.tsv", sub);
  const CliResult r = run_in(out, {"evaluate", "--predictions", (out / "perfect.tsv").string()});
  REQUIRE(r.code == 0);
  CHECK(key_values(r.out).at("macro_f1") == "1.000000");
}

TEST_CASE("evaluate refuses incomplete predictions") {
  TempDir out("cli");
  testing_support::write_file(out / "partial.tsv", "dv_000\tHOF\n");
  CHECK(run_in(out, {"evaluate", "--predictions", (out / "partial.tsv").string()}).code == 2);
}

TEST_CASE("dev split is reported when requested") {
  TempDir out("cli");
  const CliResult r = run_in(out, {"train", "--set", "train.dev_fraction=0.25", "--set", "train.epochs=1"});
  REQUIRE(r.code == 0);
  const auto record = key_values(r.out);
  CHECK(record.at("dev.n") == "6");
}

}  // TEST_SUITE
