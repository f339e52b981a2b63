#include "hof/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hof/checkpoint.hpp"
#include "hof/config.hpp"
#include "hof/corpus.hpp"
#include "hof/delimited.hpp"
#include "hof/eval.hpp"
#include "hof/normalize.hpp"
#include "hof/registry.hpp"
#include "hof/submission.hpp"
#include "hof/train.hpp"

namespace hof::cli {

ExitCode exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::UnknownBackbone:
    case ErrorCode::FreezeOutOfRange:
      return kUsage;
    case ErrorCode::MissingColumn:
    case ErrorCode::MalformedRow:
    case ErrorCode::InvalidEncoding:
    case ErrorCode::DuplicateId:
    case ErrorCode::InvalidLabel:
    case ErrorCode::MixedLabeling:
    case ErrorCode::UnlabeledPost:
    case ErrorCode::InsufficientClassCount:
    case ErrorCode::SequenceTooLong:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::LengthMismatch:
    case ErrorCode::InvalidLabelValue:
    case ErrorCode::EmptyInput:
    case ErrorCode::IncompletePredictions:
      return kDataError;
    case ErrorCode::CheckpointUnavailable:
    case ErrorCode::NonFiniteLoss:
    case ErrorCode::IoFailure:
    case ErrorCode::ChecksumMismatch:
    case ErrorCode::SpecMismatch:
    case ErrorCode::RegistryLocked:
      return kRuntimeFailure;
  }
  return kRuntimeFailure;
}

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::string output_dir;
  std::optional<uint64_t> seed;
  std::string input;
  std::string predictions;
  std::string checkpoint;
  std::string out_file;
  std::string task_filter;
};

RunConfig load(const Options& o) {
  if (o.config.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "--config is required");
  }
  std::vector<std::string> overrides = o.overrides;
  if (!o.output_dir.empty()) {
    overrides.push_back("output_dir=" + nlohmann::json(fs::absolute(o.output_dir).string()).dump());
  }
  if (o.seed) overrides.push_back("train.seed=" + std::to_string(*o.seed));
  return load_run_config(o.config, overrides);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
}

const fs::path& require_path(const std::optional<fs::path>& p, const char* what) {
  if (!p) throw Error(ErrorCode::ConfigInvalid, std::string("config lacks data.") + what);
  return *p;
}

fs::path checkpoint_dir(const RunConfig& c, const Options& o) {
  return o.checkpoint.empty() ? c.output_dir / "checkpoint" : fs::path(o.checkpoint);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

int cmd_stats(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  ensure_dir(c.output_dir);
  std::vector<std::pair<std::string, fs::path>> files;
  if (c.data.train) files.emplace_back("train", *c.data.train);
  if (c.data.test) files.emplace_back("test", *c.data.test);
  if (c.data.eval) files.emplace_back("eval", *c.data.eval);
  if (!o.input.empty()) files.emplace_back("input", o.input);
  if (files.empty()) throw Error(ErrorCode::ConfigInvalid, "no data files configured");

  std::ostringstream table;
  table << "split\tlanguage\tHOF\tNOT\tunlabeled\ttotal\tfile\n";
  for (const auto& [split, path] : files) {
    const CorpusStats s = stats(ingest(path, c.columns), c.language);
    table << split << '\t' << language_name(s.language) << '\t' << s.hof << '\t'
          << s.not_offensive << '\t' << s.unlabeled << '\t' << s.total << '\t'
          << path.string() << '\n';
  }
  write_text(c.output_dir / "stats.tsv", table.str());
  out << table.str();
  return kOk;
}

void write_corpus(const NormalizedCorpus& corpus, const ColumnMapping& columns,
                  const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  std::vector<std::string> header{columns.id, columns.text};
  if (corpus.labeled) header.push_back(columns.label);
  write_delimited_row(f, header, columns.delimiter);
  for (const NormalizedPost& p : corpus.posts) {
    std::vector<std::string> row{p.id, p.text};
    if (corpus.labeled) row.emplace_back(LabelCodec::name(*p.label));
    write_delimited_row(f, row, columns.delimiter);
  }
}

int cmd_normalize(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  const fs::path dir = c.output_dir / "normalized";
  ensure_dir(dir);
  std::vector<fs::path> inputs;
  if (!o.input.empty()) {
    inputs.emplace_back(o.input);
  } else {
    for (const auto& p : {c.data.train, c.data.test, c.data.eval}) {
      if (p) inputs.push_back(*p);
    }
  }
  if (inputs.empty()) throw Error(ErrorCode::ConfigInvalid, "no data files configured");

  std::ostringstream summary;
  for (const fs::path& input : inputs) {
    const NormalizedCorpus n = normalize_corpus(ingest(input, c.columns), c.normalize);
    const fs::path target = dir / input.filename();
    write_corpus(n, c.columns, target);
    summary << "file=" << input.string() << '\n'
            << "output=" << target.string() << '\n'
            << "posts=" << n.size() << '\n';
    for (Rule r : kRuleOrder) {
      summary << rule_name(r) << '=' << n.rule_changes[static_cast<size_t>(r)] << '\n';
    }
    summary << "empty_after_normalization=" << n.empty_posts << "\n\n";
  }
  write_text(dir / "summary.txt", summary.str());
  out << summary.str();
  return kOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  ensure_dir(c.output_dir);
  const fs::path train_path = require_path(c.data.train, "train");

  ColumnMapping columns = c.columns;
  columns.label_required = true;
  Corpus corpus = ingest(train_path, columns);
  std::optional<Corpus> dev;
  if (c.dev_fraction > 0.0) {
    CorpusSplit split = stratified_split(corpus, c.dev_fraction, c.train.seed);
    corpus = std::move(split.train);
    dev = std::move(split.dev);
  }
  const NormalizedCorpus normalized = normalize_corpus(corpus, c.normalize);
  const TrainingSet data = make_training_set(normalized);

  const BackboneRegistry registry = registry_for(c);
  ClassifierModel model = load_backbone(c.model.backbone, registry, c.train.seed, c.model);
  const FreezeReport freeze = model.freeze_report();
  spdlog::info("{}: {} frozen / {} trainable parameters", model.spec().backbone,
               freeze.frozen, freeze.trainable);

  const fs::path ckpt = checkpoint_dir(c, o);
  RunRecord record = train(model, data, c.train, ckpt);
  write_text(c.output_dir / "config.json", to_json(c).dump(2) + "\n");

  std::optional<EvalReport> dev_report;
  if (dev) {
    const NormalizedCorpus dev_norm = normalize_corpus(*dev, c.normalize);
    std::vector<int> pred;
    for (const PredictionRecord& r : predict(model, dev_norm)) {
      pred.push_back(LabelCodec::encode(r.label));
    }
    dev_report = report(encode_labels(*dev), pred);
  }

  std::ostringstream rr;
  rr << "run_id=" << record.run_id << '\n'
     << "started_at=" << record.started_at << '\n'
     << "duration_seconds=" << fmt::format("{:.3f}", record.duration_seconds) << '\n'
     << "checkpoint=" << record.checkpoint << '\n'
     << "optimizer_steps=" << record.optimizer_steps << '\n'
     << "frozen_parameters=" << freeze.frozen << '\n'
     << "trainable_parameters=" << freeze.trainable << '\n'
     << "config_hash=" << config_hash(c) << '\n';
  for (size_t e = 0; e < record.epoch_losses.size(); ++e) {
    rr << "epoch." << e + 1 << ".loss=" << fmt::format("{:.6f}", record.epoch_losses[e]) << '\n';
  }
  for (const auto& [k, v] : to_key_values(record.config)) rr << "train." << k << '=' << v << '\n';
  if (dev_report) {
    for (const auto& [k, v] : to_key_values(*dev_report)) rr << "dev." << k << '=' << v << '\n';
  }
  write_text(c.output_dir / "run_record.txt", rr.str());

  RunRegistry reg(c.registry);
  record_run(reg, record, dev_report, task_name(c.task), config_hash(c));
  out << rr.str();
  return kOk;
}

NormalizedCorpus load_normalized(const RunConfig& c, const fs::path& path) {
  return normalize_corpus(ingest(path, c.columns), c.normalize);
}

int cmd_predict(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  ensure_dir(c.output_dir);
  const fs::path input = o.input.empty() ? require_path(c.data.test, "test") : fs::path(o.input);
  const ClassifierModel model = load_checkpoint(checkpoint_dir(c, o), registry_for(c), c.model);
  const NormalizedCorpus corpus = load_normalized(c, input);
  const std::vector<PredictionRecord> records = predict(model, corpus, c.train.batch_size);

  std::vector<std::string> ids;
  for (const NormalizedPost& p : corpus.posts) ids.push_back(p.id);
  const fs::path pred_path = c.output_dir / "predictions.tsv";
  const fs::path sub_path = o.out_file.empty() ? c.output_dir / "submission.tsv" : fs::path(o.out_file);
  write_predictions(records, pred_path);
  export_submission(records, sub_path, std::span<const std::string>(ids));
  out << "predictions=" << pred_path.string() << '\n'
      << "submission=" << sub_path.string() << '\n'
      << "posts=" << records.size() << '\n';
  return kOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  ensure_dir(c.output_dir);
  const fs::path gold_path = o.input.empty() ? require_path(c.data.eval, "eval") : fs::path(o.input);
  ColumnMapping columns = c.columns;
  columns.label_required = true;
  const Corpus gold = ingest(gold_path, columns);
  std::vector<std::string> ids;
  for (const RawPost& p : gold.posts) ids.push_back(p.id);

  std::vector<PredictionRecord> records;
  if (!o.predictions.empty()) {
    records = read_predictions(o.predictions);
  } else {
    const ClassifierModel model = load_checkpoint(checkpoint_dir(c, o), registry_for(c), c.model);
    records = predict(model, normalize_corpus(gold, c.normalize), c.train.batch_size);
  }
  const EvalReport r = report(encode_labels(gold), labels_for(records, ids));
  const std::string text = format_report(r);
  write_text(c.output_dir / "eval_report.txt", text);

  RunRecord run;
  run.run_id = "eval-" + config_hash(c);
  run.config = c.train;
  RunRegistry reg(c.registry);
  record_run(reg, run, r, task_name(c.task), config_hash(c));
  out << text;
  return kOk;
}

int cmd_export(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  const fs::path pred_path = o.predictions.empty() ? c.output_dir / "predictions.tsv" : fs::path(o.predictions);
  const fs::path sub_path = o.out_file.empty() ? c.output_dir / "submission.tsv" : fs::path(o.out_file);
  const std::vector<PredictionRecord> records = read_predictions(pred_path);
  const std::optional<fs::path> corpus_path =
      o.input.empty() ? c.data.test : std::optional<fs::path>(o.input);
  if (corpus_path) {
    const Corpus corpus = ingest(*corpus_path, c.columns);
    std::vector<std::string> ids;
    for (const RawPost& p : corpus.posts) ids.push_back(p.id);
    export_submission(records, sub_path, std::span<const std::string>(ids));
  } else {
    export_submission(records, sub_path);
  }
  out << "submission=" << sub_path.string() << '\n' << "posts=" << records.size() << '\n';
  return kOk;
}

int cmd_runs(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  RunRegistry reg(c.registry);
  const auto entries = o.task_filter.empty() ? reg.entries() : reg.query("task", o.task_filter);
  for (const RegistryEntry& e : entries) {
    out << "[run]\n";
    for (const auto& [k, v] : e.fields) out << k << '=' << v << '\n';
    out << '\n';
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Offensive-language detection for Bengali, Assamese and Gujarati posts",
               "hofdetect"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "Run configuration (JSON)")->required();
    sub->add_option("--set", o.overrides, "Override a config key: dotted.key=value");
    sub->add_option("-o,--output-dir", o.output_dir, "Override output_dir");
    sub->add_option("--seed", o.seed, "Override train.seed");
  };
  std::map<std::string, int (*)(const Options&, std::ostream&)> handlers;
  auto add = [&](const char* name, const char* help, int (*fn)(const Options&, std::ostream&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub);
    handlers[name] = fn;
    return sub;
  };
  add("stats", "Per-label counts for the configured data files", cmd_stats)
      ->add_option("--input", o.input, "Extra corpus file");
  add("normalize", "Write cleaned copies of the corpora and per-rule change counts",
      cmd_normalize)
      ->add_option("--input", o.input, "Normalize only this file");
  add("train", "Fine-tune the configured backbone", cmd_train)
      ->add_option("--checkpoint", o.checkpoint, "Checkpoint directory");
  {
    CLI::App* sub = add("predict", "Label the test corpus and write a submission", cmd_predict);
    sub->add_option("--checkpoint", o.checkpoint, "Checkpoint directory");
    sub->add_option("--input", o.input, "Corpus to label instead of data.test");
    sub->add_option("--out", o.out_file, "Submission path");
  }
  {
    CLI::App* sub = add("evaluate", "Macro F1 and per-class scores against gold labels",
                        cmd_evaluate);
    sub->add_option("--predictions", o.predictions, "Predictions or submission file");
    sub->add_option("--checkpoint", o.checkpoint, "Checkpoint to predict with");
    sub->add_option("--input", o.input, "Gold corpus instead of data.eval");
  }
  {
    CLI::App* sub = add("export", "Convert a predictions file to submission format", cmd_export);
    sub->add_option("--predictions", o.predictions, "Predictions file");
    sub->add_option("--input", o.input, "Corpus whose ids the submission must cover");
    sub->add_option("--out", o.out_file, "Submission path");
  }
  add("runs", "List run registry entries", cmd_runs)
      ->add_option("--task", o.task_filter, "Only entries for this task");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return kUsage;
  }

  try {
    for (const auto& [name, fn] : handlers) {
      if (app.got_subcommand(name)) return fn(o, out);
    }
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

}  // namespace hof::cli
