#include "hof/config.hpp"

#include <fstream>
#include <set>

#include "hof/checksum.hpp"
#include "hof/error.hpp"

namespace hof {

using nlohmann::json;

std::string_view task_name(Task task) {
  switch (task) {
    case Task::gujarati_task1: return "gujarati_task1";
    case Task::assamese_task4: return "assamese_task4";
    case Task::bengali_task4: return "bengali_task4";
    case Task::custom: return "custom";
  }
  return "custom";
}

std::optional<Task> parse_task(std::string_view name) {
  for (Task t : {Task::gujarati_task1, Task::assamese_task4,
                 Task::bengali_task4, Task::custom}) {
    if (task_name(t) == name) return t;
  }
  return std::nullopt;
}

RunConfig default_run_config(Task task) {
  RunConfig c;
  c.task = task;
  switch (task) {
    case Task::gujarati_task1:
      c.language = Language::gujarati;
      c.model.backbone = "gujarati-sbert";
      break;
    case Task::assamese_task4:
      c.language = Language::assamese;
      c.model.backbone = "assamese-bert";
      break;
    case Task::bengali_task4:
      c.language = Language::bengali;
      c.model.backbone = "bengali-sbert";
      break;
    case Task::custom:
      c.language = Language::other;
      break;
  }
  return c;
}

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::ConfigInvalid, what);
}

void reject_unknown(const json& object, const std::string& where,
                    std::initializer_list<std::string_view> known) {
  if (!object.is_object()) invalid(where + " must be an object");
  const std::set<std::string_view> allowed(known);
  for (const auto& [key, _] : object.items()) {
    if (!allowed.contains(key)) invalid("unknown key '" + where + key + "'");
  }
}

template <typename T>
T get_as(const json& object, const std::string& key, const std::string& where,
         T fallback) {
  if (!object.contains(key)) return fallback;
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    invalid("'" + where + key + "' has the wrong type");
  }
}

size_t get_count(const json& object, const std::string& key,
                 const std::string& where, size_t fallback) {
  if (!object.contains(key)) return fallback;
  const json& v = object.at(key);
  if (!v.is_number_integer() || v.get<int64_t>() < 0) {
    invalid("'" + where + key + "' must be a non-negative integer");
  }
  return v.get<size_t>();
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

char parse_delimiter(const std::string& text) {
  if (text == "tab" || text == "\t" || text == "\\t") return '\t';
  if (text == "comma" || text == ",") return ',';
  if (text.size() == 1) return text[0];
  invalid("delimiter must be 'tab', 'comma' or a single character");
}

void apply_override(json& document, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    invalid("override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &document;
  size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) invalid("override key '" + key + "' is malformed");
    if (!node->is_object()) invalid("override '" + key + "' descends into a value");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

}  // namespace

RunConfig parse_run_config(json doc, const std::filesystem::path& base,
                           const std::vector<std::string>& overrides) {
  if (!doc.is_object()) invalid("configuration must be a JSON object");
  for (const std::string& o : overrides) apply_override(doc, o);
  reject_unknown(doc, "", {"task", "language", "data", "columns", "model",
                           "train", "normalize", "output_dir", "registry"});

  const std::string task_text = get_as<std::string>(doc, "task", "", "custom");
  const auto task = parse_task(task_text);
  if (!task) invalid("unknown task '" + task_text + "'");
  RunConfig c = default_run_config(*task);

  if (doc.contains("language")) {
    const auto lang = parse_language(get_as<std::string>(doc, "language", "", ""));
    if (!lang) invalid("unknown language");
    c.language = *lang;
  }

  if (doc.contains("data")) {
    const json& d = doc.at("data");
    reject_unknown(d, "data.", {"train", "test", "eval"});
    if (d.contains("train")) c.data.train = resolve(base, get_as<std::string>(d, "train", "data.", ""));
    if (d.contains("test")) c.data.test = resolve(base, get_as<std::string>(d, "test", "data.", ""));
    if (d.contains("eval")) c.data.eval = resolve(base, get_as<std::string>(d, "eval", "data.", ""));
  }

  if (doc.contains("columns")) {
    const json& col = doc.at("columns");
    reject_unknown(col, "columns.", {"delimiter", "quoting", "id", "text", "label"});
    c.columns.delimiter = parse_delimiter(get_as<std::string>(col, "delimiter", "columns.", "tab"));
    c.columns.quoting = get_as<bool>(col, "quoting", "columns.", true);
    c.columns.id = get_as<std::string>(col, "id", "columns.", "id");
    c.columns.text = get_as<std::string>(col, "text", "columns.", "text");
    c.columns.label = get_as<std::string>(col, "label", "columns.", "label");
  }

  const json model = doc.value("model", json::object());
  reject_unknown(model, "model.", {"backbone", "pooling", "freeze_layers",
                                   "freeze_embeddings", "max_sequence_length",
                                   "truncate", "checkpoint_root"});
  c.model.backbone = get_as<std::string>(model, "backbone", "model.", c.model.backbone);
  if (c.model.backbone.empty()) invalid("model.backbone is required for task custom");
  if (model.contains("checkpoint_root")) {
    c.checkpoint_root = resolve(base, get_as<std::string>(model, "checkpoint_root", "model.", ""));
  }
  const BackboneRegistry registry = registry_for(c);
  const BackboneEntry* entry = &registry.resolve(c.model.backbone);
  const ModelSpec defaults = default_spec(*entry);
  c.model.backbone = entry->name;
  c.model.pooling = defaults.pooling;
  if (model.contains("pooling")) {
    const auto pooling = parse_pooling(get_as<std::string>(model, "pooling", "model.", ""));
    if (!pooling) invalid("model.pooling must be cls_token or mean_pool");
    c.model.pooling = *pooling;
  }
  c.model.freeze_layers = get_count(model, "freeze_layers", "model.", defaults.freeze_layers);
  c.model.freeze_embeddings = get_as<bool>(model, "freeze_embeddings", "model.", true);
  c.model.max_sequence_length =
      get_count(model, "max_sequence_length", "model.", defaults.max_sequence_length);
  c.model.truncate = get_as<bool>(model, "truncate", "model.", true);
  if (c.model.freeze_layers > entry->layers) {
    throw Error(ErrorCode::FreezeOutOfRange,
                "model.freeze_layers=" + std::to_string(c.model.freeze_layers) +
                    " exceeds the " + std::to_string(entry->layers) +
                    " layers of " + entry->name);
  }

  const json tr = doc.value("train", json::object());
  reject_unknown(tr, "train.", {"epochs", "learning_rate", "batch_size", "seed",
                                "optimizer", "weight_decay", "beta1", "beta2",
                                "epsilon", "class_weighting", "dev_fraction"});
  if (get_as<std::string>(tr, "optimizer", "train.", "adamw") != "adamw") {
    invalid("train.optimizer must be adamw");
  }
  c.train.epochs = get_count(tr, "epochs", "train.", c.train.epochs);
  c.train.learning_rate = get_as<double>(tr, "learning_rate", "train.", c.train.learning_rate);
  c.train.batch_size = get_count(tr, "batch_size", "train.", c.train.batch_size);
  c.train.seed = get_as<uint64_t>(tr, "seed", "train.", c.train.seed);
  c.train.weight_decay = get_as<double>(tr, "weight_decay", "train.", c.train.weight_decay);
  c.train.beta1 = get_as<double>(tr, "beta1", "train.", c.train.beta1);
  c.train.beta2 = get_as<double>(tr, "beta2", "train.", c.train.beta2);
  c.train.epsilon = get_as<double>(tr, "epsilon", "train.", c.train.epsilon);
  c.train.class_weighting = get_as<bool>(tr, "class_weighting", "train.", false);
  c.dev_fraction = get_as<double>(tr, "dev_fraction", "train.", 0.0);
  c.train.validate();
  if (!(c.dev_fraction >= 0.0 && c.dev_fraction < 1.0)) {
    invalid("train.dev_fraction must lie in [0, 1)");
  }

  const json norm = doc.value("normalize", json::object());
  if (!norm.is_object()) invalid("normalize must be an object");
  for (const auto& [key, value] : norm.items()) {
    if (key == "hashtag_mode") {
      const std::string mode = value.is_string() ? value.get<std::string>() : "";
      if (mode == "whole_token") {
        c.normalize.hashtag_mode = HashtagMode::whole_token;
      } else if (mode == "strip_marker") {
        c.normalize.hashtag_mode = HashtagMode::strip_marker;
      } else {
        invalid("normalize.hashtag_mode must be whole_token or strip_marker");
      }
      continue;
    }
    const auto rule = parse_rule(key);
    if (!rule || !value.is_boolean()) invalid("normalize." + key + " is not a rule toggle");
    c.normalize.set(*rule, value.get<bool>());
  }

  c.output_dir = resolve(base, get_as<std::string>(doc, "output_dir", "", "runs"));
  c.registry = doc.contains("registry")
                   ? resolve(base, get_as<std::string>(doc, "registry", "", ""))
                   : c.output_dir / "registry.txt";
  return c;
}

RunConfig load_run_config(const std::filesystem::path& file,
                          const std::vector<std::string>& overrides) {
  std::ifstream in(file);
  if (!in) invalid("cannot open configuration " + file.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) invalid(file.string() + " is not valid JSON");
  return parse_run_config(std::move(doc),
                          std::filesystem::absolute(file).parent_path(), overrides);
}

json to_json(const RunConfig& c) {
  json doc;
  doc["task"] = task_name(c.task);
  doc["language"] = language_name(c.language);
  json data = json::object();
  if (c.data.train) data["train"] = c.data.train->string();
  if (c.data.test) data["test"] = c.data.test->string();
  if (c.data.eval) data["eval"] = c.data.eval->string();
  doc["data"] = data;
  doc["columns"] = {{"delimiter", c.columns.delimiter == '\t' ? std::string("tab")
                                  : c.columns.delimiter == ',' ? std::string("comma")
                                  : std::string(1, c.columns.delimiter)},
                    {"quoting", c.columns.quoting},
                    {"id", c.columns.id},
                    {"text", c.columns.text},
                    {"label", c.columns.label}};
  doc["model"] = {{"backbone", c.model.backbone},
                  {"pooling", pooling_name(c.model.pooling)},
                  {"freeze_layers", c.model.freeze_layers},
                  {"freeze_embeddings", c.model.freeze_embeddings},
                  {"max_sequence_length", c.model.max_sequence_length},
                  {"truncate", c.model.truncate}};
  if (c.checkpoint_root) doc["model"]["checkpoint_root"] = c.checkpoint_root->string();
  doc["train"] = {{"epochs", c.train.epochs},
                  {"learning_rate", c.train.learning_rate},
                  {"batch_size", c.train.batch_size},
                  {"seed", c.train.seed},
                  {"optimizer", "adamw"},
                  {"weight_decay", c.train.weight_decay},
                  {"beta1", c.train.beta1},
                  {"beta2", c.train.beta2},
                  {"epsilon", c.train.epsilon},
                  {"class_weighting", c.train.class_weighting},
                  {"dev_fraction", c.dev_fraction}};
  json norm = json::object();
  for (Rule r : kRuleOrder) norm[std::string(rule_name(r))] = c.normalize.is_enabled(r);
  norm["hashtag_mode"] = c.normalize.hashtag_mode == HashtagMode::whole_token
                             ? "whole_token"
                             : "strip_marker";
  doc["normalize"] = norm;
  doc["output_dir"] = c.output_dir.string();
  doc["registry"] = c.registry.string();
  return doc;
}

std::string config_hash(const RunConfig& config) {
  json snapshot = to_json(config);
  // Where results land does not change what is computed.
  snapshot.erase("output_dir");
  snapshot.erase("registry");
  return hex32(crc32(snapshot.dump()));
}

BackboneRegistry registry_for(const RunConfig& config) {
  BackboneRegistry registry = BackboneRegistry::builtin();
  if (config.checkpoint_root) registry.checkpoint_root = *config.checkpoint_root;
  return registry;
}

}  // namespace hof
