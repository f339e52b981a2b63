#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hof/corpus.hpp"
#include "hof/encoder.hpp"
#include "hof/normalize.hpp"
#include "hof/train.hpp"

namespace hof {

enum class Task { gujarati_task1, assamese_task4, bengali_task4, custom };

std::string_view task_name(Task task);
std::optional<Task> parse_task(std::string_view name);

struct DataPaths {
  std::optional<std::filesystem::path> train;
  std::optional<std::filesystem::path> test;
  std::optional<std::filesystem::path> eval;
};

// Everything a run depends on. Loaded from a JSON file; relative paths are
// resolved against the file's directory.
struct RunConfig {
  Task task = Task::custom;
  Language language = Language::other;
  DataPaths data;
  ColumnMapping columns;
  ModelSpec model;
  TrainConfig train;
  double dev_fraction = 0.0;
  Pipeline normalize;
  std::filesystem::path output_dir = "runs";
  std::filesystem::path registry;  // defaults to <output_dir>/registry.txt
  std::optional<std::filesystem::path> checkpoint_root;
};

// Task presets: language and the backbone that scored best for it.
RunConfig default_run_config(Task task);

// `overrides` are "dotted.key=value" strings applied on top of the file;
// values parse as JSON when they can, otherwise as strings.
RunConfig load_run_config(const std::filesystem::path& file,
                          const std::vector<std::string>& overrides = {});
RunConfig parse_run_config(nlohmann::json document,
                           const std::filesystem::path& base_dir,
                           const std::vector<std::string>& overrides = {});

nlohmann::json to_json(const RunConfig& config);
// CRC-32 of the canonical JSON snapshot.
std::string config_hash(const RunConfig& config);

BackboneRegistry registry_for(const RunConfig& config);

}  // namespace hof
