#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hof/eval.hpp"
#include "hof/train.hpp"

namespace hof {

struct RegistryEntry {
  std::vector<std::pair<std::string, std::string>> fields;

  std::optional<std::string> get(std::string_view key) const;
};

// Exclusive advisory lock (flock) on "<registry>.lock".
class RegistryLock {
 public:
  RegistryLock(const std::filesystem::path& registry_file,
               std::chrono::milliseconds timeout);
  ~RegistryLock();
  RegistryLock(const RegistryLock&) = delete;
  RegistryLock& operator=(const RegistryLock&) = delete;

 private:
  int fd_ = -1;
};

// Append-only run log. Each entry is a "[run]" line followed by key=value
// lines and a blank line.
class RunRegistry {
 public:
  explicit RunRegistry(std::filesystem::path file,
                       std::chrono::milliseconds lock_timeout =
                           std::chrono::seconds(10));

  struct Appended {
    int64_t timestamp_ms = 0;
    bool duplicate_config = false;
  };

  // Stamps timestamp_ms (strictly increasing within the file) and appends.
  // Throws RegistryLocked if the lock cannot be taken in time.
  Appended append(std::vector<std::pair<std::string, std::string>> fields);

  std::vector<RegistryEntry> entries() const;
  std::vector<RegistryEntry> query(std::string_view key,
                                   std::string_view value) const;

  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
  std::chrono::milliseconds lock_timeout_;
};

std::vector<RegistryEntry> parse_registry(std::string_view content);

// Registry fields for a finished run: identity, config hash, timings,
// losses and (when given) the evaluation metrics.
RunRegistry::Appended record_run(RunRegistry& registry, const RunRecord& run,
                                 const std::optional<EvalReport>& report,
                                 std::string_view task,
                                 std::string_view config_hash);

}  // namespace hof
