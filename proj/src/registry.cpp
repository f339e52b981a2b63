#include "hof/registry.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hof/delimited.hpp"
#include "hof/error.hpp"

namespace hof {

std::optional<std::string> RegistryEntry::get(std::string_view key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  return std::nullopt;
}

RegistryLock::RegistryLock(const std::filesystem::path& registry_file,
                           std::chrono::milliseconds timeout) {
  const std::string lock_path = registry_file.string() + ".lock";
  fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error(ErrorCode::IoFailure,
                "cannot open " + lock_path + ": " + std::strerror(errno));
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    if (errno != EWOULDBLOCK && errno != EINTR) {
      ::close(fd_);
      throw Error(ErrorCode::IoFailure, "flock failed on " + lock_path);
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      ::close(fd_);
      throw Error(ErrorCode::RegistryLocked,
                  lock_path + " is held by another writer");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

RegistryLock::~RegistryLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

RunRegistry::RunRegistry(std::filesystem::path file,
                         std::chrono::milliseconds lock_timeout)
    : file_(std::move(file)), lock_timeout_(lock_timeout) {}

std::vector<RegistryEntry> parse_registry(std::string_view content) {
  std::vector<RegistryEntry> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::optional<RegistryEntry> current;
  while (std::getline(in, line)) {
    if (line == "[run]") {
      if (current) out.push_back(std::move(*current));
      current.emplace();
      continue;
    }
    if (line.empty() || !current) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    current->fields.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  if (current) out.push_back(std::move(*current));
  return out;
}

std::vector<RegistryEntry> RunRegistry::entries() const {
  if (!std::filesystem::exists(file_)) return {};
  return parse_registry(read_file(file_));
}

std::vector<RegistryEntry> RunRegistry::query(std::string_view key,
                                              std::string_view value) const {
  std::vector<RegistryEntry> out;
  for (RegistryEntry& e : entries()) {
    if (e.get(key) == value) out.push_back(std::move(e));
  }
  return out;
}

RunRegistry::Appended RunRegistry::append(
    std::vector<std::pair<std::string, std::string>> fields) {
  if (file_.has_parent_path()) {
    std::filesystem::create_directories(file_.parent_path());
  }
  RegistryLock lock(file_, lock_timeout_);

  Appended result;
  int64_t last = 0;
  std::optional<std::string> hash;
  for (const auto& [k, v] : fields) {
    if (k == "config_hash") hash = v;
  }
  for (const RegistryEntry& e : entries()) {
    if (auto ts = e.get("timestamp_ms")) last = std::max<int64_t>(last, std::stoll(*ts));
    if (hash && e.get("config_hash") == hash && e.get("kind") == std::string("train")) {
      result.duplicate_config = true;
    }
  }
  const int64_t now = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();
  result.timestamp_ms = std::max(now, last + 1);

  std::string block = "[run]\n";
  block += "timestamp_ms=" + std::to_string(result.timestamp_ms) + "\n";
  for (const auto& [k, v] : fields) {
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos ||
        v.find('\n') != std::string::npos) {
      throw Error(ErrorCode::ConfigInvalid, "registry field '" + k + "' is not a single line");
    }
    block += k + "=" + v + "\n";
  }
  block += "\n";

  const int fd = ::open(file_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::IoFailure, "cannot open " + file_.string());
  const ssize_t written = ::write(fd, block.data(), block.size());
  ::fsync(fd);
  ::close(fd);
  if (written != static_cast<ssize_t>(block.size())) {
    throw Error(ErrorCode::IoFailure, "short write to " + file_.string());
  }
  if (result.duplicate_config && hash) {
    spdlog::warn("registry {} already holds a run with config hash {}",
                 file_.string(), *hash);
  }
  return result;
}

RunRegistry::Appended record_run(RunRegistry& registry, const RunRecord& run,
                                 const std::optional<EvalReport>& report,
                                 std::string_view task,
                                 std::string_view config_hash) {
  std::vector<std::pair<std::string, std::string>> fields;
  fields.emplace_back("run_id", run.run_id);
  fields.emplace_back("kind", report && run.epoch_losses.empty() ? "evaluate" : "train");
  fields.emplace_back("task", std::string(task));
  fields.emplace_back("config_hash", std::string(config_hash));
  fields.emplace_back("started_at", run.started_at);
  fields.emplace_back("duration_seconds", fmt::format("{:.3f}", run.duration_seconds));
  if (!run.epoch_losses.empty()) {
    std::string losses;
    for (size_t i = 0; i < run.epoch_losses.size(); ++i) {
      if (i) losses += ',';
      losses += fmt::format("{:.6f}", run.epoch_losses[i]);
    }
    fields.emplace_back("epoch_losses", losses);
    fields.emplace_back("optimizer_steps", std::to_string(run.optimizer_steps));
  }
  if (!run.checkpoint.empty()) fields.emplace_back("checkpoint", run.checkpoint);
  for (const auto& [k, v] : to_key_values(run.config)) fields.emplace_back("train." + k, v);
  if (report) {
    for (const auto& [k, v] : to_key_values(*report)) fields.emplace_back("eval." + k, v);
  }
  return registry.append(std::move(fields));
}

}  // namespace hof
