#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hof/corpus.hpp"
#include "hof/rng.hpp"

namespace testing_support {

std::filesystem::path fixture(const std::string& name);

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& content);
std::string slurp(const std::filesystem::path& path);

// Random post-like UTF-8 text mixing Bengali, Gujarati, Latin, digits,
// punctuation, whitespace, URLs, mentions, hashtags and emoji sequences.
std::string random_post(hof::Rng& rng, size_t max_pieces = 12);

// A corpus file with the given per-label counts in shuffled order, or an
// unlabeled file when both are zero and `unlabeled` is set.
void write_synthetic_corpus(const std::filesystem::path& path,
                            const std::string& id_prefix, size_t hof,
                            size_t not_offensive, size_t unlabeled,
                            uint64_t seed);

// Runs the CLI in-process and captures its output.
struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};
CliResult run_cli(const std::vector<std::string>& args);

}  // namespace testing_support
