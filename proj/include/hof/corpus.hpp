#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hof {

enum class Label { NOT = 0, HOF = 1 };

// HOF <-> 1, NOT <-> 0. The only place label spellings and integer codes
// are defined.
struct LabelCodec {
  static int encode(Label label) { return label == Label::HOF ? 1 : 0; }
  static Label decode(int code);
  static std::string_view name(Label label);
  static std::optional<Label> parse(std::string_view text);
};

enum class Language { bengali, assamese, gujarati, other };

std::string_view language_name(Language language);
std::optional<Language> parse_language(std::string_view name);

struct RawPost {
  std::string id;
  std::string text;
  std::optional<Label> label;
};

struct ColumnMapping {
  char delimiter = '\t';
  bool quoting = true;
  std::string id = "id";
  std::string text = "text";
  std::string label = "label";
  // When false a file without the label column loads as prediction-only.
  bool label_required = false;
};

struct Corpus {
  std::vector<RawPost> posts;
  // False for prediction-only corpora (test sets without gold labels).
  bool labeled = false;
  std::string source;
  std::vector<std::string> warnings;

  size_t size() const { return posts.size(); }
  bool empty() const { return posts.empty(); }
};

Corpus ingest(const std::filesystem::path& path, const ColumnMapping& schema);
Corpus ingest_text(std::string_view content, const ColumnMapping& schema,
                   std::string source = "<memory>");

std::vector<int> encode_labels(const Corpus& corpus);

struct CorpusStats {
  Language language = Language::other;
  size_t hof = 0;
  size_t not_offensive = 0;
  size_t unlabeled = 0;
  size_t total = 0;
};

CorpusStats stats(const Corpus& corpus, Language language = Language::other);

struct CorpusSplit {
  Corpus train;
  Corpus dev;
};

// Per-class dev counts are round(dev_fraction * class_size); both outputs
// keep the input order.
CorpusSplit stratified_split(const Corpus& corpus, double dev_fraction,
                             uint64_t seed);

}  // namespace hof
