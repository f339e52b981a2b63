#include "hof/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "hof/delimited.hpp"
#include "hof/error.hpp"
#include "hof/rng.hpp"
#include "hof/unicode.hpp"

namespace hof {

Label LabelCodec::decode(int code) {
  if (code == 1) return Label::HOF;
  if (code == 0) return Label::NOT;
  throw Error(ErrorCode::InvalidLabelValue,
              "label code " + std::to_string(code) + " is not 0 or 1");
}

std::string_view LabelCodec::name(Label label) {
  return label == Label::HOF ? "HOF" : "NOT";
}

std::optional<Label> LabelCodec::parse(std::string_view text) {
  if (text == "HOF") return Label::HOF;
  if (text == "NOT") return Label::NOT;
  return std::nullopt;
}

std::string_view language_name(Language language) {
  switch (language) {
    case Language::bengali: return "bengali";
    case Language::assamese: return "assamese";
    case Language::gujarati: return "gujarati";
    case Language::other: return "other";
  }
  return "other";
}

std::optional<Language> parse_language(std::string_view name) {
  for (Language l : {Language::bengali, Language::assamese, Language::gujarati,
                     Language::other}) {
    if (language_name(l) == name) return l;
  }
  return std::nullopt;
}

namespace {

size_t find_column(const std::vector<std::string>& header,
                   const std::string& name, const std::string& source) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw Error(ErrorCode::MissingColumn,
                "column '" + name + "' not found in header of " + source);
  }
  return static_cast<size_t>(it - header.begin());
}

std::string where(const std::string& source, size_t line) {
  return source + " line " + std::to_string(line);
}

}  // namespace

Corpus ingest_text(std::string_view content, const ColumnMapping& schema,
                   std::string source) {
  const DelimitedTable table =
      parse_delimited(content, schema.delimiter, schema.quoting, true);

  const size_t id_col = find_column(table.header, schema.id, source);
  const size_t text_col = find_column(table.header, schema.text, source);
  std::optional<size_t> label_col;
  if (!schema.label.empty()) {
    auto it = std::find(table.header.begin(), table.header.end(), schema.label);
    if (it != table.header.end()) {
      label_col = static_cast<size_t>(it - table.header.begin());
    } else if (schema.label_required) {
      throw Error(ErrorCode::MissingColumn, "column '" + schema.label +
                                                "' not found in header of " +
                                                source);
    }
  } else if (schema.label_required) {
    throw Error(ErrorCode::MissingColumn,
                "schema requires labels but declares no label column");
  }

  Corpus corpus;
  corpus.source = std::move(source);
  std::unordered_set<std::string> seen;
  size_t with_label = 0;
  size_t without_label = 0;
  std::optional<size_t> first_unlabeled_line;
  std::optional<size_t> first_labeled_line;

  for (const DelimitedRow& row : table.rows) {
    if (row.fields.size() != table.header.size()) {
      throw Error(ErrorCode::MalformedRow,
                  where(corpus.source, row.line) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " +
                      std::to_string(row.fields.size()));
    }
    RawPost post;
    post.id = row.fields[id_col];
    post.text = row.fields[text_col];
    if (post.id.empty()) {
      throw Error(ErrorCode::MalformedRow,
                  where(corpus.source, row.line) + ": empty id");
    }
    if (!unicode::is_valid_utf8(post.id) || !unicode::is_valid_utf8(post.text)) {
      throw Error(ErrorCode::InvalidEncoding,
                  where(corpus.source, row.line) + ": text is not valid UTF-8");
    }
    if (!seen.insert(post.id).second) {
      throw Error(ErrorCode::DuplicateId, where(corpus.source, row.line) +
                                              ": id '" + post.id +
                                              "' already used");
    }
    if (label_col) {
      const std::string& cell = row.fields[*label_col];
      if (cell.empty()) {
        ++without_label;
        if (!first_unlabeled_line) first_unlabeled_line = row.line;
      } else {
        auto label = LabelCodec::parse(cell);
        if (!label) {
          throw Error(ErrorCode::InvalidLabel,
                      where(corpus.source, row.line) + ": label '" + cell +
                          "' is neither HOF nor NOT");
        }
        post.label = *label;
        ++with_label;
        if (!first_labeled_line) first_labeled_line = row.line;
      }
    }
    if (post.text.empty()) {
      std::string warning = where(corpus.source, row.line) + ": post '" +
                            post.id + "' has empty text";
      spdlog::warn("{}", warning);
      corpus.warnings.push_back(std::move(warning));
    }
    corpus.posts.push_back(std::move(post));
  }

  if (with_label > 0 && without_label > 0) {
    const size_t line = std::max(*first_unlabeled_line, *first_labeled_line);
    throw Error(ErrorCode::MixedLabeling,
                where(corpus.source, line) +
                    ": file mixes labeled and unlabeled rows");
  }
  if (schema.label_required && without_label > 0) {
    throw Error(ErrorCode::UnlabeledPost,
                where(corpus.source, *first_unlabeled_line) +
                    ": label missing");
  }
  corpus.labeled = with_label > 0 || (label_col && corpus.posts.empty());
  return corpus;
}

Corpus ingest(const std::filesystem::path& path, const ColumnMapping& schema) {
  return ingest_text(read_file(path), schema, path.string());
}

std::vector<int> encode_labels(const Corpus& corpus) {
  std::vector<int> codes;
  codes.reserve(corpus.size());
  for (size_t i = 0; i < corpus.posts.size(); ++i) {
    const RawPost& post = corpus.posts[i];
    if (!post.label) {
      throw Error(ErrorCode::UnlabeledPost,
                  "post '" + post.id + "' (index " + std::to_string(i) +
                      ") has no label");
    }
    codes.push_back(LabelCodec::encode(*post.label));
  }
  return codes;
}

CorpusStats stats(const Corpus& corpus, Language language) {
  CorpusStats s;
  s.language = language;
  for (const RawPost& post : corpus.posts) {
    if (!post.label) {
      ++s.unlabeled;
    } else if (*post.label == Label::HOF) {
      ++s.hof;
    } else {
      ++s.not_offensive;
    }
  }
  s.total = s.hof + s.not_offensive + s.unlabeled;
  return s;
}

CorpusSplit stratified_split(const Corpus& corpus, double dev_fraction,
                             uint64_t seed) {
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "dev_fraction must lie in [0, 1)");
  }
  std::vector<size_t> by_class[2];
  for (size_t i = 0; i < corpus.posts.size(); ++i) {
    const auto& label = corpus.posts[i].label;
    if (!label) {
      throw Error(ErrorCode::UnlabeledPost, "post '" + corpus.posts[i].id +
                                                "' has no label; cannot "
                                                "stratify");
    }
    by_class[LabelCodec::encode(*label)].push_back(i);
  }

  std::vector<bool> in_dev(corpus.size(), false);
  if (dev_fraction > 0.0) {
    Rng rng(seed);
    for (int c = 0; c < 2; ++c) {
      auto& members = by_class[c];
      const auto take = static_cast<size_t>(
          std::llround(dev_fraction * static_cast<double>(members.size())));
      if (take == 0) {
        throw Error(ErrorCode::InsufficientClassCount,
                    "class " + std::string(LabelCodec::name(LabelCodec::decode(c))) +
                        " has " + std::to_string(members.size()) +
                        " posts; dev fraction leaves none in dev");
      }
      rng.shuffle(std::span<size_t>(members));
      for (size_t k = 0; k < take; ++k) in_dev[members[k]] = true;
    }
  }

  CorpusSplit split;
  for (Corpus* part : {&split.train, &split.dev}) {
    part->labeled = corpus.labeled;
    part->source = corpus.source;
  }
  for (size_t i = 0; i < corpus.size(); ++i) {
    (in_dev[i] ? split.dev : split.train).posts.push_back(corpus.posts[i]);
  }
  return split;
}

}  // namespace hof
