#include "hof/submission.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include <fmt/format.h>

#include "hof/delimited.hpp"
#include "hof/error.hpp"

namespace hof {

std::vector<PredictionRecord> predict(const ClassifierModel& model,
                                      const NormalizedCorpus& corpus,
                                      size_t batch_size) {
  std::vector<PredictionRecord> out;
  out.reserve(corpus.size());
  batch_size = std::max<size_t>(batch_size, 1);
  for (size_t start = 0; start < corpus.size(); start += batch_size) {
    const size_t end = std::min(corpus.size(), start + batch_size);
    std::vector<TokenSequence> batch;
    for (size_t i = start; i < end; ++i) batch.push_back(model.encode(corpus.posts[i].text));
    const Matrix probs = softmax_rows(model.forward(batch));
    for (size_t i = start; i < end; ++i) {
      const double p_hof = probs(static_cast<Eigen::Index>(i - start), 1);
      out.push_back({corpus.posts[i].id, p_hof >= 0.5 ? Label::HOF : Label::NOT, p_hof});
    }
  }
  return out;
}

void write_predictions(std::span<const PredictionRecord> records,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_delimited_row(out, {"id", "label", "score"}, '\t');
  for (const PredictionRecord& r : records) {
    write_delimited_row(out, {r.id, std::string(LabelCodec::name(r.label)),
                              fmt::format("{:.6f}", r.score)},
                        '\t');
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  const DelimitedTable table = read_delimited(path, '\t', true, false);
  std::vector<PredictionRecord> out;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const DelimitedRow& row = table.rows[r];
    if (r == 0 && !row.fields.empty() && row.fields[0] == "id") continue;
    if (row.fields.size() < 2 || row.fields.size() > 3) {
      throw Error(ErrorCode::MalformedRow,
                  path.string() + " line " + std::to_string(row.line) +
                      ": expected id, label[, score]");
    }
    const auto label = LabelCodec::parse(row.fields[1]);
    if (!label) {
      throw Error(ErrorCode::InvalidLabel, path.string() + " line " +
                                               std::to_string(row.line) +
                                               ": label '" + row.fields[1] + "'");
    }
    PredictionRecord rec{row.fields[0], *label, *label == Label::HOF ? 1.0 : 0.0};
    if (row.fields.size() == 3) {
      try {
        rec.score = std::stod(row.fields[2]);
      } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedRow, path.string() + " line " +
                                                 std::to_string(row.line) +
                                                 ": bad score");
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<int> labels_for(std::span<const PredictionRecord> records,
                            std::span<const std::string> ids) {
  std::unordered_map<std::string_view, const PredictionRecord*> by_id;
  for (const PredictionRecord& r : records) {
    if (!by_id.emplace(r.id, &r).second) {
      throw Error(ErrorCode::DuplicateId, "two predictions for id '" + r.id + "'");
    }
  }
  std::vector<int> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::IncompletePredictions, "no prediction for id '" + id + "'");
    }
    out.push_back(LabelCodec::encode(it->second->label));
  }
  if (by_id.size() != ids.size()) {
    throw Error(ErrorCode::IncompletePredictions,
                fmt::format("{} predictions for {} posts", by_id.size(), ids.size()));
  }
  return out;
}

void export_submission(std::span<const PredictionRecord> records,
                       const std::filesystem::path& path,
                       std::optional<std::span<const std::string>> expected_ids) {
  std::vector<const PredictionRecord*> ordered;
  if (expected_ids) {
    const std::vector<int> labels = labels_for(records, *expected_ids);
    std::unordered_map<std::string_view, const PredictionRecord*> by_id;
    for (const PredictionRecord& r : records) by_id.emplace(r.id, &r);
    for (const std::string& id : *expected_ids) ordered.push_back(by_id.at(id));
  } else {
    for (const PredictionRecord& r : records) ordered.push_back(&r);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  for (const PredictionRecord* r : ordered) {
    if (r->id.find_first_of("\t\n\r") != std::string::npos) {
      throw Error(ErrorCode::IoFailure, "id '" + r->id + "' cannot be written in submission format");
    }
    out << r->id << '\t' << LabelCodec::name(r->label) << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace hof
