#include <doctest.h>

#include "hof/error.hpp"
#include "hof/submission.hpp"
#include "support.hpp"

using namespace hof;
using testing_support::TempDir;

TEST_SUITE("submission") {

TEST_CASE("two records, exact format") {
  TempDir dir("sub");
  const std::vector<PredictionRecord> r{{"t1", Label::HOF, 0.9}, {"t2", Label::NOT, 0.1}};
  export_submission(r, dir / "s.tsv");
  CHECK(testing_support::slurp(dir / "s.tsv") == "t1\tHOF\nt2\tNOT\n");
}

TEST_CASE("order follows the expected ids") {
  TempDir dir("sub");
  const std::vector<PredictionRecord> r{{"b", Label::HOF, 0.9}, {"a", Label::NOT, 0.1}};
  const std::vector<std::string> ids{"a", "b"};
  export_submission(r, dir / "s.tsv", std::span<const std::string>(ids));
  CHECK(testing_support::slurp(dir / "s.tsv") == "a\tNOT\nb\tHOF\n");
}

TEST_CASE("missing prediction is refused") {
  TempDir dir("sub");
  const std::vector<PredictionRecord> r{{"t1", Label::HOF, 0.9}};
  const std::vector<std::string> ids{"t1", "t2"};
  try {
    export_submission(r, dir / "s.tsv", std::span<const std::string>(ids));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompletePredictions);
  }
  CHECK_FALSE(std::filesystem::exists(dir / "s.tsv"));
}

TEST_CASE("export then re-read gives the same labels") {
  TempDir dir("sub");
  std::vector<PredictionRecord> r;
  std::vector<std::string> ids;
  for (int i = 0; i < 30; ++i) {
    ids.push_back("id" + std::to_string(i));
    r.push_back({ids.back(), i % 3 ? Label::NOT : Label::HOF, 0.0});
  }
  export_submission(r, dir / "s.tsv");
  const auto back = read_predictions(dir / "s.tsv");
  CHECK(labels_for(back, ids) == labels_for(r, ids));

  write_predictions(r, dir / "p.tsv");
  CHECK(labels_for(read_predictions(dir / "p.tsv"), ids) == labels_for(r, ids));
  CHECK(testing_support::slurp(dir / "p.tsv").rfind("id\tlabel\tscore\n", 0) == 0);
}

TEST_CASE("labels_for rejects gaps and duplicates") {
  const std::vector<PredictionRecord> r{{"a", Label::HOF, 1}, {"a", Label::NOT, 0}};
  const std::vector<std::string> ids{"a"};
  CHECK_THROWS_AS(labels_for(r, ids), Error);
  const std::vector<PredictionRecord> one{{"a", Label::HOF, 1}};
  const std::vector<std::string> two{"a", "b"};
  try {
    labels_for(one, two);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompletePredictions);
  }
}

}  // TEST_SUITE
