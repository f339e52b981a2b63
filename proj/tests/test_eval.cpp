#include <doctest.h>

#include <cmath>

#include "brute_force_f1.hpp"
#include "hof/error.hpp"
#include "hof/eval.hpp"

using namespace hof;

namespace {

std::vector<int> bits(unsigned mask, size_t n) {
  std::vector<int> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = (mask >> i) & 1;
  return v;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("confusion cells") {
  const std::vector<int> gold{1, 0, 1, 0}, pred{1, 0, 0, 0};
  const ConfusionMatrix m = confusion(gold, pred);
  CHECK(m.at(1, 1) == 1);
  CHECK(m.at(1, 0) == 1);
  CHECK(m.at(0, 0) == 2);
  CHECK(m.at(0, 1) == 0);
  CHECK(m.total() == 4);

  const ConfusionMatrix same = confusion(gold, gold);
  CHECK(same.at(0, 1) == 0);
  CHECK(same.at(1, 0) == 0);

  const ConfusionMatrix empty = confusion(std::vector<int>{}, std::vector<int>{});
  CHECK(empty.total() == 0);
}

TEST_CASE("confusion errors") {
  const std::vector<int> a{0, 1}, b{0}, c{0, 2};
  CHECK_THROWS_AS(confusion(a, b), Error);
  try {
    confusion(a, b);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
  }
  try {
    confusion(a, c);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidLabelValue);
  }
  try {
    macro_f1(std::vector<int>{}, std::vector<int>{});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyInput);
  }
}

TEST_CASE("hand computed values") {
  CHECK(std::abs(macro_f1(std::vector<int>{0, 1}, std::vector<int>{0, 0}) - 1.0 / 3.0) < 1e-12);
  const std::vector<int> g{0, 1, 1, 0, 1};
  CHECK(macro_f1(g, g) == 1.0);
  CHECK(macro_f1(std::vector<int>{1}, std::vector<int>{1}) == 0.5);
}

TEST_CASE("balanced 100 with 90 correct per class") {
  std::vector<int> gold, pred;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 50; ++i) {
      gold.push_back(c);
      pred.push_back(i < 45 ? c : 1 - c);
    }
  }
  const EvalReport r = report(gold, pred);
  CHECK(r.accuracy == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(r.macro_f1 == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(r.n == 100);
  CHECK(r.per_class[1].support == 50);
}

TEST_CASE("all-HOF predictions on a skewed set") {
  std::vector<int> gold(1281, 0);
  std::fill(gold.begin(), gold.begin() + 515, 1);
  const std::vector<int> pred(gold.size(), 1);
  const EvalReport r = report(gold, pred);
  const double majority_accuracy = 766.0 / 1281.0;
  CHECK(r.macro_f1 < majority_accuracy);
  CHECK(r.per_class[0].f1 == 0.0);
  CHECK(r.per_class[1].recall == 1.0);
}

TEST_CASE("report is consistent") {
  const std::vector<int> gold{1, 1, 0, 0, 1, 0, 1}, pred{1, 0, 0, 1, 1, 0, 0};
  const EvalReport r = report(gold, pred);
  CHECK(r.macro_f1 == doctest::Approx((r.per_class[0].f1 + r.per_class[1].f1) / 2));
  CHECK(r.confusion.total() == r.n);
  const auto kv = to_key_values(r);
  bool found = false;
  for (const auto& [k, v] : kv) found |= (k == "macro_f1");
  CHECK(found);
  CHECK(format_report(r).find("macro_f1") != std::string::npos);
}

TEST_CASE("oracle equivalence, symmetry, bounds and monotonicity up to length 8") {
  for (size_t n = 1; n <= 8; ++n) {
    for (unsigned gm = 0; gm < (1u << n); ++gm) {
      const auto gold = bits(gm, n);
      const bool both = gm != 0 && gm != (1u << n) - 1;
      for (unsigned pm = 0; pm < (1u << n); ++pm) {
        const auto pred = bits(pm, n);
        const double f = macro_f1(gold, pred);
        REQUIRE(std::abs(f - oracle::brute_force_macro_f1(gold, pred)) <= 1e-12);
        REQUIRE(f >= 0.0);
        REQUIRE(f <= 1.0);
        const auto gflip = bits(~gm & ((1u << n) - 1), n);
        const auto pflip = bits(~pm & ((1u << n) - 1), n);
        REQUIRE(std::abs(macro_f1(gflip, pflip) - f) <= 1e-12);
        if (both) {
          REQUIRE((f == 1.0) == (gm == pm));
          for (size_t i = 0; i < n; ++i) {
            if (pred[i] == gold[i]) continue;
            auto fixed = pred;
            fixed[i] = gold[i];
            REQUIRE(macro_f1(gold, fixed) >= f - 1e-12);
          }
        }
      }
    }
  }
}

}  // TEST_SUITE
