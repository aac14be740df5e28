#include <doctest.h>

#include "request/error.hpp"
#include "request/eval.hpp"

using namespace request;

namespace {

std::vector<PredictionRecord> recs(std::initializer_list<std::pair<const char*, const char*>> items) {
  std::vector<PredictionRecord> out;
  for (auto [id, t] : items) out.push_back({id, t, 0.0, 0});
  return out;
}

}  // namespace

TEST_CASE("worked precision and recall") {
  // 4 non-None predictions, 3 correct, 5 non-None gold
  const auto gold = recs({{"a", "r1"}, {"b", "r1"}, {"c", "r2"}, {"d", "r2"}, {"e", "r3"}, {"f", "None"}});
  const auto pred = recs({{"a", "r1"}, {"b", "r1"}, {"c", "r2"}, {"d", "r1"}, {"e", "None"}, {"f", "None"}});
  const auto m = evaluate(pred, gold);
  CHECK(m.predicted == 4);
  CHECK(m.correct == 3);
  CHECK(m.gold == 5);
  CHECK(m.precision == doctest::Approx(0.75));
  CHECK(m.recall == doctest::Approx(0.6));
  CHECK(m.f1 == doctest::Approx(2 * 0.75 * 0.6 / 1.35));
  CHECK(m.per_type.at("r1").predicted == 3);
  CHECK(m.per_type.at("r1").correct == 2);
  CHECK(m.per_type.at("r2").recall() == doctest::Approx(0.5));
  CHECK(m.per_type.count("None") == 0);
}

TEST_CASE("order of records does not matter") {
  const auto gold = recs({{"a", "r1"}, {"b", "r2"}});
  const auto pred = recs({{"b", "r2"}, {"a", "None"}});
  const auto m = evaluate(pred, gold);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 0.5);
}

TEST_CASE("degenerate cases give zero") {
  const auto gold = recs({{"a", "None"}});
  const auto m = evaluate(recs({{"a", "None"}}), gold);
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);
}

TEST_CASE("mismatched mention sets are rejected") {
  const auto gold = recs({{"a", "r1"}, {"b", "r1"}});
  CHECK_THROWS_AS(evaluate(recs({{"a", "r1"}}), gold), IntegrityError);
  CHECK_THROWS_AS(evaluate(recs({{"a", "r1"}, {"c", "r1"}}), gold), IntegrityError);
  CHECK_THROWS_AS(evaluate(recs({{"a", "r1"}, {"a", "r1"}}), gold), IntegrityError);
  CHECK_THROWS_AS(evaluate(recs({{"a", "r1"}, {"b", "r1"}}), recs({{"a", "r1"}, {"a", "r1"}})),
                  IntegrityError);
}

TEST_CASE("f1 invariant over random reports") {
  Rng rng(1);
  const std::vector<const char*> types = {"None", "r1", "r2", "r3"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<PredictionRecord> gold, pred;
    const auto n = 1 + uniform_index(rng, 30);
    for (std::size_t i = 0; i < n; ++i) {
      const auto id = "m" + std::to_string(i);
      gold.push_back({id, types[uniform_index(rng, 4)], 0.0, 0});
      pred.push_back({id, types[uniform_index(rng, 4)], 0.0, 0});
    }
    const auto m = evaluate(pred, gold);
    CHECK(m.correct <= std::min(m.predicted, m.gold));
    if (m.precision + m.recall > 0)
      CHECK(m.f1 == doctest::Approx(2 * m.precision * m.recall / (m.precision + m.recall)));
    else
      CHECK(m.f1 == 0.0);
  }
}

TEST_CASE("report formats") {
  const auto gold = recs({{"a", "r1"}});
  const auto m = evaluate(recs({{"a", "r1"}}), gold);
  CHECK(m.to_json().find("\"f1\"") != std::string::npos);
  CHECK(m.to_table().find("r1") != std::string::npos);
}
