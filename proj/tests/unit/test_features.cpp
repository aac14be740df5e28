#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "request/error.hpp"
#include "request/features.hpp"

using namespace request;

namespace {

FeatureVector trump_features(const BrownClusterMap& brown = {}) {
  const auto s = fixtures::trump_sentence();
  return extract_features(s.mentions[0], s.mentions[1], s, brown, FeatureConfig{});
}

std::string between_pos(const FeatureVector& fv) {
  // BPOS features in sentence order are recoverable from the sentence itself
  const auto s = fixtures::trump_sentence();
  std::string out;
  for (std::size_t i = 4; i < 10; ++i) {
    if (fv.count("BPOS_" + s.tokens[i].pos) == 0) return "missing " + s.tokens[i].pos;
    out += (out.empty() ? "" : " ") + s.tokens[i].pos;
  }
  return out;
}

}  // namespace

TEST_CASE("example sentence reproduces the published feature values") {
  const auto fv = trump_features();
  CHECK(fv.count("HEAD_EM1_Trump") == 1);
  CHECK(fv.count("TKN_EM1_Donald") == 1);
  CHECK(between_pos(fv) == "VBZ DT JJ NN IN DT");
  CHECK(fv.count("BPOS_DT") == 2);
  CHECK(fv.count("EM1_BEFORE_EM2") == 1);
  CHECK(fv.count("EM_DISTANCE_6") == 1);
  CHECK(fv.count("PATTERN_NULL") == 1);
  CHECK(fv.count("NYC_native") == 1);
  CHECK(fv.count("native_Donald") == 1);
  for (const char* w : {"native", "is", "the", "."}) CHECK(fv.count(w) == 1);
}

TEST_CASE("example sentence full feature multiset") {
  const std::map<std::string, std::size_t> expected = {
      {"HEAD_EM1_Trump", 1}, {"HEAD_EM2_States", 1},
      {"TKN_EM1_Donald", 1}, {"TKN_EM1_Trump", 1}, {"TKN_EM2_United", 1}, {"TKN_EM2_States", 1},
      {"BETWEEN_is", 1}, {"BETWEEN_the", 2}, {"BETWEEN_current", 1}, {"BETWEEN_President", 1},
      {"BETWEEN_of", 1},
      {"BPOS_VBZ", 1}, {"BPOS_DT", 2}, {"BPOS_JJ", 1}, {"BPOS_NN", 1}, {"BPOS_IN", 1},
      {"NYC_native", 1}, {"native_Donald", 1}, {"Trump_is", 1}, {"is_the", 1}, {"the_current", 1},
      {"President_of", 1}, {"of_the", 1}, {"the_United", 1}, {"States_.", 1},
      {"EM1_BEFORE_EM2", 1}, {"EM_DISTANCE_6", 1},
      {"native", 1}, {"is", 1}, {"the", 1}, {".", 1},
      {"PATTERN_NULL", 1}};
  CHECK(trump_features().counts == expected);
}

TEST_CASE("swapping the mentions flips order features only") {
  const auto s = fixtures::trump_sentence();
  const auto fv = extract_features(s.mentions[1], s.mentions[0], s, {}, FeatureConfig{});
  CHECK(fv.count("EM2_BEFORE_EM1") == 1);
  CHECK(fv.count("EM1_BEFORE_EM2") == 0);
  CHECK(fv.count("HEAD_EM1_States") == 1);
  CHECK(fv.count("EM_DISTANCE_6") == 1);
}

TEST_CASE("nested mentions") {
  const auto s = fixtures::sentence("n", "the/DT University/NNP of/IN Oslo/NNP campus/NN",
                                    {{1, 4, 1}, {3, 4, 3}});
  const auto fv = extract_features(s.mentions[1], s.mentions[0], s, {}, FeatureConfig{});
  CHECK(fv.count("PATTERN_EM1_IN_EM2") == 1);
  CHECK(fv.count("EM_DISTANCE_0") == 1);
  const auto back = extract_features(s.mentions[0], s.mentions[1], s, {}, FeatureConfig{});
  CHECK(back.count("PATTERN_NULL") == 1);
}

TEST_CASE("brown cluster prefixes") {
  BrownClusterMap brown;
  brown.add("Donald", "0110101");
  brown.add("States", "1110001011110");
  const auto fv = trump_features(brown);
  CHECK(fv.count("4_0110") == 1);
  CHECK(fv.count("8_0110101") == 1);  // shorter than the prefix length
  CHECK(fv.count("12_0110101") == 1);
  CHECK(fv.count("4_1110") == 1);
  CHECK(fv.count("8_11100010") == 1);
  CHECK(fv.count("12_111000101111") == 1);
  CHECK(fv.total() == trump_features().total() + 6);
}

TEST_CASE("brown cluster file loading") {
  const auto dir = fixtures::temp_dir("brown");
  {
    std::ofstream(dir / "ok.txt") << "0110\tDonald\t12\n\n1110 States 3\n";
    std::ofstream(dir / "bad.txt") << "0110 Donald 1\n01x1 Trump 2\n";
  }
  const auto map = load_brown_clusters(dir / "ok.txt");
  CHECK(map.size() == 2);
  CHECK(*map.find("States") == "1110");
  CHECK(map.find("Trump") == nullptr);
  try {
    load_brown_clusters(dir / "bad.txt");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("window size bounds the bigrams") {
  const auto s = fixtures::trump_sentence();
  FeatureConfig cfg;
  cfg.window = 1;
  const auto fv = extract_features(s.mentions[0], s.mentions[1], s, {}, cfg);
  CHECK(fv.count("native_Donald") == 1);
  CHECK(fv.count("NYC_native") == 0);
  CHECK(fv.count("Trump_is") == 1);
  CHECK(fv.count("is_the") == 0);
}

TEST_CASE("whitespace in tokens is replaced") {
  auto s = fixtures::sentence("w", "New_York/NNP is/VBZ big/JJ", {{0, 1, 0}, {2, 3, 2}});
  s.tokens[0].surface = "New York";
  const auto fv = extract_features(s.mentions[0], s.mentions[1], s, {}, FeatureConfig{});
  CHECK(fv.count("HEAD_EM1_New_York") == 1);
}

TEST_CASE("invalid spans are rejected") {
  const auto s = fixtures::trump_sentence();
  CHECK_THROWS_AS(extract_features(s.mentions[0], s.mentions[0], s, {}, FeatureConfig{}),
                  ContractViolation);
  CHECK_THROWS_AS(extract_features(s.mentions[0], fixtures::mention("s1", 12, 14, 12), s, {},
                                   FeatureConfig{}),
                  ContractViolation);
  BrownClusterMap brown;
  CHECK_THROWS_AS(brown.add("x", "012"), ValidationError);
}

TEST_CASE("feature count is additive over random sentences") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + uniform_index(rng, 10);
    std::string tagged;
    for (std::size_t i = 0; i < n; ++i) tagged += "t" + std::to_string(uniform_index(rng, 4)) + "/NN ";
    const auto a = static_cast<std::uint32_t>(uniform_index(rng, n - 1));
    const auto b = static_cast<std::uint32_t>(a + 1 + uniform_index(rng, n - 1 - a));
    const auto s = fixtures::sentence("r", tagged, {{a, a + 1, a}, {b, b + 1, b}});
    const auto fv = extract_features(s.mentions[0], s.mentions[1], s, {}, FeatureConfig{});
    const std::size_t between = b - a - 1;
    CHECK(fv.count("EM_DISTANCE_" + std::to_string(between)) == 1);
    std::size_t bt = 0;
    for (const auto& [f, c] : fv.counts)
      if (f.rfind("BETWEEN_", 0) == 0) bt += c;
    CHECK(bt == between);
  }
}
