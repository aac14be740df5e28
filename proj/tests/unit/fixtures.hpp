#pragma once

// Small hand-built corpora shared by the test binaries.

#include <array>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "request/corpus.hpp"
#include "request/graph.hpp"
#include "request/random.hpp"

namespace fixtures {

using namespace request;

// "word/TAG word/TAG ..." with mentions given as {start, end, head}.
inline Sentence sentence(const std::string& id, const std::string& tagged,
                         std::vector<std::array<std::uint32_t, 3>> mentions = {}) {
  Sentence s;
  s.id = id;
  std::istringstream in(tagged);
  std::string item;
  while (in >> item) {
    const auto slash = item.rfind('/');
    s.tokens.push_back({item.substr(0, slash), item.substr(slash + 1)});
  }
  for (const auto& m : mentions) s.mentions.push_back({id, {m[0], m[1]}, m[2]});
  return s;
}

inline EntityMention mention(const std::string& sid, std::uint32_t start, std::uint32_t end,
                             std::uint32_t head) {
  return {sid, {start, end}, head};
}

// "NYC native Donald Trump is the current President of the United States ."
inline Sentence trump_sentence() {
  return sentence("s1",
                  "NYC/NNP native/JJ Donald/NNP Trump/NNP is/VBZ the/DT current/JJ "
                  "President/NN of/IN the/DT United/NNP States/NNP ./.",
                  {{2, 4, 3}, {10, 12, 11}});
}

// Two questions. q1 has one usable positive, one positive whose answer string
// is not an annotated mention, and a negative sentence with three mentions.
// q2 has a positive where the question entity must be chosen by edit distance
// and a negative sentence with two mentions.
inline QACorpus two_question_corpus() {
  QACorpus qa;
  qa.sentences.add(sentence("q1", "Who/WP is/VBZ the/DT president/NN of/IN United/NNP States/NNP ?/.",
                            {{5, 7, 6}}));
  qa.sentences.add(sentence("a1",
                            "Donald/NNP Trump/NNP is/VBZ the/DT president/NN of/IN the/DT "
                            "United/NNP States/NNP ./.",
                            {{0, 2, 1}, {7, 9, 8}}));
  qa.sentences.add(sentence("a2", "The/DT new/JJ President/NNP Trump/NNP spoke/VBD in/IN States/NNP ./.",
                            {{2, 4, 3}, {6, 7, 6}}));
  qa.sentences.add(sentence("a3", "Barack/NNP Obama/NNP met/VBD Angela/NNP Merkel/NNP in/IN Berlin/NNP ./.",
                            {{0, 2, 1}, {3, 5, 4}, {6, 7, 6}}));
  qa.sentences.add(sentence("q2", "Where/WRB was/VBD Barack/NNP Obama/NNP born/VBN ?/.", {{2, 4, 3}}));
  qa.sentences.add(sentence("b1", "Obama/NNP met/VBD Barak/NNP Obama/NNP in/IN Hawaii/NNP ./.",
                            {{0, 1, 0}, {2, 4, 3}, {5, 6, 5}}));
  qa.sentences.add(sentence("b2", "Obama/NNP visited/VBD Paris/NNP ./.", {{0, 1, 0}, {2, 3, 2}}));

  qa.questions.push_back({"q1", "q1", std::nullopt});
  qa.questions.push_back({"q2", "q2", std::nullopt});
  qa.answers.push_back({"q1", Polarity::positive, "a1", TokenSpan{0, 2}});
  qa.answers.push_back({"q1", Polarity::positive, "a2", TokenSpan{3, 4}});  // "Trump" alone
  qa.answers.push_back({"q1", Polarity::negative, "a3", std::nullopt});
  qa.answers.push_back({"q2", Polarity::positive, "b1", TokenSpan{5, 6}});
  qa.answers.push_back({"q2", Polarity::negative, "b2", std::nullopt});
  return qa;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("request_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Random well-formed labeled corpus for round-trip properties.
inline LabeledCorpus random_corpus(std::uint64_t seed) {
  Rng rng(seed);
  LabeledCorpus c;
  const std::size_t num_types = 1 + uniform_index(rng, 5);
  for (std::size_t t = 0; t < num_types; ++t) c.types.intern("rel/" + std::to_string(t));
  const std::vector<std::string> words = {"a", "b c", "\"q\"", "ü", "x\\y", "., ", "tab\there"};
  const std::size_t n_sent = 1 + uniform_index(rng, 6);
  for (std::size_t s = 0; s < n_sent; ++s) {
    Sentence sent;
    sent.id = "s" + std::to_string(s);
    const std::size_t len = 2 + uniform_index(rng, 8);
    for (std::size_t i = 0; i < len; ++i)
      sent.tokens.push_back({words[uniform_index(rng, words.size())], uniform_index(rng, 2) ? "NN" : ""});
    c.sentences.add(sent);
    const std::size_t n_m = uniform_index(rng, 4);
    for (std::size_t k = 0; k < n_m; ++k) {
      const auto a = static_cast<std::uint32_t>(uniform_index(rng, len - 1));
      const auto b = static_cast<std::uint32_t>(a + 1 + uniform_index(rng, len - 1 - a));
      RelationMention m;
      m.id = sent.id + "_m" + std::to_string(k);
      m.m1 = {sent.id, {a, a + 1}, a};
      m.m2 = {sent.id, {b, b + 1}, b};
      if (uniform_index(rng, 3) == 0) {
        m.candidate_types = {kNoneType};
      } else {
        for (TypeId t = 1; t <= num_types; ++t)
          if (uniform_index(rng, 2) && m.candidate_types.size() + 1 < num_types + 1)
            m.candidate_types.push_back(t);
        if (m.candidate_types.empty()) m.candidate_types.push_back(1);
      }
      c.mentions.push_back(m);
    }
  }
  return c;
}

}  // namespace fixtures
