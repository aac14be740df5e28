#include "request/qa_pairs.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "request/error.hpp"
#include "request/random.hpp"

namespace request {

std::string PairGenReport::to_json() const {
  nlohmann::json j = {{"questions_processed", questions_processed},
                      {"questions_without_entity", questions_without_entity},
                      {"positive_sentences_dropped", positive_sentences_dropped},
                      {"pairs", {{"positive", positive_pairs}, {"negative", negative_pairs}}}};
  return j.dump(2);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

const std::string& head_surface(const EntityMention& m, const Sentence& s) {
  return s.tokens.at(m.head).surface;
}

}  // namespace

std::optional<EntityMention> detect_question_entity(const Question& q, const Sentence& sentence) {
  (void)q;
  const EntityMention* best = nullptr;
  for (const auto& m : sentence.mentions)
    if (!best || m.span.start > best->span.start) best = &m;
  if (!best) return std::nullopt;
  return *best;
}

std::optional<EntityMention> match_question_entity(const EntityMention& question_entity,
                                                   const Sentence& question_sentence,
                                                   const Sentence& answer_sentence) {
  const auto& qhead = head_surface(question_entity, question_sentence);
  const auto qsurface = surface(question_sentence, question_entity.span);
  const EntityMention* best = nullptr;
  std::size_t best_dist = 0;
  for (const auto& m : answer_sentence.mentions) {
    if (!iequals(head_surface(m, answer_sentence), qhead)) continue;
    const auto dist = levenshtein(surface(answer_sentence, m.span), qsurface);
    if (!best || dist < best_dist || (dist == best_dist && m.span.start < best->span.start)) {
      best = &m;
      best_dist = dist;
    }
  }
  if (!best) return std::nullopt;
  return *best;
}

std::optional<EntityMention> match_answer_entity(const AnswerSentence& answer,
                                                 const Sentence& answer_sentence) {
  if (answer.polarity != Polarity::positive || !answer.answer_span)
    throw ContractViolation("match_answer_entity requires a positive answer sentence");
  const auto target = surface(answer_sentence, *answer.answer_span);
  for (const auto& m : answer_sentence.mentions)
    if (surface(answer_sentence, m.span) == target) return m;
  return std::nullopt;
}

namespace {

/// Ordered mention pairs of a sentence, sampled uniformly without
/// replacement up to `cap`, returned in enumeration order.
std::vector<std::pair<const EntityMention*, const EntityMention*>> sample_ordered_pairs(
    const Sentence& s, std::size_t cap, Rng& rng, const EntityMention* exclude_m1,
    const EntityMention* exclude_m2) {
  std::vector<std::pair<const EntityMention*, const EntityMention*>> all;
  for (const auto& a : s.mentions)
    for (const auto& b : s.mentions) {
      if (&a == &b || a.span == b.span) continue;
      if (exclude_m1 && a.span == exclude_m1->span && b.span == exclude_m2->span) continue;
      all.emplace_back(&a, &b);
    }
  const auto k = std::min(cap, all.size());
  std::vector<std::size_t> idx(all.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_index(rng, idx.size() - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<std::pair<const EntityMention*, const EntityMention*>> out;
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

}  // namespace

QACorpus generate_pairs(const QACorpus& corpus, const PairGenConfig& cfg, PairGenReport* report) {
  if (cfg.neg_pairs_per_sentence < 1)
    throw ContractViolation("neg_pairs_per_sentence must be at least 1");
  QACorpus out;
  out.sentences = corpus.sentences;
  out.answers = corpus.answers;
  PairGenReport rep;

  std::unordered_map<std::string, std::vector<std::size_t>> answers_by_question;
  for (std::size_t i = 0; i < corpus.answers.size(); ++i)
    answers_by_question[corpus.answers[i].question_id].push_back(i);

  for (const auto& q_in : corpus.questions) {
    auto q = q_in;
    ++rep.questions_processed;
    const auto& qsent = corpus.sentences.at(q.sentence_id);
    if (!q.question_entity) q.question_entity = detect_question_entity(q, qsent);
    out.questions.push_back(q);
    if (!q.question_entity) {
      ++rep.questions_without_entity;
      continue;
    }
    auto it = answers_by_question.find(q.id);
    if (it == answers_by_question.end()) continue;

    for (auto ai : it->second) {
      const auto& a = corpus.answers[ai];
      const auto& asent = corpus.sentences.at(a.sentence_id);
      const auto base = q.id + ":a" + std::to_string(ai);
      Rng rng(derive_seed(cfg.seed, base));
      std::optional<EntityMention> m1, m2;
      if (a.polarity == Polarity::positive) {
        m1 = match_question_entity(*q.question_entity, qsent, asent);
        m2 = match_answer_entity(a, asent);
        if (m1 && m2 && m1->span != m2->span) {
          out.pairs.push_back({base + ":pos", q.id, *m1, *m2, Polarity::positive});
          ++rep.positive_pairs;
        } else {
          ++rep.positive_sentences_dropped;
          m1.reset();
          m2.reset();
        }
        if (!cfg.sample_negatives_from_positives) continue;
      }
      const bool have_pos = m1.has_value();
      auto sampled = sample_ordered_pairs(asent, cfg.neg_pairs_per_sentence, rng,
                                          have_pos ? &*m1 : nullptr, have_pos ? &*m2 : nullptr);
      for (std::size_t k = 0; k < sampled.size(); ++k) {
        out.pairs.push_back({base + ":neg" + std::to_string(k), q.id, *sampled[k].first,
                             *sampled[k].second, Polarity::negative});
        ++rep.negative_pairs;
      }
    }
  }
  if (report) *report = rep;
  return out;
}

}  // namespace request
