#include "request/synth.hpp"

#include <algorithm>
#include <array>

#include "request/error.hpp"
#include "request/random.hpp"

namespace request {

namespace {

constexpr std::array<const char*, 8> kTags = {"NN", "VBZ", "DT", "JJ", "IN", "NNS", "VBD", "RB"};
constexpr std::size_t kEntityNamePool = 400;

struct Layout {
  std::size_t per_type = 0;  // indicative words per type (and QA-only words per type)
  std::size_t background = 0;

  explicit Layout(const SynthConfig& c)
      : per_type(c.vocab_size / (4 * std::max<std::size_t>(c.num_types, 1))),
        background(c.vocab_size - 2 * per_type * c.num_types) {}

  std::size_t indicative(std::size_t type_index, std::size_t j) const {
    return type_index * per_type + j;
  }
  std::size_t qa_only(std::size_t type_index, std::size_t j, std::size_t num_types) const {
    return (num_types + type_index) * per_type + j;
  }
  std::size_t background_word(std::size_t j, std::size_t num_types) const {
    return 2 * num_types * per_type + j;
  }
};

Token word(std::size_t index) {
  return {"w" + std::to_string(index), kTags[(index * 2654435761u >> 7) % kTags.size()]};
}

std::vector<Token> entity(Rng& rng, bool qa) {
  const std::string first = qa ? "Qf" : "Fn";
  const std::string last = qa ? "Ql" : "Ln";
  return {{first + std::to_string(uniform_index(rng, kEntityNamePool)), "NNP"},
          {last + std::to_string(uniform_index(rng, kEntityNamePool)), "NNP"}};
}

class Builder {
 public:
  explicit Builder(std::string id) { s_.id = std::move(id); }

  void push(const Token& t) { s_.tokens.push_back(t); }
  void push(const std::vector<Token>& ts) {
    for (const auto& t : ts) push(t);
  }
  /// Appends tokens as an annotated entity mention and returns it.
  EntityMention mention(const std::vector<Token>& ts) {
    const auto start = static_cast<std::uint32_t>(s_.tokens.size());
    push(ts);
    const auto end = static_cast<std::uint32_t>(s_.tokens.size());
    EntityMention m{s_.id, {start, end}, end - 1};
    s_.mentions.push_back(m);
    return m;
  }
  Sentence finish() {
    push(Token{".", "."});
    return std::move(s_);
  }

 private:
  Sentence s_;
};

class Generator {
 public:
  explicit Generator(const SynthConfig& cfg) : cfg_(cfg), layout_(cfg), rng_(cfg.seed), noise_rng_(derive_seed(cfg.seed, "noise")) {}

  SynthCorpus run() {
    SynthCorpus out;
    for (std::size_t t = 0; t < cfg_.num_types; ++t) {
      const auto name = "type" + std::to_string(t + 1);
      out.train.types.intern(name);
      out.test.types.intern(name);
    }
    for (std::size_t i = 0; i < cfg_.num_mentions; ++i) {
      const auto truth = draw_truth();
      const bool prone = draw_style();
      auto m = relation_mention("train" + std::to_string(i), truth, out.train, prone);
      m.candidate_types = noisy_labels(truth, prone);
      out.train_true_types.push_back(truth);
      out.train.mentions.push_back(std::move(m));
    }
    for (std::size_t i = 0; i < cfg_.num_test_mentions; ++i) {
      const auto truth = draw_truth();
      auto m = relation_mention("test" + std::to_string(i), truth, out.test, draw_style());
      out.test.mentions.push_back(m);
      out.gold.push_back({m.id, out.test.types.name(truth), 0.0, 0});
    }
    for (std::size_t q = 0; q < cfg_.num_questions; ++q) question(q, out.qa);
    return out;
  }

 private:
  TypeId draw_truth() {
    if (uniform01(rng_) < cfg_.none_fraction) return kNoneType;
    return static_cast<TypeId>(1 + uniform_index(rng_, cfg_.num_types));
  }

  /// QA text comes from another source: with separate_qa_context its
  /// background words and entity names are disjoint from the RE corpus.
  Token background(bool qa = false) {
    const auto j = uniform_index(rng_, layout_.background);
    if (qa && cfg_.separate_qa_context) return word(cfg_.vocab_size + j);
    return word(layout_.background_word(j, cfg_.num_types));
  }
  std::vector<Token> entity_tokens(bool qa) { return entity(rng_, qa && cfg_.separate_qa_context); }

  /// Every stride-th indicative word of a type is noise-prone, so the
  /// noise-prone words are spread evenly over the QA-shared and RE-only parts.
  std::size_t noise_stride() const {
    return std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(1.0 / cfg_.noise_prone_fraction)));
  }

  /// A mention phrased in the noise-prone style draws all its indicative
  /// words from the noise-prone subset, otherwise from the rest.
  Token indicative(TypeId t, bool prone_style) {
    const auto stride = noise_stride();
    const auto prone = (layout_.per_type + stride - 1) / stride;
    std::size_t j = 0;
    if (cfg_.noise_prone_fraction <= 0.0) {
      j = uniform_index(rng_, layout_.per_type);
    } else if (prone_style) {
      j = stride * uniform_index(rng_, prone);
    } else {
      const auto clean = layout_.per_type - prone;
      const auto k = uniform_index(rng_, clean);
      j = k + k / (stride - 1) + 1;  // k-th index not divisible by stride
    }
    return word(layout_.indicative(t - 1, j));
  }

  bool draw_style() {
    return cfg_.noise_prone_fraction > 0.0 && uniform01(rng_) < cfg_.noise_prone_fraction;
  }

  /// QA-side word of type t: a qa_share fraction of the pool is shared with
  /// the RE indicative words, the rest is QA-only.
  Token qa_word(TypeId t) {
    const auto shared = static_cast<std::size_t>(
        std::llround(cfg_.qa_share * static_cast<double>(layout_.per_type)));
    const auto j = uniform_index(rng_, layout_.per_type);
    if (j < shared) return word(layout_.indicative(t - 1, j));
    return word(layout_.qa_only(t - 1, j, cfg_.num_types));
  }

  std::vector<Token> between_words(TypeId t, bool qa, bool prone_style = false) {
    const auto n = cfg_.features_per_mention;
    std::vector<Token> out;
    if (t != kNoneType) {
      const auto k = qa ? cfg_.qa_indicative_per_answer : cfg_.indicative_per_mention;
      for (std::size_t i = 0; i < k; ++i)
        out.push_back(qa ? qa_word(t) : indicative(t, prone_style));
    }
    while (out.size() < n) out.push_back(background(qa));
    for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[uniform_index(rng_, i)]);
    return out;
  }

  RelationMention relation_mention(const std::string& id, TypeId truth, LabeledCorpus& corpus,
                                   bool prone_style) {
    Builder b("s_" + id);
    b.push(background());
    const auto m1 = b.mention(entity_tokens(false));
    b.push(between_words(truth, false, prone_style));
    const auto m2 = b.mention(entity_tokens(false));
    b.push(background());
    corpus.sentences.add(b.finish());
    return RelationMention{id, m1, m2, {truth}};
  }

  /// A noise_concentration share of each rate is moved onto noise-prone
  /// mentions (capped at 1); clean mentions take the rest so the expected
  /// corpus-wide rate stays `rate`.
  double corruption_probability(double rate, bool prone) const {
    const double c = cfg_.noise_concentration;
    const double share = cfg_.noise_prone_fraction;
    if (share <= 0.0 || share >= 1.0) return rate;
    const double p_prone = std::min(1.0, rate * ((1.0 - c) + c / share));
    if (prone) return p_prone;
    return std::clamp((rate - share * p_prone) / (1.0 - share), 0.0, 1.0);
  }

  /// Distantly supervised candidate set of a mention whose true type is
  /// `truth`: relabeled None or given an extra wrong type. Draws come from a
  /// separate stream, so the noise rates never change the sentences.
  std::vector<TypeId> noisy_labels(TypeId truth, bool prone) {
    const double u_fn = uniform01(noise_rng_);
    const double u_fp = uniform01(noise_rng_);
    const auto wrong = static_cast<TypeId>(1 + uniform_index(noise_rng_, cfg_.num_types));
    if (truth == kNoneType) return {kNoneType};
    if (u_fn < corruption_probability(cfg_.fn_rate, prone)) return {kNoneType};
    if (u_fp < corruption_probability(cfg_.fp_rate, prone) && cfg_.num_types > 1) {
      const TypeId extra = wrong == truth ? (truth % cfg_.num_types) + 1 : wrong;
      return {std::min(truth, extra), std::max(truth, extra)};
    }
    return {truth};
  }

  void question(std::size_t index, QACorpus& qa) {
    const auto t = static_cast<TypeId>(1 + uniform_index(rng_, cfg_.num_types));
    const auto qid = "q" + std::to_string(index);
    const auto subject = entity_tokens(true);

    Builder qb("s_" + qid);
    qb.push(Token{"what", "WP"});
    qb.push(qa_word(t));
    qb.push(Token{"of", "IN"});
    qb.mention(subject);
    auto qsent = qb.finish();
    qsent.tokens.back() = {"?", "."};
    qa.sentences.add(std::move(qsent));
    qa.questions.push_back({qid, "s_" + qid, std::nullopt});

    for (std::size_t a = 0; a < cfg_.positives_per_question; ++a) {
      const auto sid = "s_" + qid + "_pos" + std::to_string(a);
      Builder b(sid);
      b.push(background(true));
      b.mention(subject);
      b.push(between_words(t, true));
      const auto answer = b.mention(entity_tokens(true));
      b.push(background(true));
      qa.sentences.add(b.finish());
      qa.answers.push_back({qid, Polarity::positive, sid, answer.span});
    }
    for (std::size_t a = 0; a < cfg_.negatives_per_question; ++a) {
      const auto sid = "s_" + qid + "_neg" + std::to_string(a);
      Builder b(sid);
      b.push(background(true));
      b.mention(subject);
      TypeId other = kNoneType;
      if (cfg_.num_types > 1 && uniform01(rng_) < cfg_.qa_other_relation_negatives) {
        other = static_cast<TypeId>(1 + uniform_index(rng_, cfg_.num_types - 1));
        if (other >= t) ++other;
      }
      b.push(between_words(other, true));
      b.mention(entity_tokens(true));
      b.push(background(true));
      b.push(background(true));
      b.mention(entity_tokens(true));
      qa.sentences.add(b.finish());
      qa.answers.push_back({qid, Polarity::negative, sid, std::nullopt});
    }
  }

  SynthConfig cfg_;
  Layout layout_;
  Rng rng_;
  Rng noise_rng_;
};

}  // namespace

void SynthConfig::validate() const {
  for (double r : {fp_rate, fn_rate, qa_share, none_fraction, noise_prone_fraction,
                   noise_concentration, qa_other_relation_negatives})
    if (!(r >= 0.0 && r <= 1.0)) throw ContractViolation("synthetic rates must lie in [0, 1]");
  if (num_types == 0) throw ContractViolation("need at least one relation type");
  if (indicative_per_mention == 0 || indicative_per_mention > features_per_mention)
    throw ContractViolation("indicative_per_mention must lie in [1, features_per_mention]");
  const Layout layout(*this);
  if (layout.per_type < 2 || layout.background < features_per_mention)
    throw ContractViolation("vocab_size " + std::to_string(vocab_size) + " is too small for " +
                            std::to_string(num_types) + " types");
}

SynthCorpus generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  return Generator(cfg).run();
}

}  // namespace request
