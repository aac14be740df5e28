#include "request/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "request/error.hpp"
#include "request/random.hpp"

namespace request {

using nlohmann::json;

std::string surface(const Sentence& sentence, TokenSpan span) {
  std::string out;
  for (auto i = span.start; i < span.end && i < sentence.tokens.size(); ++i) {
    if (i != span.start) out += ' ';
    out += sentence.tokens[i].surface;
  }
  return out;
}

std::string_view to_string(Polarity p) {
  return p == Polarity::positive ? "positive" : "negative";
}

// ---------------------------------------------------------------------------
// TypeSet / SentenceStore

TypeSet::TypeSet() { intern(kNoneTypeName); }

TypeId TypeSet::intern(std::string_view name) {
  if (auto id = find(name)) return *id;
  const auto id = static_cast<TypeId>(types_.size());
  types_.push_back({id, std::string(name)});
  index_.emplace(std::string(name), id);
  return id;
}

std::optional<TypeId> TypeSet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& TypeSet::name(TypeId id) const {
  if (id >= types_.size()) throw IntegrityError("unknown relation type id " + std::to_string(id));
  return types_[id].name;
}

void SentenceStore::add(Sentence s) {
  if (index_.contains(s.id)) throw IntegrityError("duplicate sentence id '" + s.id + "'");
  index_.emplace(s.id, sentences_.size());
  sentences_.push_back(std::move(s));
}

const Sentence* SentenceStore::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &sentences_[it->second];
}

const Sentence& SentenceStore::at(std::string_view id) const {
  if (const auto* s = find(id)) return *s;
  throw IntegrityError("unresolved sentence id '" + std::string(id) + "'");
}

std::vector<std::string> QACorpus::empty_questions() const {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& a : answers) ++counts[a.question_id];
  std::vector<std::string> out;
  for (const auto& q : questions)
    if (!counts.contains(q.id)) out.push_back(q.id);
  return out;
}

// ---------------------------------------------------------------------------
// JSON record helpers

namespace {

struct LineContext {
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source, line, what); }
};

const json& field(const json& rec, const char* key, const LineContext& ctx) {
  auto it = rec.find(key);
  if (it == rec.end()) ctx.fail(std::string("missing field '") + key + "'");
  return *it;
}

std::string string_field(const json& rec, const char* key, const LineContext& ctx) {
  const auto& v = field(rec, key, ctx);
  if (!v.is_string()) ctx.fail(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::uint32_t index_value(const json& v, const char* key, const LineContext& ctx) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    ctx.fail(std::string("field '") + key + "' must be a non-negative integer");
  return static_cast<std::uint32_t>(v.get<long long>());
}

TokenSpan parse_span(const json& v, const LineContext& ctx) {
  if (!v.is_object()) ctx.fail("span must be an object");
  return {index_value(field(v, "start", ctx), "start", ctx),
          index_value(field(v, "end", ctx), "end", ctx)};
}

EntityMention parse_mention(const json& v, const std::string& sid, const LineContext& ctx) {
  EntityMention m;
  m.sentence_id = sid;
  m.span = parse_span(v, ctx);
  if (auto it = v.find("head"); it != v.end() && !it->is_null())
    m.head = index_value(*it, "head", ctx);
  else
    m.head = m.span.end > 0 ? m.span.end - 1 : 0;  // head-final default
  return m;
}

json span_json(TokenSpan s) { return {{"start", s.start}, {"end", s.end}}; }

json mention_json(const EntityMention& m) {
  return {{"start", m.span.start}, {"end", m.span.end}, {"head", m.head}};
}

Sentence parse_sentence(const json& rec, const LineContext& ctx) {
  Sentence s;
  s.id = string_field(rec, "id", ctx);
  const auto& toks = field(rec, "tokens", ctx);
  if (!toks.is_array()) ctx.fail("'tokens' must be an array");
  for (const auto& t : toks) {
    if (!t.is_object()) ctx.fail("token must be an object");
    Token tok;
    tok.surface = string_field(t, "t", ctx);
    if (auto it = t.find("pos"); it != t.end() && it->is_string()) tok.pos = it->get<std::string>();
    s.tokens.push_back(std::move(tok));
  }
  if (auto it = rec.find("mentions"); it != rec.end()) {
    if (!it->is_array()) ctx.fail("'mentions' must be an array");
    for (const auto& m : *it) s.mentions.push_back(parse_mention(m, s.id, ctx));
  }
  return s;
}

json sentence_json(const Sentence& s) {
  json toks = json::array();
  for (const auto& t : s.tokens) toks.push_back({{"t", t.surface}, {"pos", t.pos}});
  json rec = {{"id", s.id}, {"tokens", std::move(toks)}};
  if (!s.mentions.empty()) {
    json ms = json::array();
    for (const auto& m : s.mentions) ms.push_back(mention_json(m));
    rec["mentions"] = std::move(ms);
  }
  return rec;
}

void check_mention_in(const EntityMention& m, const Sentence& s, const std::string& owner) {
  const auto n = s.tokens.size();
  if (!(m.span.start < m.span.end && m.span.end <= n))
    throw IntegrityError(owner + ": span [" + std::to_string(m.span.start) + "," +
                         std::to_string(m.span.end) + ") out of bounds for sentence '" + s.id +
                         "' of length " + std::to_string(n));
  if (!(m.span.start <= m.head && m.head < m.span.end))
    throw IntegrityError(owner + ": head index outside its span");
}

void validate_sentence(const Sentence& s) {
  if (s.tokens.empty()) throw ValidationError("sentence '" + s.id + "' has no tokens");
  for (const auto& t : s.tokens)
    if (t.surface.empty()) throw ValidationError("sentence '" + s.id + "' has an empty token");
  for (const auto& m : s.mentions) check_mention_in(m, s, "sentence '" + s.id + "' mention");
}

template <typename Fn>
void for_each_record(std::string_view text, const std::string& source, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    LineContext ctx{source, line_no};
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      ctx.fail(std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) ctx.fail("record must be a JSON object");
    fn(rec, ctx);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
}

}  // namespace

// ---------------------------------------------------------------------------
// RE corpus

LabeledCorpus parse_re_corpus(std::string_view text, const std::string& source) {
  LabeledCorpus corpus;
  struct Pending {
    RelationMention mention;
    std::size_t line;
  };
  std::vector<Pending> pending;
  std::unordered_map<std::string, std::size_t> mention_ids;

  for_each_record(text, source, [&](const json& rec, const LineContext& ctx) {
    if (auto it = rec.find("relation_types"); it != rec.end()) {
      if (!it->is_array()) ctx.fail("'relation_types' must be an array");
      for (const auto& t : *it) {
        if (!t.is_string()) ctx.fail("relation type names must be strings");
        corpus.types.intern(t.get<std::string>());
      }
      return;
    }
    if (rec.contains("tokens")) {
      auto s = parse_sentence(rec, ctx);
      try {
        corpus.sentences.add(std::move(s));
      } catch (const IntegrityError& e) {
        throw IntegrityError(ctx.source + ":" + std::to_string(ctx.line) + ": " + e.what());
      }
      return;
    }
    RelationMention m;
    m.id = string_field(rec, "id", ctx);
    const auto sid = string_field(rec, "sid", ctx);
    m.m1 = parse_mention(field(rec, "em1", ctx), sid, ctx);
    m.m2 = parse_mention(field(rec, "em2", ctx), sid, ctx);
    bool negative = false;
    if (auto it = rec.find("neg"); it != rec.end()) {
      if (!it->is_boolean()) ctx.fail("'neg' must be a boolean");
      negative = it->get<bool>();
    }
    std::vector<std::string> names;
    if (auto it = rec.find("types"); it != rec.end()) {
      if (!it->is_array()) ctx.fail("'types' must be an array");
      for (const auto& t : *it) {
        if (!t.is_string()) ctx.fail("type names must be strings");
        names.push_back(t.get<std::string>());
      }
    }
    if (negative) {
      for (const auto& n : names)
        if (n != kNoneTypeName) ctx.fail("negative mention '" + m.id + "' carries target types");
      m.candidate_types = {kNoneType};
    } else {
      if (names.empty()) ctx.fail("linkable mention '" + m.id + "' has no candidate types");
      for (const auto& n : names) {
        if (n == kNoneTypeName) ctx.fail("linkable mention '" + m.id + "' lists None");
        m.candidate_types.push_back(corpus.types.intern(n));
      }
      std::sort(m.candidate_types.begin(), m.candidate_types.end());
      m.candidate_types.erase(std::unique(m.candidate_types.begin(), m.candidate_types.end()),
                              m.candidate_types.end());
    }
    if (!mention_ids.emplace(m.id, pending.size()).second)
      ctx.fail("duplicate mention id '" + m.id + "'");
    pending.push_back({std::move(m), ctx.line});
  });

  for (const auto& s : corpus.sentences.all()) validate_sentence(s);
  for (auto& p : pending) {
    const auto* s = corpus.sentences.find(p.mention.m1.sentence_id);
    if (!s)
      throw IntegrityError(source + ":" + std::to_string(p.line) + ": mention '" + p.mention.id +
                           "' references unknown sentence '" + p.mention.m1.sentence_id + "'");
    check_mention_in(p.mention.m1, *s, "mention '" + p.mention.id + "' em1");
    check_mention_in(p.mention.m2, *s, "mention '" + p.mention.id + "' em2");
    if (p.mention.m1.span == p.mention.m2.span)
      throw ValidationError("mention '" + p.mention.id + "' has identical entity spans");
    corpus.mentions.push_back(std::move(p.mention));
  }
  return corpus;
}

LabeledCorpus load_re_corpus(const std::filesystem::path& path) {
  return parse_re_corpus(read_file(path), path.string());
}

std::string serialize_re_corpus(const LabeledCorpus& corpus) {
  std::string out;
  json names = json::array();
  for (const auto& t : corpus.types.all()) names.push_back(t.name);
  out += json{{"relation_types", names}}.dump() + '\n';
  for (const auto& s : corpus.sentences.all()) out += sentence_json(s).dump() + '\n';
  for (const auto& m : corpus.mentions) {
    json types = json::array();
    if (!m.is_negative())
      for (auto t : m.candidate_types) types.push_back(corpus.types.name(t));
    json rec = {{"id", m.id},
                {"sid", m.m1.sentence_id},
                {"em1", mention_json(m.m1)},
                {"em2", mention_json(m.m2)},
                {"types", std::move(types)},
                {"neg", m.is_negative()}};
    out += rec.dump() + '\n';
  }
  return out;
}

void save_re_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path) {
  write_file(path, serialize_re_corpus(corpus));
}

// ---------------------------------------------------------------------------
// QA corpus

namespace {

Polarity parse_polarity(const json& rec, const LineContext& ctx) {
  const auto p = string_field(rec, "polarity", ctx);
  if (p == "positive") return Polarity::positive;
  if (p == "negative") return Polarity::negative;
  ctx.fail("polarity must be 'positive' or 'negative'");
}

}  // namespace

QACorpus parse_qa_corpus(std::string_view text, const std::string& source) {
  QACorpus corpus;
  std::unordered_map<std::string, std::size_t> question_ids;
  std::unordered_map<std::string, std::size_t> pair_ids;

  for_each_record(text, source, [&](const json& rec, const LineContext& ctx) {
    if (rec.contains("tokens")) {
      try {
        corpus.sentences.add(parse_sentence(rec, ctx));
      } catch (const IntegrityError& e) {
        throw IntegrityError(ctx.source + ":" + std::to_string(ctx.line) + ": " + e.what());
      }
      return;
    }
    const auto qid = string_field(rec, "qid", ctx);
    const auto sid = string_field(rec, "sid", ctx);
    if (rec.contains("pid")) {
      QAPair p;
      p.id = string_field(rec, "pid", ctx);
      p.question_id = qid;
      p.m1 = parse_mention(field(rec, "em1", ctx), sid, ctx);
      p.m2 = parse_mention(field(rec, "em2", ctx), sid, ctx);
      p.polarity = parse_polarity(rec, ctx);
      if (!pair_ids.emplace(p.id, corpus.pairs.size()).second)
        ctx.fail("duplicate pair id '" + p.id + "'");
      corpus.pairs.push_back(std::move(p));
    } else if (rec.contains("polarity")) {
      AnswerSentence a;
      a.question_id = qid;
      a.sentence_id = sid;
      a.polarity = parse_polarity(rec, ctx);
      if (auto it = rec.find("answer_span"); it != rec.end() && !it->is_null())
        a.answer_span = parse_span(*it, ctx);
      if (a.polarity == Polarity::positive && !a.answer_span)
        throw ValidationError(source + ":" + std::to_string(ctx.line) +
                              ": positive answer sentence without answer_span");
      if (a.polarity == Polarity::negative && a.answer_span)
        throw ValidationError(source + ":" + std::to_string(ctx.line) +
                              ": negative answer sentence carries an answer_span");
      corpus.answers.push_back(std::move(a));
    } else {
      Question q;
      q.id = qid;
      q.sentence_id = sid;
      if (auto it = rec.find("qent"); it != rec.end() && !it->is_null())
        q.question_entity = parse_mention(*it, sid, ctx);
      if (!question_ids.emplace(q.id, corpus.questions.size()).second)
        ctx.fail("duplicate question id '" + q.id + "'");
      corpus.questions.push_back(std::move(q));
    }
  });

  for (const auto& s : corpus.sentences.all()) validate_sentence(s);
  for (const auto& q : corpus.questions) {
    const auto& s = corpus.sentences.at(q.sentence_id);
    if (q.question_entity) check_mention_in(*q.question_entity, s, "question '" + q.id + "'");
  }
  for (const auto& a : corpus.answers) {
    if (!question_ids.contains(a.question_id))
      throw IntegrityError("answer references unknown question '" + a.question_id + "'");
    const auto& s = corpus.sentences.at(a.sentence_id);
    if (a.answer_span && !(a.answer_span->start < a.answer_span->end &&
                           a.answer_span->end <= s.tokens.size()))
      throw IntegrityError("answer span out of bounds in sentence '" + s.id + "'");
  }
  for (const auto& p : corpus.pairs) {
    if (!question_ids.contains(p.question_id))
      throw IntegrityError("pair '" + p.id + "' references unknown question '" + p.question_id +
                           "'");
    const auto& s = corpus.sentences.at(p.m1.sentence_id);
    check_mention_in(p.m1, s, "pair '" + p.id + "' em1");
    check_mention_in(p.m2, s, "pair '" + p.id + "' em2");
    if (p.m1.span == p.m2.span)
      throw ValidationError("pair '" + p.id + "' has identical entity spans");
  }
  return corpus;
}

QACorpus load_qa_corpus(const std::filesystem::path& path) {
  return parse_qa_corpus(read_file(path), path.string());
}

std::string serialize_qa_corpus(const QACorpus& corpus) {
  std::string out;
  for (const auto& s : corpus.sentences.all()) out += sentence_json(s).dump() + '\n';
  for (const auto& q : corpus.questions) {
    json rec = {{"qid", q.id}, {"sid", q.sentence_id}};
    if (q.question_entity) rec["qent"] = mention_json(*q.question_entity);
    out += rec.dump() + '\n';
  }
  for (const auto& a : corpus.answers) {
    json rec = {{"qid", a.question_id},
                {"sid", a.sentence_id},
                {"polarity", std::string(to_string(a.polarity))}};
    if (a.answer_span) rec["answer_span"] = span_json(*a.answer_span);
    out += rec.dump() + '\n';
  }
  for (const auto& p : corpus.pairs) {
    json rec = {{"pid", p.id},
                {"qid", p.question_id},
                {"sid", p.m1.sentence_id},
                {"em1", mention_json(p.m1)},
                {"em2", mention_json(p.m2)},
                {"polarity", std::string(to_string(p.polarity))}};
    out += rec.dump() + '\n';
  }
  return out;
}

void save_qa_corpus(const QACorpus& corpus, const std::filesystem::path& path) {
  write_file(path, serialize_qa_corpus(corpus));
}

// ---------------------------------------------------------------------------
// Negative mention sampling

namespace {

std::vector<std::size_t> choose_subset(std::size_t n, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw ContractViolation("negative sampling ratio must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + uniform_index(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::vector<RelationMention> sample_negative_mentions(std::span<const RelationMention> unlinkable,
                                                      double ratio, std::uint64_t seed) {
  std::vector<RelationMention> out;
  for (auto i : choose_subset(unlinkable.size(), ratio, seed)) {
    auto m = unlinkable[i];
    m.candidate_types = {kNoneType};
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<RelationMention> sample_negative_mentions(
    std::span<const std::pair<EntityMention, EntityMention>> unlinkable_pairs, double ratio,
    std::uint64_t seed) {
  std::vector<RelationMention> out;
  for (auto i : choose_subset(unlinkable_pairs.size(), ratio, seed)) {
    const auto& [a, b] = unlinkable_pairs[i];
    RelationMention m;
    m.id = "neg:" + a.sentence_id + ":" + std::to_string(a.span.start) + "-" +
           std::to_string(a.span.end) + ":" + std::to_string(b.span.start) + "-" +
           std::to_string(b.span.end);
    m.m1 = a;
    m.m2 = b;
    m.candidate_types = {kNoneType};
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace request
