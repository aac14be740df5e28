#include "request/features.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "request/error.hpp"

namespace request {

std::size_t FeatureVector::total() const {
  std::size_t n = 0;
  for (const auto& [f, c] : counts) n += c;
  return n;
}

void BrownClusterMap::add(std::string token, std::string path) {
  if (path.empty() || path.find_first_not_of("01") != std::string::npos)
    throw ValidationError("brown cluster path '" + path + "' is not a bit-string");
  paths_.insert_or_assign(std::move(token), std::move(path));
}

const std::string* BrownClusterMap::find(std::string_view token) const {
  auto it = paths_.find(std::string(token));
  return it == paths_.end() ? nullptr : &it->second;
}

BrownClusterMap load_brown_clusters(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  BrownClusterMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string bits, token;
    if (!(ss >> bits)) continue;
    if (!(ss >> token)) throw ParseError(path.string(), line_no, "expected 'bitstring token'");
    try {
      map.add(std::move(token), std::move(bits));
    } catch (const ValidationError& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return map;
}

namespace {

std::string clean(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (std::isspace(static_cast<unsigned char>(c))) c = '_';
  return out;
}

void check_in_sentence(const EntityMention& m, const Sentence& s, const char* which) {
  const auto n = s.tokens.size();
  if (!(m.span.start < m.span.end && m.span.end <= n && m.head >= m.span.start &&
        m.head < m.span.end))
    throw ContractViolation(std::string(which) + " does not lie in sentence '" + s.id + "'");
}

void add_window_bigrams(const Sentence& s, TokenSpan span, std::size_t window, FeatureVector& fv) {
  const auto n = s.tokens.size();
  auto bigram = [&](std::size_t p) {
    fv.add(clean(s.tokens[p].surface) + "_" + clean(s.tokens[p + 1].surface));
  };
  const std::size_t left_from = span.start >= window ? span.start - window : 0;
  for (std::size_t p = left_from; p < span.start; ++p) bigram(p);
  for (std::size_t p = span.end - 1; p + 1 < n && p + 1 < span.end + window; ++p) bigram(p);
}

void add_context_unigrams(const Sentence& s, TokenSpan span, FeatureVector& fv) {
  if (span.start > 0) fv.add(clean(s.tokens[span.start - 1].surface));
  if (span.end < s.tokens.size()) fv.add(clean(s.tokens[span.end].surface));
}

}  // namespace

FeatureVector extract_features(const EntityMention& m1, const EntityMention& m2,
                               const Sentence& sentence, const BrownClusterMap& brown,
                               const FeatureConfig& cfg) {
  check_in_sentence(m1, sentence, "em1");
  check_in_sentence(m2, sentence, "em2");
  if (m1.span == m2.span) throw ContractViolation("entity mentions have identical spans");
  if (cfg.window < 1) throw ContractViolation("feature window must be at least 1");

  FeatureVector fv;
  const auto& toks = sentence.tokens;

  fv.add("HEAD_EM1_" + clean(toks[m1.head].surface));
  fv.add("HEAD_EM2_" + clean(toks[m2.head].surface));
  for (auto i = m1.span.start; i < m1.span.end; ++i) fv.add("TKN_EM1_" + clean(toks[i].surface));
  for (auto i = m2.span.start; i < m2.span.end; ++i) fv.add("TKN_EM2_" + clean(toks[i].surface));

  const bool m1_first = std::pair(m1.span.start, m1.span.end) < std::pair(m2.span.start, m2.span.end);
  const auto& first = m1_first ? m1.span : m2.span;
  const auto& second = m1_first ? m2.span : m1.span;
  std::size_t distance = 0;
  if (first.end <= second.start) {
    distance = second.start - first.end;
    for (auto i = first.end; i < second.start; ++i) {
      fv.add("BETWEEN_" + clean(toks[i].surface));
      if (!toks[i].pos.empty()) fv.add("BPOS_" + clean(toks[i].pos));
    }
  }

  add_window_bigrams(sentence, m1.span, cfg.window, fv);
  add_window_bigrams(sentence, m2.span, cfg.window, fv);

  fv.add(m1_first ? "EM1_BEFORE_EM2" : "EM2_BEFORE_EM1");
  fv.add("EM_DISTANCE_" + std::to_string(distance));

  add_context_unigrams(sentence, m1.span, fv);
  add_context_unigrams(sentence, m2.span, fv);

  fv.add(m2.span.contains(m1.span) ? "PATTERN_EM1_IN_EM2" : "PATTERN_NULL");

  if (brown.size() > 0) {
    for (const auto* span : {&m1.span, &m2.span})
      for (auto i = span->start; i < span->end; ++i) {
        const auto* path = brown.find(toks[i].surface);
        if (!path) continue;
        for (auto len : cfg.prefix_lengths)
          fv.add(std::to_string(len) + "_" + path->substr(0, std::min(len, path->size())));
      }
  }
  return fv;
}

}  // namespace request
