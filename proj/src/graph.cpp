#include "request/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "request/error.hpp"

namespace request {

FeatureVocabulary::FeatureVocabulary(std::vector<std::string> strings,
                                     std::vector<std::uint8_t> flags,
                                     std::vector<std::uint32_t> d_f_re,
                                     std::vector<std::uint32_t> d_f_qa)
    : strings_(std::move(strings)),
      flags_(std::move(flags)),
      d_f_re_(std::move(d_f_re)),
      d_f_qa_(std::move(d_f_qa)) {
  const auto n = strings_.size();
  if (flags_.size() != n || d_f_re_.size() != n || d_f_qa_.size() != n)
    throw ContractViolation("vocabulary columns differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !(strings_[i - 1] < strings_[i]))
      throw ValidationError("vocabulary is not sorted and unique at '" + strings_[i] + "'");
    index_.emplace(strings_[i], static_cast<FeatureId>(i));
  }
}

std::optional<FeatureId> FeatureVocabulary::find(std::string_view feature) const {
  auto it = index_.find(std::string(feature));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureVocabulary::num_re() const {
  return std::count_if(flags_.begin(), flags_.end(), [](auto f) { return f & kInRe; });
}
std::size_t FeatureVocabulary::num_qa() const {
  return std::count_if(flags_.begin(), flags_.end(), [](auto f) { return f & kInQa; });
}
std::size_t FeatureVocabulary::num_shared() const {
  return std::count_if(flags_.begin(), flags_.end(),
                       [](auto f) { return (f & kInRe) && (f & kInQa); });
}

std::uint64_t EdgeList::total_weight() const {
  std::uint64_t w = 0;
  for (const auto& e : edges) w += e.weight;
  return w;
}

namespace {

NoiseDistribution make_noise(const FeatureVocabulary& vocab, bool re_side) {
  NoiseDistribution nd;
  std::vector<double> weights;
  for (FeatureId f = 0; f < vocab.size(); ++f) {
    const auto d = re_side ? vocab.d_f_re(f) : vocab.d_f_qa(f);
    if (d == 0) continue;
    nd.features.push_back(f);
    weights.push_back(std::pow(static_cast<double>(d), NoiseDistribution::kExponent));
  }
  if (!weights.empty()) nd.table = AliasTable(weights);
  return nd;
}

AliasTable make_edge_table(const EdgeList& edges) {
  if (edges.empty()) return {};
  std::vector<double> w;
  w.reserve(edges.size());
  for (const auto& e : edges.edges) w.push_back(static_cast<double>(e.weight));
  return AliasTable(w);
}

}  // namespace

void HeterogeneousGraph::rebuild_samplers() {
  noise_re = make_noise(vocab, true);
  noise_qa = make_noise(vocab, false);
  edge_table_re = make_edge_table(re_edges);
  edge_table_qa = make_edge_table(qa_edges);
}

HeterogeneousGraph assemble_graph(const GraphInputs& in) {
  if (in.mention_features.empty()) throw ValidationError("relation-extraction corpus is empty");
  if (in.mention_ids.size() != in.mention_features.size() ||
      in.mention_candidates.size() != in.mention_features.size() ||
      in.pair_ids.size() != in.pair_features.size() ||
      in.pair_polarity.size() != in.pair_features.size() ||
      in.pair_questions.size() != in.pair_features.size())
    throw ContractViolation("graph inputs differ in length");

  std::map<std::string, std::pair<std::uint32_t, std::uint32_t>> df;  // (re, qa)
  for (const auto& fv : in.mention_features)
    for (const auto& [f, c] : fv.counts) ++df[f].first;
  for (const auto& fv : in.pair_features)
    for (const auto& [f, c] : fv.counts) ++df[f].second;

  std::vector<std::string> strings;
  std::vector<std::uint8_t> flags;
  std::vector<std::uint32_t> d_re, d_qa;
  strings.reserve(df.size());
  for (auto& [f, counts] : df) {
    strings.push_back(f);
    flags.push_back(static_cast<std::uint8_t>((counts.first ? FeatureVocabulary::kInRe : 0) |
                                              (counts.second ? FeatureVocabulary::kInQa : 0)));
    d_re.push_back(counts.first);
    d_qa.push_back(counts.second);
  }

  HeterogeneousGraph g;
  g.vocab = FeatureVocabulary(std::move(strings), std::move(flags), std::move(d_re),
                              std::move(d_qa));
  g.types = in.types;
  g.feature_config = in.feature_config;
  g.mention_ids = in.mention_ids;
  g.mention_candidates = in.mention_candidates;
  g.pair_ids = in.pair_ids;
  g.pair_polarity = in.pair_polarity;

  auto add_edges = [&g](const std::vector<FeatureVector>& objs, EdgeList& out) {
    for (std::uint32_t i = 0; i < objs.size(); ++i)
      for (const auto& [f, c] : objs[i].counts)  // map order == id order
        out.edges.push_back({i, *g.vocab.find(f), static_cast<std::uint32_t>(c)});
  };
  add_edges(in.mention_features, g.re_edges);
  add_edges(in.pair_features, g.qa_edges);

  for (const auto& cands : g.mention_candidates) {
    if (cands.empty()) throw ValidationError("mention without candidate types");
    for (auto t : cands)
      if (t >= g.types.size()) throw IntegrityError("candidate type id out of range");
    if (cands.size() == g.types.size())
      throw ValidationError("candidate set covers every type; the hinge has no non-candidate");
  }

  std::unordered_map<std::string, std::size_t> group_index;
  for (const auto& q : in.question_ids) {
    group_index.emplace(q, g.question_groups.size());
    g.question_groups.push_back({q, {}, {}});
  }
  for (std::uint32_t k = 0; k < in.pair_questions.size(); ++k) {
    auto it = group_index.find(in.pair_questions[k]);
    if (it == group_index.end())
      throw IntegrityError("pair '" + in.pair_ids[k] + "' references unknown question");
    auto& grp = g.question_groups[it->second];
    (in.pair_polarity[k] == Polarity::positive ? grp.positives : grp.negatives).push_back(k);
  }

  g.rebuild_samplers();
  return g;
}

HeterogeneousGraph build_graph(const LabeledCorpus& re, const QACorpus& qa,
                               const FeatureConfig& cfg, const BrownClusterMap& brown) {
  GraphInputs in;
  in.types = re.types;
  in.feature_config = cfg;
  for (const auto& m : re.mentions) {
    in.mention_ids.push_back(m.id);
    in.mention_features.push_back(
        extract_features(m.m1, m.m2, re.sentences.at(m.m1.sentence_id), brown, cfg));
    in.mention_candidates.push_back(m.candidate_types);
  }
  for (const auto& p : qa.pairs) {
    in.pair_ids.push_back(p.id);
    in.pair_features.push_back(
        extract_features(p.m1, p.m2, qa.sentences.at(p.m1.sentence_id), brown, cfg));
    in.pair_polarity.push_back(p.polarity);
    in.pair_questions.push_back(p.question_id);
  }
  for (const auto& q : qa.questions) in.question_ids.push_back(q.id);
  return assemble_graph(in);
}

// ---------------------------------------------------------------------------
// Shared-feature statistics

namespace {
double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

double SharedFeatureStats::re_distinct() const { return ratio(shared, re_distinct_total); }
double SharedFeatureStats::re_occurrence() const { return ratio(re_shared_weight, re_total_weight); }
double SharedFeatureStats::qa_distinct() const { return ratio(shared, qa_distinct_total); }
double SharedFeatureStats::qa_occurrence() const { return ratio(qa_shared_weight, qa_total_weight); }

std::string SharedFeatureStats::to_json() const {
  nlohmann::json j = {
      {"shared_features", shared},
      {"re", {{"distinct_features", re_distinct_total},
              {"distinct_shared_pct", 100.0 * re_distinct()},
              {"occurrences", re_total_weight},
              {"occurrence_shared_pct", 100.0 * re_occurrence()}}},
      {"qa", {{"distinct_features", qa_distinct_total},
              {"distinct_shared_pct", 100.0 * qa_distinct()},
              {"occurrences", qa_total_weight},
              {"occurrence_shared_pct", 100.0 * qa_occurrence()}}}};
  return j.dump(2);
}

SharedFeatureStats shared_feature_stats(const HeterogeneousGraph& g) {
  SharedFeatureStats s;
  s.shared = g.vocab.num_shared();
  s.re_distinct_total = g.vocab.num_re();
  s.qa_distinct_total = g.vocab.num_qa();
  for (const auto& e : g.re_edges.edges) {
    s.re_total_weight += e.weight;
    if (g.vocab.shared(e.feature)) s.re_shared_weight += e.weight;
  }
  for (const auto& e : g.qa_edges.edges) {
    s.qa_total_weight += e.weight;
    if (g.vocab.shared(e.feature)) s.qa_shared_weight += e.weight;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open '" + p.string() + "'");
  return in;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto t = line.find('\t', pos);
    out.push_back(line.substr(pos, t == std::string::npos ? std::string::npos : t - pos));
    if (t == std::string::npos) break;
    pos = t + 1;
  }
  return out;
}

std::string join_ids(const std::vector<std::uint32_t>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(ids[i]);
  }
  return s;
}

std::vector<std::uint32_t> parse_ids(const std::string& s) {
  std::vector<std::uint32_t> out;
  if (s.empty() || s == "-") return out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
  return out;
}

/// Reads the "# key=value ..." header line into a map.
std::map<std::string, std::string> read_header(std::istream& in, const std::filesystem::path& p) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw ParseError(p.string(), 1, "missing header line");
  std::map<std::string, std::string> kv;
  std::istringstream ss(line.substr(2));
  std::string tok;
  while (ss >> tok) {
    auto eq = tok.find('=');
    if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

std::size_t header_count(const std::map<std::string, std::string>& h, const std::string& key,
                         const std::filesystem::path& p) {
  auto it = h.find(key);
  if (it == h.end()) throw ParseError(p.string(), 1, "header lacks '" + key + "'");
  return std::stoull(it->second);
}

template <typename Fn>
void for_each_row(std::istream& in, const std::filesystem::path& p, std::size_t expected_cols,
                  Fn&& fn) {
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != expected_cols)
      throw ParseError(p.string(), line_no,
                       "expected " + std::to_string(expected_cols) + " columns");
    try {
      fn(cols);
    } catch (const std::logic_error& e) {
      throw ParseError(p.string(), line_no, e.what());
    }
  }
}

void save_edges(const EdgeList& edges, std::size_t objects, const std::string& name,
                const std::filesystem::path& p) {
  auto out = open_out(p);
  out << "# " << name << " objects=" << objects << " edges=" << edges.size()
      << " total_weight=" << edges.total_weight() << " columns=object,feature,weight\n";
  for (const auto& e : edges.edges) out << e.object << '\t' << e.feature << '\t' << e.weight << '\n';
}

EdgeList load_edges(const std::filesystem::path& p, std::size_t objects, std::size_t features) {
  auto in = open_in(p);
  auto h = read_header(in, p);
  EdgeList el;
  for_each_row(in, p, 3, [&](const auto& c) {
    Edge e{static_cast<std::uint32_t>(std::stoul(c[0])), static_cast<FeatureId>(std::stoul(c[1])),
           static_cast<std::uint32_t>(std::stoul(c[2]))};
    if (e.object >= objects || e.feature >= features || e.weight == 0)
      throw IntegrityError(p.string() + ": edge endpoint out of range");
    el.edges.push_back(e);
  });
  if (el.size() != header_count(h, "edges", p))
    throw ParseError(p.string(), 1, "edge count disagrees with header");
  return el;
}

}  // namespace

void save_graph(const HeterogeneousGraph& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "vocab.tsv");
    std::string prefixes;
    for (auto l : g.feature_config.prefix_lengths)
      prefixes += (prefixes.empty() ? "" : ",") + std::to_string(l);
    out << "# vocab M=" << g.vocab.size() << " M_re=" << g.vocab.num_re()
        << " M_qa=" << g.vocab.num_qa() << " shared=" << g.vocab.num_shared()
        << " window=" << g.feature_config.window << " prefixes=" << (prefixes.empty() ? "-" : prefixes)
        << " columns=id,flags,d_f_re,d_f_qa,feature\n";
    for (FeatureId f = 0; f < g.vocab.size(); ++f)
      out << f << '\t' << int(g.vocab.flags(f)) << '\t' << g.vocab.d_f_re(f) << '\t'
          << g.vocab.d_f_qa(f) << '\t' << g.vocab.string(f) << '\n';
  }
  {
    auto out = open_out(dir / "types.tsv");
    out << "# types K=" << g.types.size() << " columns=id,name\n";
    for (const auto& t : g.types.all()) out << t.id << '\t' << t.name << '\n';
  }
  {
    auto out = open_out(dir / "mentions.tsv");
    out << "# mentions N_Z=" << g.num_mentions() << " columns=id,mention,candidate_types\n";
    for (std::size_t i = 0; i < g.num_mentions(); ++i)
      out << i << '\t' << g.mention_ids[i] << '\t' << join_ids(g.mention_candidates[i]) << '\n';
  }
  {
    auto out = open_out(dir / "pairs.tsv");
    out << "# pairs N_P=" << g.num_pairs() << " columns=id,pair,polarity\n";
    for (std::size_t i = 0; i < g.num_pairs(); ++i)
      out << i << '\t' << g.pair_ids[i] << '\t' << to_string(g.pair_polarity[i]) << '\n';
  }
  {
    auto out = open_out(dir / "groups.tsv");
    out << "# groups N_q=" << g.question_groups.size()
        << " columns=question,positive_pairs,negative_pairs\n";
    for (const auto& q : g.question_groups)
      out << q.question_id << '\t' << (q.positives.empty() ? "-" : join_ids(q.positives)) << '\t'
          << (q.negatives.empty() ? "-" : join_ids(q.negatives)) << '\n';
  }
  save_edges(g.re_edges, g.num_mentions(), "re_edges", dir / "re_edges.tsv");
  save_edges(g.qa_edges, g.num_pairs(), "qa_edges", dir / "qa_edges.tsv");
}

HeterogeneousGraph load_graph(const std::filesystem::path& dir) {
  HeterogeneousGraph g;
  {
    const auto p = dir / "vocab.tsv";
    auto in = open_in(p);
    auto h = read_header(in, p);
    g.feature_config.window = header_count(h, "window", p);
    g.feature_config.prefix_lengths.clear();
    if (auto it = h.find("prefixes"); it != h.end())
      for (auto l : parse_ids(it->second)) g.feature_config.prefix_lengths.push_back(l);
    std::vector<std::string> strings;
    std::vector<std::uint8_t> flags;
    std::vector<std::uint32_t> d_re, d_qa;
    for_each_row(in, p, 5, [&](const auto& c) {
      if (std::stoul(c[0]) != strings.size()) throw IntegrityError("vocab ids not contiguous");
      flags.push_back(static_cast<std::uint8_t>(std::stoul(c[1])));
      d_re.push_back(static_cast<std::uint32_t>(std::stoul(c[2])));
      d_qa.push_back(static_cast<std::uint32_t>(std::stoul(c[3])));
      strings.push_back(c[4]);
    });
    if (strings.size() != header_count(h, "M", p))
      throw ParseError(p.string(), 1, "vocabulary size disagrees with header");
    g.vocab = FeatureVocabulary(std::move(strings), std::move(flags), std::move(d_re),
                                std::move(d_qa));
  }
  {
    const auto p = dir / "types.tsv";
    auto in = open_in(p);
    read_header(in, p);
    for_each_row(in, p, 2, [&](const auto& c) {
      if (g.types.intern(c[1]) != std::stoul(c[0])) throw IntegrityError("type ids not contiguous");
    });
  }
  {
    const auto p = dir / "mentions.tsv";
    auto in = open_in(p);
    read_header(in, p);
    for_each_row(in, p, 3, [&](const auto& c) {
      g.mention_ids.push_back(c[1]);
      auto cands = parse_ids(c[2]);
      for (auto t : cands)
        if (t >= g.types.size()) throw IntegrityError("candidate type out of range");
      g.mention_candidates.push_back(std::move(cands));
    });
  }
  {
    const auto p = dir / "pairs.tsv";
    auto in = open_in(p);
    read_header(in, p);
    for_each_row(in, p, 3, [&](const auto& c) {
      g.pair_ids.push_back(c[1]);
      g.pair_polarity.push_back(c[2] == "positive" ? Polarity::positive : Polarity::negative);
    });
  }
  {
    const auto p = dir / "groups.tsv";
    auto in = open_in(p);
    read_header(in, p);
    for_each_row(in, p, 3, [&](const auto& c) {
      QuestionGroup q{c[0], parse_ids(c[1]), parse_ids(c[2])};
      for (auto k : q.positives)
        if (k >= g.num_pairs()) throw IntegrityError("group pair out of range");
      for (auto k : q.negatives)
        if (k >= g.num_pairs()) throw IntegrityError("group pair out of range");
      g.question_groups.push_back(std::move(q));
    });
  }
  g.re_edges = load_edges(dir / "re_edges.tsv", g.num_mentions(), g.num_features());
  g.qa_edges = load_edges(dir / "qa_edges.tsv", g.num_pairs(), g.num_features());
  if (g.re_edges.empty()) throw ValidationError("graph has no relation-mention edges");
  g.rebuild_samplers();
  return g;
}

}  // namespace request
