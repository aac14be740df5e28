#include "request/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "request/corpus.hpp"
#include "request/embedding.hpp"
#include "request/error.hpp"
#include "request/eval.hpp"
#include "request/features.hpp"
#include "request/graph.hpp"
#include "request/inference.hpp"
#include "request/qa_pairs.hpp"
#include "request/random.hpp"
#include "request/synth.hpp"
#include "request/trainer.hpp"

namespace request {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::vector<std::string> kCommands = {"gen-qa-pairs", "extract-features", "build-graph",
                                            "stats",        "train",            "predict",
                                            "evaluate",     "synth",            "sweep-eta"};

/// Usage problems detected after parsing (bad config file, colliding paths).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// Turns one config object into flag tokens, skipping flags given on the
/// command line so that explicit flags win.
void append_config_flags(const json& obj, const std::unordered_set<std::string>& given,
                         std::vector<std::string>& out) {
  for (const auto& [key, value] : obj.items()) {
    if (value.is_object()) continue;
    const auto flag = "--" + key;
    if (given.count(flag)) continue;
    if (value.is_boolean()) {
      out.push_back(flag + "=" + (value.get<bool>() ? "true" : "false"));
    } else if (value.is_array()) {
      out.push_back(flag);
      for (const auto& v : value) out.push_back(json_scalar(v));
    } else {
      out.push_back(flag);
      out.push_back(json_scalar(value));
    }
  }
}

/// Inlines the --config file: top-level scalars are global flags, the object
/// named after the subcommand holds its flags.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string config_path;
  std::unordered_set<std::string> given;
  std::ptrdiff_t sub_pos = -1;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) == 0) {
      const auto eq = a.find('=');
      const auto name = a.substr(0, eq);
      given.insert(name);
      if (name == "--config") {
        if (eq != std::string::npos) config_path = a.substr(eq + 1);
        else if (i + 1 < args.size()) config_path = args[i + 1];
      }
    } else if (sub_pos < 0 &&
               std::find(kCommands.begin(), kCommands.end(), a) != kCommands.end()) {
      sub_pos = static_cast<std::ptrdiff_t>(i);
    }
  }
  if (config_path.empty() || sub_pos < 0) return args;

  std::ifstream f(config_path);
  if (!f) throw UsageError("cannot open config file " + config_path);
  json cfg;
  try {
    cfg = json::parse(f);
  } catch (const json::exception& e) {
    throw UsageError("config file " + config_path + ": " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");

  const auto& sub = args[static_cast<std::size_t>(sub_pos)];
  std::vector<std::string> injected;
  append_config_flags(cfg, given, injected);
  if (cfg.contains(sub)) {
    if (!cfg[sub].is_object()) throw UsageError("config section '" + sub + "' must be an object");
    append_config_flags(cfg[sub], given, injected);
  }
  std::vector<std::string> out(args.begin(), args.begin() + sub_pos + 1);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + sub_pos + 1, args.end());
  return out;
}

struct Globals {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string config;
  std::string out;
};

void add_globals(CLI::App* app, Globals& g, bool needs_out) {
  app->add_option("--seed", g.seed, "Root random seed, split per stage")->capture_default_str();
  app->add_option("--threads", g.threads, "Worker threads (1 = deterministic)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--config", g.config, "JSON configuration file; flags override it");
  auto* out = app->add_option("--out", g.out, "Output directory");
  if (needs_out) out->required();
}

BrownClusterMap brown_or_empty(const std::string& path) {
  return path.empty() ? BrownClusterMap{} : load_brown_clusters(path);
}

void add_feature_flags(CLI::App* app, FeatureConfig& fc, std::string& brown) {
  app->add_option("--window", fc.window, "Context window for bigrams")->capture_default_str();
  app->add_option("--prefix-lengths", fc.prefix_lengths, "Brown cluster prefix lengths")
      ->capture_default_str()
      ->expected(1, -1);
  app->add_option("--brown", brown, "Brown cluster file (bits token freq)");
}

void check_distinct(const std::vector<fs::path>& inputs, const fs::path& output) {
  for (const auto& in : inputs) {
    std::error_code ec;
    if (fs::exists(in) && fs::exists(output) && fs::equivalent(in, output, ec))
      throw UsageError("output " + output.string() + " would overwrite input " + in.string());
  }
}

/// Linkable mentions plus a seeded subsample of the unlinkable ones, in
/// corpus order.
LabeledCorpus subsample_negatives(const LabeledCorpus& re, double ratio, std::uint64_t seed) {
  std::vector<RelationMention> unlinkable;
  for (const auto& m : re.mentions)
    if (m.is_negative()) unlinkable.push_back(m);
  LabeledCorpus out;
  out.sentences = re.sentences;
  out.types = re.types;
  std::unordered_set<std::string> kept;
  if (!unlinkable.empty())
    for (const auto& m : sample_negative_mentions(unlinkable, ratio, seed)) kept.insert(m.id);
  for (const auto& m : re.mentions)
    if (!m.is_negative() || kept.count(m.id)) out.mentions.push_back(m);
  return out;
}

std::string features_jsonl(const LabeledCorpus& re, const QACorpus& qa,
                           const BrownClusterMap& brown, const FeatureConfig& fc) {
  std::string out;
  for (const auto& m : re.mentions) {
    const auto fv = extract_features(m.m1, m.m2, re.sentences.at(m.m1.sentence_id), brown, fc);
    out += json{{"kind", "re"}, {"id", m.id}, {"features", fv.counts}}.dump() + "\n";
  }
  for (const auto& p : qa.pairs) {
    const auto fv = extract_features(p.m1, p.m2, qa.sentences.at(p.m1.sentence_id), brown, fc);
    out += json{{"kind", "qa"}, {"id", p.id}, {"features", fv.counts}}.dump() + "\n";
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relation extraction with indirect supervision from question answering", "request"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Globals g;
  FeatureConfig fc;
  std::string brown_path;

  // synth
  SynthConfig sc;
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
  add_globals(synth, g, true);
  synth->add_option("--num-types", sc.num_types)->capture_default_str();
  synth->add_option("--num-mentions", sc.num_mentions)->capture_default_str();
  synth->add_option("--num-test-mentions", sc.num_test_mentions)->capture_default_str();
  synth->add_option("--num-questions", sc.num_questions)->capture_default_str();
  synth->add_option("--vocab-size", sc.vocab_size)->capture_default_str();
  synth->add_option("--features-per-mention", sc.features_per_mention)->capture_default_str();
  synth->add_option("--indicative-per-mention", sc.indicative_per_mention)->capture_default_str();
  synth->add_option("--fp-rate", sc.fp_rate)->capture_default_str();
  synth->add_option("--fn-rate", sc.fn_rate)->capture_default_str();
  synth->add_option("--qa-share", sc.qa_share)->capture_default_str();
  synth->add_option("--none-fraction", sc.none_fraction)->capture_default_str();
  synth->add_option("--noise-prone-fraction", sc.noise_prone_fraction)->capture_default_str();
  synth->add_option("--noise-concentration", sc.noise_concentration)->capture_default_str();
  synth->add_option("--positives-per-question", sc.positives_per_question)->capture_default_str();
  synth->add_option("--qa-indicative-per-answer", sc.qa_indicative_per_answer)
      ->capture_default_str();
  synth->add_option("--negatives-per-question", sc.negatives_per_question)->capture_default_str();
  synth->add_option("--qa-other-relation-negatives", sc.qa_other_relation_negatives)
      ->capture_default_str();
  synth->add_option("--separate-qa-context", sc.separate_qa_context)->capture_default_str();

  // gen-qa-pairs
  PairGenConfig pc;
  std::string qa_path;
  auto* gen = app.add_subcommand("gen-qa-pairs", "Extract QA entity-mention pairs");
  add_globals(gen, g, true);
  gen->add_option("--qa", qa_path, "QA corpus (questions and answers)")->required();
  gen->add_option("--neg-pairs-per-sentence", pc.neg_pairs_per_sentence)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen->add_option("--sample-negatives-from-positives", pc.sample_negatives_from_positives)
      ->capture_default_str();

  // extract-features
  std::string re_path;
  auto* extract = app.add_subcommand("extract-features", "Dump text features per object");
  add_globals(extract, g, true);
  extract->add_option("--re", re_path, "RE training corpus")->required();
  extract->add_option("--qa", qa_path, "QA corpus with pairs");
  add_feature_flags(extract, fc, brown_path);

  // build-graph
  double negative_ratio = 0.0;
  auto* build = app.add_subcommand("build-graph", "Build the heterogeneous network");
  add_globals(build, g, true);
  build->add_option("--re", re_path, "RE training corpus")->required();
  build->add_option("--qa", qa_path, "QA corpus with pairs (omit for RE only)");
  build->add_option("--negative-ratio", negative_ratio,
                    "Fraction of unlinkable mentions kept as None examples")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  add_feature_flags(build, fc, brown_path);

  // stats
  std::string graph_dir;
  auto* stats = app.add_subcommand("stats", "Shared-feature statistics of a network");
  add_globals(stats, g, false);
  stats->add_option("--graph", graph_dir, "Network directory")->required();

  // train
  TrainConfig tc;
  std::string mode_name = std::string(to_string(tc.mode));
  auto* train_cmd = app.add_subcommand("train", "Learn embeddings");
  add_globals(train_cmd, g, true);
  train_cmd->add_option("--graph", graph_dir, "Network directory")->required();
  train_cmd->add_option("-d,--dim", tc.dim, "Embedding dimension")->capture_default_str();
  train_cmd->add_option("--lambda", tc.lambda, "Regularization weight")->default_str("1e-4");
  train_cmd->add_option("-V,--negatives", tc.negatives, "Negative samples per edge")
      ->capture_default_str();
  train_cmd->add_option("--alpha", tc.alpha, "Initial learning rate")->capture_default_str();
  train_cmd->add_option("--re-qa-mix", tc.re_qa_mix, "Probability of an RE-side iteration")
      ->capture_default_str();
  train_cmd->add_option("--max-iterations", tc.max_iterations)->capture_default_str();
  train_cmd->add_option("--convergence-tol", tc.convergence_tol)->default_str("1e-4");
  train_cmd->add_option("--objective-check-every", tc.check_every)->capture_default_str();
  train_cmd->add_option("--batch-size", tc.batch_size)->capture_default_str();
  train_cmd->add_option("--objective-noise-samples", tc.objective_noise_samples,
                        "Noise draws per objective check (0 = exact)")
      ->capture_default_str();
  train_cmd->add_option("--mode", mode_name)
      ->capture_default_str()
      ->check(CLI::IsMember({"joint", "qa_then_re", "re_then_qa"}));

  // predict / sweep-eta
  InferenceConfig ic;
  std::string sim_name = std::string(to_string(ic.similarity));
  std::string model_path, test_path, gold_path;
  auto* predict = app.add_subcommand("predict", "Type test relation mentions");
  add_globals(predict, g, true);
  predict->add_option("--graph", graph_dir, "Network directory")->required();
  predict->add_option("--model", model_path, "Embedding model file")->required();
  predict->add_option("--test", test_path, "Test corpus")->required();
  predict->add_option("--brown", brown_path, "Brown cluster file");
  predict->add_option("--eta", ic.eta, "None threshold")->capture_default_str();
  predict->add_option("--similarity", sim_name)
      ->capture_default_str()
      ->check(CLI::IsMember({"cosine", "dot"}));

  std::vector<double> etas = {0.0, 0.1, 0.2, 0.3, 0.35, 0.4, 0.5, 0.6, 0.7};
  auto* sweep = app.add_subcommand("sweep-eta", "Tabulate metrics across None thresholds");
  add_globals(sweep, g, true);
  sweep->add_option("--graph", graph_dir, "Network directory")->required();
  sweep->add_option("--model", model_path, "Embedding model file")->required();
  sweep->add_option("--test", test_path, "Test corpus")->required();
  sweep->add_option("--gold", gold_path, "Gold labels (predictions format)")->required();
  sweep->add_option("--brown", brown_path, "Brown cluster file");
  sweep->add_option("--etas", etas, "Thresholds")->capture_default_str()->expected(1, -1);
  sweep->add_option("--similarity", sim_name)
      ->capture_default_str()
      ->check(CLI::IsMember({"cosine", "dot"}));

  // evaluate
  std::string pred_path;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Precision, recall and F1");
  add_globals(evaluate_cmd, g, false);
  evaluate_cmd->add_option("--predictions", pred_path)->required();
  evaluate_cmd->add_option("--gold", gold_path)->required();

  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  const fs::path out_dir = g.out;
  try {
    if (!g.out.empty()) fs::create_directories(out_dir);
    if (*synth) {
      sc.seed = derive_seed(g.seed, "synth");
      const auto corpus = generate_synthetic(sc);
      save_re_corpus(corpus.train, out_dir / "train.jsonl");
      save_re_corpus(corpus.test, out_dir / "test.jsonl");
      save_qa_corpus(corpus.qa, out_dir / "qa.jsonl");
      write_file(out_dir / "gold.tsv", format_predictions(corpus.gold));
      out << "wrote " << corpus.train.mentions.size() << " training mentions, "
          << corpus.test.mentions.size() << " test mentions, " << corpus.qa.questions.size()
          << " questions to " << out_dir.string() << "\n";
    } else if (*gen) {
      pc.seed = derive_seed(g.seed, "qa-pairs");
      const auto qa = load_qa_corpus(qa_path);
      PairGenReport report;
      const auto with_pairs = generate_pairs(qa, pc, &report);
      check_distinct({qa_path}, out_dir / "qa_pairs.jsonl");
      save_qa_corpus(with_pairs, out_dir / "qa_pairs.jsonl");
      write_file(out_dir / "report.json", report.to_json() + "\n");
      out << report.to_json() << "\n";
    } else if (*extract) {
      const auto re = load_re_corpus(re_path);
      const auto qa = qa_path.empty() ? QACorpus{} : load_qa_corpus(qa_path);
      write_file(out_dir / "features.jsonl",
                 features_jsonl(re, qa, brown_or_empty(brown_path), fc));
    } else if (*build) {
      const auto re = subsample_negatives(load_re_corpus(re_path), negative_ratio,
                                          derive_seed(g.seed, "negative-mentions"));
      const auto qa = qa_path.empty() ? QACorpus{} : load_qa_corpus(qa_path);
      const auto graph = build_graph(re, qa, fc, brown_or_empty(brown_path));
      save_graph(graph, out_dir);
      out << "features " << graph.num_features() << ", mentions " << graph.num_mentions()
          << ", pairs " << graph.num_pairs() << ", questions " << graph.question_groups.size()
          << "\n";
    } else if (*stats) {
      const auto graph = load_graph(graph_dir);
      const auto report = shared_feature_stats(graph).to_json();
      if (!g.out.empty()) write_file(out_dir / "stats.json", report + "\n");
      out << report << "\n";
    } else if (*train_cmd) {
      tc.mode = parse_train_mode(mode_name);
      tc.seed = derive_seed(g.seed, "train");
      tc.threads = g.threads;
      tc.validate();
      const auto graph = load_graph(graph_dir);
      const auto result = train(graph, tc, [&](const TrainLogEntry& e) {
        err << e.phase << " iteration " << e.iteration << " O=" << e.objective << "\n";
      });
      save_model(result.store, out_dir / "model.emb");
      write_file(out_dir / "train_log.csv", format_train_log(result.log));
      out << "iterations " << result.stats.iterations << ", converged "
          << (result.stats.converged ? "yes" : "no") << "\n";
    } else if (*predict) {
      ic.similarity = parse_similarity(sim_name);
      const auto graph = load_graph(graph_dir);
      const auto store = load_model(model_path);
      const auto test = load_re_corpus(test_path);
      const auto preds = predict_corpus(test, graph, store, brown_or_empty(brown_path), ic);
      write_file(out_dir / "predictions.tsv", format_predictions(preds));
    } else if (*sweep) {
      ic.similarity = parse_similarity(sim_name);
      const auto graph = load_graph(graph_dir);
      const auto store = load_model(model_path);
      const auto test = load_re_corpus(test_path);
      const auto gold = load_predictions(gold_path);
      const auto rows = sweep_eta(test, graph, store, brown_or_empty(brown_path), ic, etas, gold);
      const auto table = format_sweep(rows);
      write_file(out_dir / "sweep.tsv", table);
      out << table;
    } else if (*evaluate_cmd) {
      const auto preds = load_predictions(pred_path);
      const auto gold = load_predictions(gold_path);
      const auto report = evaluate(preds, gold);
      if (!g.out.empty()) {
        write_file(out_dir / "metrics.json", report.to_json() + "\n");
        write_file(out_dir / "metrics.txt", report.to_table());
      }
      out << report.to_table();
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace request
