#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "request/trainer.hpp"

using namespace request;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.dim = 8;
  c.alpha = 0.05;
  c.max_iterations = 40'000;
  c.check_every = 10'000;
  c.convergence_tol = 0.0;
  c.seed = 3;
  return c;
}

std::vector<double> copy(std::span<const double> r) { return {r.begin(), r.end()}; }

}  // namespace

TEST_CASE("feature step is one ascent step at the pre-step point") {
  const auto g = fixtures::oracle_graph(1);
  auto s = fixtures::random_store(g, 5, 2);
  const FeatureSample fs{7, 3, {5, 3, 9}};  // a repeated row accumulates both terms
  const double alpha = 0.1;

  const auto x = copy(s.Z.row(7));
  std::vector<std::span<const double>> negs = {s.C.row(5), s.C.row(3), s.C.row(9)};
  const auto grad = feature_term_gradient(s.Z.row(7), s.C.row(3), negs);
  std::map<FeatureId, std::vector<double>> expected;
  for (FeatureId f : {3u, 5u, 9u}) expected[f] = copy(s.C.row(f));
  for (std::size_t i = 0; i < 5; ++i) {
    expected[3][i] += alpha * grad.d_positive[i];
    expected[5][i] += alpha * grad.d_negatives[0][i];
    expected[3][i] += alpha * grad.d_negatives[1][i];
    expected[9][i] += alpha * grad.d_negatives[2][i];
  }
  apply_feature_step(s.Z, s.C, fs, alpha);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(s.Z.row(7)[i] == doctest::Approx(x[i] + alpha * grad.d_object[i]).epsilon(1e-12));
    for (auto& [f, v] : expected) CHECK(s.C.row(f)[i] == doctest::Approx(v[i]).epsilon(1e-12));
  }
}

TEST_CASE("partial-label step then lazy shrinkage") {
  EmbeddingStore s(2, 1, 0, 0, 3);
  s.Z.row(0)[0] = 1.0;
  s.R.row(1)[0] = 0.2;  // candidate
  s.R.row(2)[0] = 0.5;  // rival
  const std::vector<TypeId> cands = {1};
  const double a = 0.1, lambda = 0.5, f = 1.0 - a * lambda;
  apply_partial_label_step(s, 0, cands, a, lambda);
  CHECK(s.Z.row(0)[0] == doctest::Approx((1.0 + a * (0.2 - 0.5)) * f));
  CHECK(s.R.row(1)[0] == doctest::Approx((0.2 + a) * f));
  CHECK(s.R.row(2)[0] == doctest::Approx((0.5 - a) * f));
  CHECK(s.R.row(0)[0] == 0.0);

  // satisfied margin: only shrinkage
  s.Z.row(0)[0] = 10.0;
  s.R.row(1)[0] = 1.0;
  s.R.row(2)[0] = 0.0;
  s.R.row(0)[0] = 0.0;
  apply_partial_label_step(s, 0, cands, a, lambda);
  CHECK(s.Z.row(0)[0] == doctest::Approx(10.0 * f));
  CHECK(s.R.row(1)[0] == doctest::Approx(f));
}

TEST_CASE("QA step then lazy shrinkage") {
  Matrix P(3, 1);
  P.row(0)[0] = 1.0;
  P.row(1)[0] = 0.3;
  P.row(2)[0] = 0.1;
  const double a = 0.2, lambda = 0.25, f = 1.0 - a * lambda;
  apply_qa_step(P, {0, 1, 2}, a, lambda);
  CHECK(P.row(0)[0] == doctest::Approx((1.0 + a * 0.2) * f));
  CHECK(P.row(1)[0] == doctest::Approx((0.3 + a) * f));
  CHECK(P.row(2)[0] == doctest::Approx((0.1 - a) * f));
}

TEST_CASE("triple sampler draws valid triples uniformly") {
  HeterogeneousGraph g;
  g.question_groups = {{"a", {0, 1, 2}, {3}}, {"b", {4}, {5}}, {"c", {6, 7}, {8, 9}}};
  QaTripleSampler sampler(g);
  CHECK(sampler.eligible_questions() == 2);
  Rng rng(4);
  std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, int> seen;
  int self_pairs = 0;
  for (int i = 0; i < 60'000; ++i) {
    const auto t = *sampler.draw(rng);
    self_pairs += t.k == t.k1;
    ++seen[{t.k, t.k1, t.k2}];
  }
  CHECK(self_pairs == 0);
  // question a has 6 triples, c has 4; each question is picked half the time
  CHECK(seen.size() == 10);
  for (const auto& [t, n] : seen) {
    const double expected = std::get<0>(t) < 4 ? 60'000.0 / 12 : 60'000.0 / 8;
    CHECK(n == doctest::Approx(expected).epsilon(0.06));
  }
  HeterogeneousGraph none;
  CHECK(QaTripleSampler(none).empty());
}

TEST_CASE("single-threaded training is deterministic") {
  const auto g = fixtures::oracle_graph(2);
  const auto cfg = small_config();
  const auto a = train(g, cfg);
  const auto b = train(g, cfg);
  CHECK(a.store == b.store);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].objective == b.log[i].objective);
  auto other = cfg;
  other.seed = 4;
  CHECK_FALSE(train(g, other).store == a.store);
}

TEST_CASE("training lowers the objective") {
  const auto g = fixtures::oracle_graph(2);
  const auto r = train(g, small_config());
  REQUIRE(r.log.size() == 5);
  CHECK(r.log.back().objective < r.log.front().objective);
  CHECK(r.stats.iterations == 40'000);
  CHECK(r.stats.re_iterations + r.stats.qa_iterations == 40'000);
  CHECK(r.stats.re_iterations == doctest::Approx(20'000).epsilon(0.03));
  CHECK_FALSE(r.stats.converged);
}

TEST_CASE("modes run their phases in order") {
  const auto g = fixtures::oracle_graph(2);
  auto cfg = small_config();
  cfg.max_iterations = 20'000;
  SUBCASE("qa then re") {
    cfg.mode = TrainMode::qa_then_re;
    const auto r = train(g, cfg);
    CHECK(r.log.front().phase == "qa");
    CHECK(r.log.back().phase == "re");
    CHECK(r.stats.iterations == 40'000);
    CHECK(r.stats.qa_iterations == 20'000);
    CHECK(r.stats.re_iterations == 20'000);
  }
  SUBCASE("re then qa") {
    cfg.mode = TrainMode::re_then_qa;
    const auto r = train(g, cfg);
    CHECK(r.log.front().phase == "re");
    CHECK(r.log.back().phase == "qa");
  }
  SUBCASE("empty QA side trains RE only") {
    auto re_only = g;
    re_only.qa_edges = {};
    re_only.question_groups.clear();
    re_only.rebuild_samplers();
    const auto r = train(re_only, cfg);
    CHECK(r.stats.qa_iterations == 0);
  }
  SUBCASE("mix of one never touches the QA side") {
    cfg.re_qa_mix = 1.0;
    const auto r = train(g, cfg);
    CHECK(r.stats.qa_iterations == 0);
  }
  CHECK(parse_train_mode("re_then_qa") == TrainMode::re_then_qa);
  CHECK_THROWS_AS(parse_train_mode("both"), ContractViolation);
}

TEST_CASE("loose tolerance converges at the first check") {
  const auto g = fixtures::oracle_graph(2);
  auto cfg = small_config();
  cfg.convergence_tol = 10.0;
  const auto r = train(g, cfg);
  CHECK(r.stats.converged);
  CHECK(r.stats.iterations == cfg.check_every);
}

TEST_CASE("worker threads stay close to the single-threaded objective") {
  const auto g = fixtures::oracle_graph(2);
  auto cfg = small_config();
  cfg.max_iterations = 200'000;
  cfg.check_every = 200'000;
  const auto one = train(g, cfg);
  cfg.threads = 3;
  const auto many = train(g, cfg);
  CHECK(many.store.all_finite());
  CHECK(many.log.back().objective == doctest::Approx(one.log.back().objective).epsilon(0.02));
}

TEST_CASE("config validation") {
  const auto g = fixtures::oracle_graph(2);
  for (auto mutate : std::vector<std::function<void(TrainConfig&)>>{
           [](TrainConfig& c) { c.dim = 0; }, [](TrainConfig& c) { c.negatives = 0; },
           [](TrainConfig& c) { c.alpha = 0; }, [](TrainConfig& c) { c.re_qa_mix = 1.5; },
           [](TrainConfig& c) { c.check_every = 0; }, [](TrainConfig& c) { c.lambda = -1; },
           [](TrainConfig& c) { c.threads = 0; }, [](TrainConfig& c) { c.batch_size = 0; }}) {
    auto c = small_config();
    mutate(c);
    CHECK_THROWS_AS(train(g, c), ContractViolation);
  }
}

TEST_CASE("exploding learning rate is reported") {
  const auto g = fixtures::oracle_graph(2);
  auto cfg = small_config();
  cfg.alpha = 500.0;
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(train(g, cfg), TrainingDiverged);
}

TEST_CASE("training log CSV") {
  std::vector<TrainLogEntry> log = {{0, "joint", 3.5, 2.0, 1.5, 0.25}};
  CHECK(format_train_log(log) == "iteration,phase,O,O_Z,O_QA,wall_ms\n0,joint,3.5,2,1.5,0.250\n");
}
