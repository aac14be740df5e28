#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "request/error.hpp"
#include "request/losses.hpp"

using namespace request;

TEST_CASE("analytic gradients match central differences") {
  for (const auto& r : fixtures::check_all_gradients(2024)) {
    INFO(r.family);
    CHECK(r.points == 100);
    CHECK(r.max_rel_error < 1e-5);
  }
}

TEST_CASE("log-sigmoid is stable in the tails") {
  CHECK(log_sigmoid(0.0) == doctest::Approx(-std::log(2.0)));
  CHECK(log_sigmoid(800.0) == 0.0);
  CHECK(log_sigmoid(-800.0) == doctest::Approx(-800.0));
  CHECK(std::isfinite(log_sigmoid(-1e6)));
  CHECK(sigmoid(-800.0) >= 0.0);
  for (double x : {-30.0, -2.0, 0.5, 7.0})
    CHECK(log_sigmoid(x) == doctest::Approx(std::log(sigmoid(x))).epsilon(1e-12));
}

TEST_CASE("partial-label hinge by hand") {
  Matrix R(3, 2);
  // None, r1, r2
  R.row(0)[0] = 1.0;
  R.row(1)[1] = 1.0;
  R.row(2)[0] = 0.5;
  R.row(2)[1] = 0.5;
  const std::vector<double> z = {0.2, 0.8};
  const std::vector<TypeId> cands = {1};
  const auto a = partial_label_argmax(z, cands, R);
  CHECK(a.best == 1);
  CHECK(a.rival == 2);  // 0.5 beats None's 0.2
  CHECK(a.margin == doctest::Approx(0.3));
  CHECK(partial_label_loss(z, cands, R) == doctest::Approx(0.7));

  const std::vector<double> far = {0.0, 10.0};
  CHECK(partial_label_loss(far, cands, R) == 0.0);
}

TEST_CASE("partial-label ties go to the lowest id") {
  Matrix R(4, 1);
  for (std::size_t t = 0; t < 4; ++t) R.row(t)[0] = 1.0;
  const std::vector<double> z = {1.0};
  const std::vector<TypeId> cands = {3, 1};
  const auto a = partial_label_argmax(z, cands, R);
  CHECK(a.best == 1);
  CHECK(a.rival == 0);
  CHECK(a.loss() == 1.0);
}

TEST_CASE("partial-label contract") {
  Matrix R(2, 1);
  const std::vector<double> z = {1.0};
  CHECK_THROWS_AS(partial_label_argmax(z, std::vector<TypeId>{}, R), ContractViolation);
  CHECK_THROWS_AS(partial_label_argmax(z, std::vector<TypeId>{0, 1}, R), ContractViolation);
  CHECK_THROWS_AS(partial_label_argmax(z, std::vector<TypeId>{5}, R), ContractViolation);
}

TEST_CASE("QA pairwise loss sums triples") {
  Matrix P(4, 2);
  // positives 0, 1, 2; negative 3
  const double rows[4][2] = {{1, 0}, {1, 0}, {0, 1}, {0, 0}};
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 2; ++i) P.row(k)[i] = rows[k][i];
  QuestionGroup g{"q", {0, 1, 2}, {3}};
  // k=0: with k1=1 margin 1 -> 0; with k1=2 margin 0 -> 1
  CHECK(qa_pairwise_loss(0, g, P) == doctest::Approx(1.0));
  // k=2: with 0 and 1 margins 0 -> 2
  CHECK(qa_pairwise_loss(2, g, P) == doctest::Approx(2.0));
  CHECK_THROWS_AS(qa_pairwise_loss(3, g, P), ContractViolation);
  CHECK(g.triple_count() == 6);
}

TEST_CASE("hinge subgradients vanish outside the margin except for the regularizer") {
  const std::vector<double> pk = {2, 0}, p1 = {2, 0}, p2 = {0, 0};
  const auto g = qa_triple_gradient(pk, p1, p2, 0.5);
  CHECK_FALSE(g.active);
  CHECK(g.d_k == std::vector<double>{1.0, 0.0});
  CHECK(g.d_k2 == std::vector<double>{0.0, 0.0});
}
