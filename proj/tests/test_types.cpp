#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "capfuse/error.hpp"
#include "capfuse/rng.hpp"
#include "capfuse/types.hpp"

using namespace capfuse;

namespace {

bool throws_code(Errc expected, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == expected;
  }
  return false;
}

}  // namespace

TEST_CASE("softmax symmetry and shift invariance") {
  const auto p = softmax({0.0, 0.0, 0.0});
  CHECK(p[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  // Naive exponentiation overflows here; the stable version must not.
  const auto q = softmax({1000.0, 1000.0});
  CHECK(q[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("softmax matches the arbitrary-precision oracle on (1,2,3)") {
  // Frozen from an mpmath evaluation of exp(x_i)/sum_j exp(x_j) at 50 digits.
  const double expected[] = {0.090030573170380457998, 0.24472847105479765247,
                             0.66524095577482188953};
  const auto p = softmax({1.0, 2.0, 3.0});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(p[i] - expected[i]) < 1e-15);
  }
}

TEST_CASE("softmax rejects bad input") {
  CHECK(throws_code(Errc::invalid_input, [] { softmax({1.0}); }));
  CHECK(throws_code(Errc::invalid_input,
                    [] { softmax({std::numeric_limits<double>::infinity(), 0.0}); }));
  CHECK(throws_code(Errc::invalid_input,
                    [] { softmax({std::nan(""), 0.0}); }));
}

TEST_CASE("softmax lands on the simplex for random logits") {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(9);
    Logits z(n);
    for (double& x : z) x = (rng.next_unit() - 0.5) * 200.0;
    const auto p = softmax(z);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(p[i] > 0.0);
      CHECK(p[i] <= 1.0);
      sum += p[i];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);

    // Shift invariance: softmax(x + c) = softmax(x) within 1e-12.
    const double c = (rng.next_unit() - 0.5) * 50.0;
    Logits shifted(z);
    for (double& x : shifted) x += c;
    const auto ps = softmax(shifted);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(p[i] - ps[i]) <= 1e-12);

    CHECK(argmax(p) == argmax(std::span<const double>(z)));
  }
}

TEST_CASE("normalize basics") {
  const auto u = normalize(EmbeddingVector({3.0, 4.0}));
  CHECK(u[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(u[1] == doctest::Approx(0.8).epsilon(1e-15));

  CHECK(throws_code(Errc::degenerate_vector,
                    [] { normalize(EmbeddingVector({0.0, 0.0, 0.0})); }));
  CHECK(throws_code(Errc::degenerate_vector, [] { normalize(EmbeddingVector{}); }));
}

TEST_CASE("normalize: unit norm and idempotence over seeded random vectors") {
  Rng rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 2 + rng.below(63);
    std::vector<double> v(d);
    for (double& x : v) x = (rng.next_unit() - 0.5) * 20.0;
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (sq == 0.0) continue;
    const auto n1 = normalize(EmbeddingVector(v));
    CHECK(std::abs(norm(n1) - 1.0) <= 1e-6);
    const auto n2 = normalize(n1);
    for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(n1[i] - n2[i]) <= 1e-12);
    // Direction preserved: cosine with the source is 1.
    CHECK(dot(n1, EmbeddingVector(v)) > 0.0);
  }
}

TEST_CASE("argmax tie-breaks to the lowest index") {
  CHECK(argmax(ProbabilityVector::exact({0.2, 0.7, 0.1})) == 1);
  CHECK(argmax(ProbabilityVector::exact({0.5, 0.5})) == 0);
  const double third = 1.0 / 3;
  CHECK(argmax(ProbabilityVector::normalized({third, third, third})) == 0);
  CHECK(throws_code(Errc::invalid_input, [] { argmax(std::span<const double>{}); }));
}

TEST_CASE("probability vector construction") {
  // Within tolerance: renormalized to an exact unit sum.
  auto p = ProbabilityVector::normalized({0.5, 0.5 + 5e-10});
  CHECK(std::abs(p[0] + p[1] - 1.0) <= 1e-15);

  // exact() keeps bits.
  const std::vector<double> raw{0.25, 0.75};
  auto q = ProbabilityVector::exact(raw);
  CHECK(q.values() == raw);

  CHECK(throws_code(Errc::invalid_input, [] { ProbabilityVector::exact({0.5, 0.6}); }));
  CHECK(throws_code(Errc::invalid_input, [] { ProbabilityVector::normalized({1.2, -0.2}); }));
  CHECK(throws_code(Errc::invalid_input, [] { ProbabilityVector::exact({}); }));
}

TEST_CASE("label space validation and lookup") {
  LabelSpace ls({"flood", "quake", "storm"});
  CHECK(ls.size() == 3);
  CHECK(ls.index_of("quake") == 1);
  CHECK(!ls.index_of("Quake"));  // case-sensitive
  CHECK(ls.name(2) == "storm");
  CHECK(throws_code(Errc::out_of_range, [&] { ls.name(3); }));
  CHECK(throws_code(Errc::invalid_input, [] { LabelSpace({"only"}); }));
  CHECK(throws_code(Errc::invalid_input, [] { LabelSpace({"a", "a"}); }));
  CHECK(throws_code(Errc::invalid_input, [] { LabelSpace({"a", ""}); }));
}
