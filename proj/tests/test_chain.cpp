#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "mrd/chain.hpp"
#include "support.hpp"

using namespace mrd;
using Catch::Matchers::WithinAbs;

TEST_CASE("chains keep the given order") {
  Chain events({"∅", "A∩B", "A"});
  REQUIRE(events.size() == 3);
  REQUIRE(events.increment_count() == 2);
  REQUIRE(events.label(0) == "∅");
  REQUIRE(events.label(2) == "A");

  Chain minimal({"a", "b"});
  REQUIRE(minimal.size() == 2);
}

TEST_CASE("chain construction rejects bad label lists") {
  REQUIRE_THROWS_AS(Chain({"a", "a"}), DuplicateLabel);
  REQUIRE_THROWS_AS(Chain({"a"}), TooShort);
  REQUIRE_THROWS_AS(Chain({}), TooShort);
  REQUIRE_THROWS_AS(Chain({"x", "y", "x"}), DuplicateLabel);
}

TEST_CASE("grading functions must strictly increase") {
  Chain events({"∅", "A∩B", "A"});
  GradingFunction g(events, {0.0, 0.2, 0.5});
  REQUIRE(g.value(1) == 0.2);
  REQUIRE(g.deltas() == std::vector<double>{0.2, 0.3});

  REQUIRE_THROWS_AS(GradingFunction(events, {0.0, 0.5, 0.5}), NotComonotonic);
  REQUIRE_THROWS_AS(GradingFunction(events, {0.0, 0.5}), LengthMismatch);
  REQUIRE_THROWS_AS(GradingFunction(events, {0.0, 1.0, 0.5}), NotComonotonic);
  // A step at the strictness threshold counts as a tie.
  REQUIRE_THROWS_AS(GradingFunction(events, {0.0, 5e-13, 1.0}), NotComonotonic);
  REQUIRE_NOTHROW(GradingFunction(events, {0.0, 5e-12, 1.0}));
}

TEST_CASE("the indexing function is 0..n with unit increments") {
  Chain three({"x", "y", "z"});
  REQUIRE(indexing_gf(three).values() == std::vector<double>{0.0, 1.0, 2.0});

  Chain two({"a", "b"});
  REQUIRE(increments(indexing_gf(two)).deltas() == std::vector<double>{1.0});

  Chain five({"a", "b", "c", "d", "e"});
  REQUIRE(total_range(indexing_gf(five)) == 4.0);

  // Any chain of n elements with values 0..n-1 is the indexing function.
  GradingFunction manual(three, {0.0, 1.0, 2.0});
  REQUIRE(manual.values() == indexing_gf(three).values());
}

TEST_CASE("increments are first differences") {
  Chain events({"∅", "A∩B", "A"});
  REQUIRE(increments(GradingFunction(events, {0.0, 0.2, 0.5})).deltas() ==
          std::vector<double>{0.2, 0.3});
  REQUIRE(increments(GradingFunction(events, {-1.0, 0.0, 4.0})).deltas() ==
          std::vector<double>{1.0, 4.0});

  Chain four({"a", "b", "c", "d"});
  REQUIRE(increments(indexing_gf(four)).deltas() ==
          std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("from_increments is the exact inverse of increments") {
  Chain events({"∅", "A∩B", "A"});
  GradingFunction g =
      from_increments(events, 0.0, IncrementVector({0.2, 0.3}));
  REQUIRE(g.values() == std::vector<double>{0.0, 0.2, 0.5});

  Chain two({"a", "b"});
  REQUIRE(from_increments(two, 7.0, IncrementVector({1.0})).values() ==
          std::vector<double>{7.0, 8.0});

  REQUIRE_THROWS_AS(IncrementVector({0.1, -0.1}), NonPositiveDelta);
  REQUIRE_THROWS_AS(IncrementVector({0.0}), NonPositiveDelta);
  REQUIRE_THROWS_AS(from_increments(events, 0.0, IncrementVector({1.0})),
                    LengthMismatch);
}

TEST_CASE("deltas below the value resolution collapse and are rejected") {
  Chain two({"a", "b"});
  // At magnitude 1e6 a double cannot resolve a 2e-12 step, so the values tie.
  REQUIRE_THROWS_AS(from_increments(two, 1e6, IncrementVector({2e-12})),
                    NotComonotonic);
  REQUIRE_NOTHROW(from_increments(two, 0.0, IncrementVector({2e-12})));
}

TEST_CASE("total_range spans first to last value") {
  Chain events({"∅", "A∩B", "A"});
  REQUIRE(total_range(GradingFunction(events, {0.0, 0.2, 0.5})) == 0.5);
  REQUIRE(total_range(GradingFunction(events, {0.0, 0.37, 1.0})) == 1.0);

  Chain six({"0", "1", "2", "3", "4", "5"});
  REQUIRE(total_range(indexing_gf(six)) == 5.0);
}

TEST_CASE("value/increment round trips") {
  auto rng = testsupport::make_rng(0x9d2c5680);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + std::size_t(testsupport::uniform(rng, 0, 10));
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("w" + std::to_string(i));
    Chain chain(labels);

    std::vector<double> values{testsupport::uniform(rng, -5.0, 5.0)};
    for (std::size_t i = 1; i < n; ++i) {
      values.push_back(values.back() + testsupport::uniform(rng, 1e-6, 2.0));
    }
    GradingFunction f(chain, values);

    // Values round trip within 1e-12 of the originals.
    GradingFunction rebuilt = from_increments(chain, values[0], increments(f));
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE_THAT(rebuilt.value(i), WithinAbs(values[i], 1e-12));
    }

    // Increments round trip exactly.
    IncrementVector deltas = increments(f);
    REQUIRE(increments(from_increments(chain, values[0], deltas)).deltas() ==
            deltas.deltas());

    // Accepted functions are comonotonic across every pair of positions.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        REQUIRE(f.value(i) < f.value(j));
      }
    }

    // The increment sum matches the range to 1e-12 relative.
    double sum = 0.0;
    for (double d : deltas.deltas()) sum += d;
    REQUIRE_THAT(sum, WithinAbs(total_range(f), 1e-12 * std::abs(total_range(f)) + 1e-15));
  }
}

TEST_CASE("increments ignore translation") {
  // Dyadic values and shifts make the additions exact, so the increments must
  // be bit-for-bit identical; any difference would reveal a hidden dependence
  // on absolute values.
  auto rng = testsupport::make_rng(0xb5026f5a);
  const double quantum = 1.0 / 65536.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + std::size_t(testsupport::uniform(rng, 0, 8));
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("w" + std::to_string(i));
    Chain chain(labels);

    std::vector<double> values;
    std::int64_t tick = std::int64_t(testsupport::uniform(rng, -1000, 1000));
    for (std::size_t i = 0; i < n; ++i) {
      tick += 1 + std::int64_t(testsupport::uniform(rng, 0, 5000));
      values.push_back(double(tick) * quantum);
    }
    const double shift =
        double(std::int64_t(testsupport::uniform(rng, -1e6, 1e6))) * quantum;
    std::vector<double> shifted = values;
    for (double& v : shifted) v += shift;

    REQUIRE(GradingFunction(chain, values).deltas() ==
            GradingFunction(chain, shifted).deltas());
  }
}
