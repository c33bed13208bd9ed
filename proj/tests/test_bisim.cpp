#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ckdist/bisim.hpp"
#include "ckdist/bounds.hpp"
#include "ckdist/distances.hpp"
#include "oracles.hpp"

using namespace ckdist;

namespace {

BisimRelation identity_relation() { return {{{0, 0}, {1, 1}}}; }

LabeledMarkovChain uniform_chain(std::size_t n) {
  RawChain raw;
  raw.labels = {"a", "b"};
  for (std::size_t s = 0; s < n; ++s) {
    raw.states.push_back("s" + std::to_string(s));
    raw.state_labels.push_back(s % 2 == 0 ? "a" : "b");
  }
  raw.initial.assign(n, 1.0 / static_cast<double>(n));
  raw.transitions.assign(n, std::vector<double>(n, 1.0 / static_cast<double>(n)));
  return validate(raw);
}

}  // namespace

TEST_CASE("closed sets of the identity relation on two-state chains") {
  const auto chain = onegin();
  const auto closed = enumerate_closed_sets(identity_relation(), chain, chain);
  REQUIRE(closed.size() == 4);
  CHECK(closed[0].set1 == 0b00); CHECK(closed[0].set2 == 0b00);
  CHECK(closed[1].set1 == 0b01); CHECK(closed[1].set2 == 0b01);
  CHECK(closed[2].set1 == 0b10); CHECK(closed[2].set2 == 0b10);
  CHECK(closed[3].set1 == 0b11); CHECK(closed[3].set2 == 0b11);
}

TEST_CASE("every product set is closed under the empty relation") {
  const auto chain = onegin();
  const auto closed = enumerate_closed_sets(BisimRelation{}, chain, chain);
  CHECK(closed.size() == 16);
  // Literal reading of the definition: (S_1, {}) is closed, so the initial
  // masses must match within epsilon; the empty relation certifies nothing.
  const auto minimal = minimal_epsilon(BisimRelation{}, chain, chain);
  CHECK(minimal.value == 1.0);
}

TEST_CASE("state guard rejects large enumerations") {
  const auto big = uniform_chain(11);
  CHECK_THROWS_AS(enumerate_closed_sets(identity_relation(), big, big), Error);
  try {
    enumerate_closed_sets(identity_relation(), big, big);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooManyStates);
    CHECK(e.exit_code() == 3);
  }
}

TEST_CASE("chain against itself accepts at any epsilon") {
  const auto chain = onegin();
  for (const double eps : {1e-9, 1e-3, 0.5}) {
    const auto verdict = check_bisim(identity_relation(), eps, chain, chain);
    CHECK(verdict.accepted);
  }
  const auto minimal = minimal_epsilon(identity_relation(), chain, chain);
  CHECK(minimal.value == 0.0);
  CHECK(minimal.exact);
}

TEST_CASE("onegin vs biased: the minimal tolerance is the bias") {
  const auto reference = onegin();
  for (const double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto biased = bias_onegin(eps);
    const auto minimal = minimal_epsilon(identity_relation(), reference, biased);
    CHECK(std::abs(minimal.value - eps) <= 1e-12);
    CHECK_FALSE(minimal.exact);

    // The measured gap sits within rounding of eps; the definition is checked
    // strictly on the stored doubles, so acceptance is pinned relative to the
    // measured minimal value.
    CHECK(check_bisim(identity_relation(), minimal.value, reference, biased).accepted);
    CHECK(check_bisim(identity_relation(), minimal.value + 1e-12, reference, biased)
              .accepted);
    CHECK_FALSE(
        check_bisim(identity_relation(), minimal.value - 1e-9, reference, biased)
            .accepted);
  }
}

TEST_CASE("rejection reports the first violating closed set") {
  const auto reference = onegin();
  const auto biased = bias_onegin(0.01);
  const auto verdict = check_bisim(identity_relation(), 0.005, reference, biased);
  REQUIRE_FALSE(verdict.accepted);
  REQUIRE(verdict.witness.has_value());
  const auto& witness = *verdict.witness;
  CHECK(witness.condition == 3);
  CHECK(witness.set1 == 0b01);
  CHECK(witness.set2 == 0b01);
  CHECK(witness.s1 == 0);
  CHECK(witness.s2 == 0);
  CHECK(std::abs(witness.gap - 0.01) <= 1e-12);
}

TEST_CASE("label mismatch is condition 1") {
  RawChain raw;
  raw.labels = {"V", "C"};
  raw.states = {"v", "c"};
  raw.state_labels = {"C", "V"};  // swapped labels
  raw.initial = {0.5, 0.5};
  raw.transitions = {{0.5, 0.5}, {0.5, 0.5}};
  const auto swapped = validate(raw);

  const auto verdict = check_bisim(identity_relation(), 0.9, onegin(), swapped);
  REQUIRE_FALSE(verdict.accepted);
  CHECK(verdict.witness->condition == 1);
  CHECK_THROWS_AS(minimal_epsilon(identity_relation(), onegin(), swapped), Error);
  try {
    minimal_epsilon(identity_relation(), onegin(), swapped);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::LabelMismatch);
  }
}

TEST_CASE("acceptance is monotone in epsilon") {
  const auto reference = onegin();
  const auto biased = bias_onegin(0.05);
  bool accepted_before = false;
  for (int j = 1; j <= 40; ++j) {
    const double eps = j * 0.005;
    const bool accepted =
        check_bisim(identity_relation(), eps, reference, biased).accepted;
    if (accepted_before) CHECK(accepted);
    accepted_before = accepted;
  }
  CHECK(accepted_before);
}

TEST_CASE("bridge to the continuity bounds") {
  const auto reference = onegin();
  for (const double eps : {1e-1, 1e-2}) {
    const auto biased = bias_onegin(eps);
    const auto minimal = minimal_epsilon(identity_relation(), reference, biased);
    REQUIRE(minimal.value > 0.0);
    const auto report = ck_truncated(reference, biased, 12);
    CHECK(report.s_k <= ck_upper_bound(minimal.value, 2) + 1e-12);
    auto level = initial_level(reference, biased);
    for (int k = 1; k <= 6; ++k) {
      if (k > 1) level = extend(level, reference, biased);
      CHECK(level.tv <= tv_bisim_bound(minimal.value, k) + 1e-12);
    }
  }
}

TEST_CASE("relation loading resolves state names") {
  const auto a = onegin();
  const auto b = bias_onegin(0.01);
  const auto j = json::parse(R"({"pairs": [["v","v"], ["c","c"]]})");
  const auto relation = relation_from_json(j, a, b);
  REQUIRE(relation.pairs.size() == 2);
  CHECK(relation.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(relation.pairs[1] == std::pair<std::size_t, std::size_t>{1, 1});

  const auto bad = json::parse(R"({"pairs": [["v","nope"]]})");
  CHECK_THROWS_AS(relation_from_json(bad, a, b), Error);
  const auto no_pairs = json::parse(R"({"couples": []})");
  CHECK_THROWS_AS(relation_from_json(no_pairs, a, b), Error);
}
