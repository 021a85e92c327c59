#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "bratteli/character.hpp"

using namespace bratteli;

namespace {

struct Ctx {
  BratteliDiagram d = BratteliDiagram::odometer(2);
  PathTable t{d};
  std::vector<Measure<Rational>> ms{*exact_stationary_measure(d, 8)};
};

GroupElement random_full(PathTable& t, int n, Rng& rng) {
  YoungSubgroup full = pointwise_stabilizer(t, ClopenSet::empty(n), n);
  return random_element(t, full, rng);
}

}  // namespace

TEST_CASE("character values at the identity and the zero multi-index") {
  Ctx c;
  GroupElement e = GroupElement::identity(c.t, 2);
  Rng rng(2);
  GroupElement g = random_full(c.t, 2, rng);
  CHECK(evaluate(CharacterSpec::chi_alpha({3}), e, c.ms) == 1);
  CHECK(evaluate(CharacterSpec::chi_reg(), e, c.ms) == 1);
  CHECK(evaluate(CharacterSpec::chi_alpha({0}), g, c.ms) == 1);
}

TEST_CASE("chi_alpha of a level-2 transposition") {
  Ctx c;
  GroupElement g = transposition(c.t, 2, 0, 0, 1);
  CHECK(evaluate(CharacterSpec::chi_alpha({2}), g, c.ms) == Rational(1, 4));
}

TEST_CASE("regular character vanishes off the identity") {
  Ctx c;
  GroupElement g = transposition(c.t, 2, 0, 0, 1);
  CHECK(evaluate(CharacterSpec::chi_reg(), g, c.ms) == 0);
  CHECK(evaluate(CharacterSpec::chi_reg(), lift(c.t, g, 4), c.ms) == 0);
}

TEST_CASE("convex combinations evaluate linearly") {
  Ctx c;
  GroupElement g = transposition(c.t, 2, 0, 0, 1);
  auto spec = CharacterSpec::combination(
      {{Rational(1, 2), CharacterSpec::chi_alpha({1})},
       {Rational(1, 2), CharacterSpec::chi_reg()}});
  CHECK(evaluate(spec, g, c.ms) == Rational(1, 4));
  CHECK(evaluate(spec, GroupElement::identity(c.t, 1), c.ms) == 1);
  CHECK_THROWS_AS(CharacterSpec::combination({{Rational(1, 3), CharacterSpec::chi_reg()}}),
                  CharacterError);
}

TEST_CASE("centrality: chi(ab) = chi(ba) exactly") {
  Ctx c;
  Rng rng(19);
  std::vector<std::pair<GroupElement, GroupElement>> pairs;
  for (int i = 0; i < 25; ++i)
    pairs.emplace_back(random_full(c.t, 2, rng), random_full(c.t, 3, rng));
  CHECK(check_central(c.t, CharacterSpec::chi_alpha({1}), pairs, c.ms) == 0);
  CHECK(check_central(c.t, CharacterSpec::chi_alpha({2}), pairs, c.ms) == 0);
  CHECK(check_central(c.t, CharacterSpec::chi_reg(), pairs, c.ms) == 0);
}

TEST_CASE("positive semidefiniteness of Gram matrices") {
  Ctx c;
  GroupElement e = GroupElement::identity(c.t, 2);
  CHECK(check_psd(c.t, CharacterSpec::chi_alpha({1}), {e}, c.ms) ==
        Catch::Approx(1.0).margin(1e-12));

  Rng rng(7);
  std::vector<GroupElement> els;
  for (int i = 0; i < 10; ++i) els.push_back(random_full(c.t, 2, rng));
  CHECK(check_psd(c.t, CharacterSpec::chi_alpha({1}), els, c.ms) >= -1e-9);
  CHECK(check_psd(c.t, CharacterSpec::chi_alpha({2}), els, c.ms) >= -1e-9);
}

TEST_CASE("exact average over the trivial subgroup is 1") {
  Ctx c;
  YoungSubgroup trivial = pointwise_stabilizer(c.t, ClopenSet::whole_space(c.t, 2), 2);
  CHECK(exact_average(c.t, trivial, {2}, c.ms) == 1);
}

TEST_CASE("exact average over Sym(2) at level 1 is 1/2") {
  Ctx c;
  YoungSubgroup full = pointwise_stabilizer(c.t, ClopenSet::empty(1), 1);
  CHECK(exact_average(c.t, full, {1}, c.ms) == Rational(1, 2));
  CHECK(exact_average(c.t, full, {1}, c.ms) == brute_force_average(c.t, full, {1}, c.ms));
}

TEST_CASE("exact average over the full group at level n is 2^{-n}") {
  Ctx c;
  for (int n = 1; n <= 6; ++n) {
    YoungSubgroup full = pointwise_stabilizer(c.t, ClopenSet::empty(n), n);
    CHECK(exact_average(c.t, full, {1}, c.ms) == Rational(1, BigInt(1) << n));
  }
}

TEST_CASE("exact average equals brute-force enumeration (oracle equivalence)") {
  Ctx c;
  auto ones = BratteliDiagram::all_ones2();
  PathTable t2(ones);
  std::vector<Measure<Rational>> ms2{*exact_stationary_measure(ones, 6)};

  // 2-odometer cases
  for (int n : {1, 2, 3}) {
    for (const ClopenSet& a :
         {ClopenSet::empty(1), ClopenSet{1, {{0, 0}}}, ClopenSet{2, {{0, 0}, {0, 3}}}}) {
      if (a.level > n) continue;
      YoungSubgroup y = pointwise_stabilizer(c.t, a, n);
      if (y.order() > 100000) continue;
      for (const std::vector<int>& alpha : {std::vector<int>{1}, std::vector<int>{2}})
        CHECK(exact_average(c.t, y, alpha, c.ms) == brute_force_average(c.t, y, alpha, c.ms));
    }
  }
  // all-ones cases (two vertices per level)
  for (int n : {1, 2}) {
    for (const ClopenSet& a : {ClopenSet::empty(1), ClopenSet{1, {{0, 0}}}}) {
      YoungSubgroup y = pointwise_stabilizer(t2, a, n);
      for (const std::vector<int>& alpha : {std::vector<int>{1}, std::vector<int>{2}})
        CHECK(exact_average(t2, y, alpha, ms2) == brute_force_average(t2, y, alpha, ms2));
    }
  }
}

TEST_CASE("monte carlo average matches the exact value") {
  Ctx c;
  YoungSubgroup y = pointwise_stabilizer(c.t, ClopenSet::empty(3), 3);
  Rational exact = exact_average(c.t, y, {2}, c.ms);
  auto mc = monte_carlo_average(c.t, y, {2}, c.ms, 100000, 99);
  CHECK(std::abs(mc.estimate - to_double(exact)) <= 3 * mc.std_err);

  // trivial subgroup: every draw equals 1
  YoungSubgroup trivial = pointwise_stabilizer(c.t, ClopenSet::whole_space(c.t, 2), 2);
  auto mc2 = monte_carlo_average(c.t, trivial, {2}, c.ms, 100, 1);
  CHECK(mc2.estimate == 1.0);
  CHECK(mc2.std_err == 0.0);

  // deterministic given a fixed seed
  auto a = monte_carlo_average(c.t, y, {2}, c.ms, 5000, 4, 2);
  auto b = monte_carlo_average(c.t, y, {2}, c.ms, 5000, 4, 2);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_err == b.std_err);
}

TEST_CASE("average profile: A empty, alpha (1), levels 1..6") {
  Ctx c;
  auto rows = average_profile(c.t, ClopenSet::empty(1), {1}, c.ms, {1, 2, 3, 4, 5, 6});
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].exact);
    CHECK(rows[i].value == Rational(1, BigInt(1) << (i + 1)));
    if (i > 0) CHECK(rows[i].value < rows[i - 1].value);
  }
}

TEST_CASE("average profile: A a level-1 cylinder stays above mu(A)") {
  Ctx c;
  ClopenSet a{1, {{0, 0}}};
  auto rows = average_profile(c.t, a, {1}, c.ms, {1, 2, 3, 4, 5, 6});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].value == Rational(1, 2) + Rational(1, BigInt(1) << (i + 1)));
    CHECK(rows[i].value >= Rational(1, 2));
    if (i > 0) CHECK(rows[i].value <= rows[i - 1].value);
  }
}

TEST_CASE("average profile with the zero multi-index is constant 1") {
  Ctx c;
  auto rows = average_profile(c.t, ClopenSet::empty(1), {0}, c.ms, {1, 2, 3});
  for (const auto& r : rows) CHECK(r.value == 1);
}

TEST_CASE("inclusion-exclusion identity holds exactly") {
  Ctx c;
  for (int p : {1, 2})
    for (const std::vector<int>& alpha : {std::vector<int>{1}, std::vector<int>{2}}) {
      auto res = verify_iep(c.t, c.ms, alpha, 2, p);
      CHECK(res.residual == 0);
    }
}

TEST_CASE("verify_iep rejects p covering the whole partition") {
  Ctx c;
  CHECK_THROWS_AS(verify_iep(c.t, c.ms, {1}, 2, 4), IepHypothesisError);
}

TEST_CASE("verify_iep p=1 equals the direct union measure") {
  Ctx c;
  auto res = verify_iep(c.t, c.ms, {1}, 2, 1);
  // union over singletons of C^1 is all of X
  CHECK(res.lhs == 1);
  CHECK(res.rhs == 1);
}
