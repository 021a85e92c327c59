#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <map>

#include "bratteli/group.hpp"
#include "bratteli/measure.hpp"

using namespace bratteli;

TEST_CASE("exact stationary measure of the 2-odometer is 2^{-n}") {
  auto d = BratteliDiagram::odometer(2);
  auto mu = exact_stationary_measure(d, 6);
  REQUIRE(mu.has_value());
  for (int n = 1; n <= 6; ++n)
    CHECK(mu->q(n, 0) == Rational(1, BigInt(1) << n));
  CHECK(mu->invariant_residual() == 0);
}

TEST_CASE("exact stationary measure of the all-ones diagram") {
  auto d = BratteliDiagram::all_ones2();
  auto mu = exact_stationary_measure(d, 5);
  REQUIRE(mu.has_value());
  for (int n = 1; n <= 5; ++n)
    for (int v = 0; v < 2; ++v) CHECK(mu->q(n, v) == Rational(1, BigInt(1) << n));
}

TEST_CASE("float stationary measure satisfies the residual contract") {
  auto d = BratteliDiagram::all_ones2();
  auto mu = stationary_measure(d, 8);
  CHECK(mu.invariant_residual() <= 1e-12);
  CHECK(mu.q(3, 0) == Catch::Approx(0.125).epsilon(1e-10));
}

TEST_CASE("stationary measure rejects non-primitive matrices") {
  auto split = BratteliDiagram::two_odometers(2);
  CHECK_THROWS_AS(stationary_measure(split, 4), MeasureError);
}

TEST_CASE("ergodic set of the 2-odometer is a single measure") {
  auto d = BratteliDiagram::odometer(2);
  auto res = approximate_ergodic_set(d, 8, 1e-6);
  REQUIRE(res.diagnostics.cluster_count == 1);
  CHECK(res.measures[0].q(1, 0) == Catch::Approx(0.5).margin(1e-12));
  CHECK(res.measures[0].invariant_residual() <= 1e-10);
}

TEST_CASE("polynomial example is uniquely ergodic at depth 40") {
  auto d = BratteliDiagram::polynomial_example();
  auto res = approximate_ergodic_set(d, 40, 1e-6);
  CHECK(res.diagnostics.cluster_count == 1);
  CHECK(res.diagnostics.inter_depth_spread < 1e-8);
}

TEST_CASE("two glued odometers give two ergodic measures") {
  auto d = BratteliDiagram::two_odometers(2);
  auto res = approximate_ergodic_set(d, 10, 1e-6);
  CHECK(res.diagnostics.cluster_count == 2);
  for (const auto& m : res.measures) CHECK(m.invariant_residual() <= 1e-10);
}

TEST_CASE("cylinder measures") {
  auto d = BratteliDiagram::odometer(2);
  PathTable t(d);
  auto mu = *exact_stationary_measure(d, 4);
  CHECK(mu.cylinder(t.path(3, 0, 5)) == Rational(1, 8));
  Rational total = 0;
  for (int l = 0; l < 16; ++l) total += mu.cylinder(t.path(4, 0, l));
  CHECK(total == 1);
}

TEST_CASE("approximated measure cylinder sums normalize") {
  auto d = BratteliDiagram::polynomial_example();
  auto res = approximate_ergodic_set(d, 40, 1e-6);
  const auto& mu = res.measures[0];
  auto h = d.path_counts(2);
  double total = 0;
  for (int v = 0; v < 2; ++v)
    total += h[static_cast<std::size_t>(v)].convert_to<double>() * mu.q(2, v);
  CHECK(total == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("clopen and product measures") {
  auto d = BratteliDiagram::odometer(2);
  PathTable t(d);
  auto mu = *exact_stationary_measure(d, 4);
  std::vector<Measure<Rational>> ms{mu};

  CHECK(clopen_measure(mu, ClopenSet::empty(2)) == 0);
  CHECK(clopen_measure(mu, ClopenSet::whole_space(t, 2)) == 1);

  ClopenSet three{2, {{0, 0}, {0, 1}, {0, 2}}};
  CHECK(clopen_measure(mu, three) == Rational(3, 4));
  CHECK(product_clopen_measure(ms, {2}, three) == Rational(9, 16));
  CHECK(product_clopen_measure(ms, {0}, three) == 1);  // empty product

  CHECK(clopen_measure(mu, three.complement(t)) == 1 - clopen_measure(mu, three));
}

TEST_CASE("sample_path matches cylinder measures empirically") {
  auto d = BratteliDiagram::odometer(2);
  PathTable t(d);
  auto mu = *exact_stationary_measure(d, 4);
  Rng rng(42);
  std::map<int, int> freq;
  const int N = 100000;
  for (int i = 0; i < N; ++i) freq[t.label(sample_path(mu, 2, rng))]++;
  // each level-2 cylinder has measure 1/4; 3 sigma binomial bound
  double sigma = std::sqrt(N * 0.25 * 0.75);
  for (int l = 0; l < 4; ++l)
    CHECK(std::abs(freq[l] - N * 0.25) <= 3 * sigma);
}

TEST_CASE("sample_path is deterministic for a fixed seed") {
  auto d = BratteliDiagram::odometer(2);
  auto mu = *exact_stationary_measure(d, 5);
  Rng a(7), b(7);
  for (int i = 0; i < 50; ++i) CHECK(sample_path(mu, 5, a) == sample_path(mu, 5, b));
}

TEST_CASE("degenerate measure concentrating on one chain samples deterministically") {
  auto d = BratteliDiagram::two_odometers(1);
  Measure<Rational> mu;
  mu.diagram = &d;
  mu.depth = 4;
  for (int n = 1; n <= 4; ++n) mu.levels.push_back({Rational(1), Rational(0)});
  CHECK(mu.invariant_residual() == 0);
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    FinitePath p = sample_path(mu, 4, rng);
    for (int v : p.vertices) CHECK(v == 0);
  }
}
