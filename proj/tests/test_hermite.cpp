#include <catch2/catch_amalgamated.hpp>

#include "bratteli/hermite.hpp"

using namespace bratteli;

TEST_CASE("QuadInt multiplication models Z[i, sqrt(2)]") {
  QuadInt i{0, 1, 0, 0}, s2{0, 0, 1, 0}, is2{0, 0, 0, 1};
  QuadInt i2 = i * i;
  CHECK(i2.a == -1);
  QuadInt two = s2 * s2;
  CHECK(two.a == 2);
  QuadInt m2 = is2 * is2;
  CHECK(m2.a == -2);
  CHECK((i * s2).d == 1);
}

TEST_CASE("division by sqrt(2) is exact or throws") {
  QuadInt x{4, 2, 3, 5};
  QuadInt y = x.div_sqrt2();
  CHECK(y.a == 3);
  CHECK(y.b == 5);
  CHECK(y.c == 2);
  CHECK(y.d == 1);
  QuadInt odd{1, 0, 0, 0};
  CHECK_THROWS(odd.div_sqrt2());
}

TEST_CASE("Hermite closed form reproduces the bottom path counts") {
  // frozen from an independent symbolic evaluation of
  // 2(-i/sqrt2)^{n-2} H_{n-2}(i sqrt2), n = 2..8
  std::vector<BigInt> expected{2, 4, 10, 28, 86, 284, 998};
  for (int n = 2; n <= 8; ++n)
    CHECK(hermite_path_count(n) == expected[static_cast<std::size_t>(n) - 2]);
}

TEST_CASE("Hermite identity check passes on the polynomial example") {
  HermiteReport r = verify_hermite_identity(20);
  CHECK(r.passed);
  CHECK(r.matched_bottom_row == 0);
}

TEST_CASE("Hermite values agree with the incidence recurrence up to n=20") {
  auto d = BratteliDiagram::polynomial_example();
  for (int n = 2; n <= 20; ++n)
    CHECK(hermite_path_count(n) == d.path_counts(n)[0]);
}
