#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bratteli/diagram.hpp"
#include "bratteli/numeric.hpp"

namespace bratteli {

/// Element of Z[i, sqrt(2)]: a + b*i + c*sqrt(2) + d*i*sqrt(2). Used to carry
/// the Hermite recurrence at x = i*sqrt(2) exactly.
struct QuadInt {
  BigInt a, b, c, d;

  friend QuadInt operator+(const QuadInt& x, const QuadInt& y) {
    return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
  }
  friend QuadInt operator-(const QuadInt& x, const QuadInt& y) {
    return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
  }
  friend QuadInt operator*(const QuadInt& x, const QuadInt& y) {
    return {x.a * y.a - x.b * y.b + 2 * x.c * y.c - 2 * x.d * y.d,
            x.a * y.b + x.b * y.a + 2 * x.c * y.d + 2 * x.d * y.c,
            x.a * y.c + x.c * y.a - x.b * y.d - x.d * y.b,
            x.a * y.d + x.d * y.a + x.b * y.c + x.c * y.b};
  }
  friend QuadInt operator*(const BigInt& k, const QuadInt& x) {
    return {k * x.a, k * x.b, k * x.c, k * x.d};
  }

  /// Exact division by sqrt(2); the rational parts must be even.
  QuadInt div_sqrt2() const {
    if (a % 2 != 0 || b % 2 != 0)
      throw std::runtime_error("QuadInt: not divisible by sqrt(2)");
    return {c, d, a / 2, b / 2};
  }
};

/// H_m(i*sqrt(2)) by the physicists' three-term recurrence
/// H_{m+1}(x) = 2x H_m(x) - 2m H_{m-1}(x), carried in Z[i, sqrt(2)].
inline QuadInt hermite_at_i_sqrt2(int m) {
  const QuadInt x{0, 0, 0, 1};  // i*sqrt(2)
  QuadInt h0{1, 0, 0, 0};
  if (m == 0) return h0;
  QuadInt h1 = BigInt(2) * x;
  for (int k = 1; k < m; ++k) {
    QuadInt next = BigInt(2) * (x * h1) - BigInt(2 * k) * h0;
    h0 = h1;
    h1 = next;
  }
  return h1;
}

/// 2 * (-i/sqrt(2))^{n-2} * H_{n-2}(i*sqrt(2)), n >= 2; provably an integer.
inline BigInt hermite_path_count(int n) {
  if (n < 2) throw std::invalid_argument("hermite_path_count needs n >= 2");
  QuadInt v = BigInt(2) * hermite_at_i_sqrt2(n - 2);
  const QuadInt minus_i{0, -1, 0, 0};
  for (int k = 0; k < n - 2; ++k) v = minus_i * v;
  for (int k = 0; k < n - 2; ++k) v = v.div_sqrt2();
  if (v.b != 0 || v.c != 0 || v.d != 0)
    throw std::runtime_error("hermite_path_count: result is not rational-integral");
  return v.a;
}

struct HermiteReport {
  bool passed = false;
  int matched_bottom_row = -1;  // which matrix row is the bottom vertex
  std::string detail;
};

/// Checks the polynomial-example identities h_b^{(n)} = 2(-i/sqrt2)^{n-2}
/// H_{n-2}(i sqrt2) for n = 2..n_max and h_t^{(n)} = n h_b^{(n-1)} +
/// (n-3) h_b^{(n-2)} for n = 3..n_max, trying both vertex labelings.
inline HermiteReport verify_hermite_identity(int n_max = 20) {
  BratteliDiagram d = BratteliDiagram::polynomial_example();
  std::vector<std::vector<BigInt>> counts;  // counts[n-1] = h^{(n)}
  for (int n = 1; n <= n_max; ++n) counts.push_back(d.path_counts(n));

  HermiteReport report;
  for (int bottom : {0, 1}) {
    const int top = 1 - bottom;
    auto hb = [&](int n) { return counts[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(bottom)]; };
    auto ht = [&](int n) { return counts[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(top)]; };
    bool ok = true;
    for (int n = 2; n <= n_max && ok; ++n) ok = hb(n) == hermite_path_count(n);
    for (int n = 3; n <= n_max && ok; ++n)
      ok = ht(n) == BigInt(n) * hb(n - 1) + BigInt(n - 3) * hb(n - 2);
    if (ok) {
      report.passed = true;
      report.matched_bottom_row = bottom;
      report.detail = "bottom vertex = matrix row " + std::to_string(bottom);
      return report;
    }
  }
  report.detail = "no vertex labeling matches the Hermite identities";
  return report;
}

}  // namespace bratteli
