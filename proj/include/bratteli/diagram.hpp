#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bratteli/numeric.hpp"

namespace bratteli {

using IntMatrix = std::vector<std::vector<long>>;     // row-major
using BigMatrix = std::vector<std::vector<BigInt>>;

enum class Continuation { truncated, stationary, polynomial_example };

inline std::string to_string(Continuation c) {
  switch (c) {
    case Continuation::truncated: return "truncated";
    case Continuation::stationary: return "stationary";
    case Continuation::polynomial_example: return "polynomial-example";
  }
  return "?";
}

struct DiagramError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A Bratteli diagram given by a finite prefix of incidence matrices plus a
/// continuation rule. F_n is |V_{n+1}| x |V_n|; entry (v,w) counts the edges
/// from w in V_n to v in V_{n+1}. Level 1 edge counts from the root are
/// root_edges. Immutable after construction.
class BratteliDiagram {
 public:
  BratteliDiagram(std::vector<long> root_edges, std::vector<IntMatrix> matrices,
                  Continuation cont)
      : root_edges_(std::move(root_edges)),
        matrices_(std::move(matrices)),
        cont_(cont) {
    validate();
  }

  // --- built-in families ---

  /// Odometer with r edges per level (single vertex per level).
  static BratteliDiagram odometer(long r) {
    return BratteliDiagram({r}, {{{r}}}, Continuation::stationary);
  }

  /// 2x2 all-ones stationary diagram.
  static BratteliDiagram all_ones2() {
    return BratteliDiagram({1, 1}, {{{1, 1}, {1, 1}}}, Continuation::stationary);
  }

  /// The F_n = [[1,1],[n,1]] family; row 0 is the bottom vertex.
  static BratteliDiagram polynomial_example() {
    return BratteliDiagram({1, 1}, {}, Continuation::polynomial_example);
  }

  /// Two r-odometers joined only at the root (block-diagonal, non-simple).
  static BratteliDiagram two_odometers(long r) {
    return BratteliDiagram({r, r}, {{{r, 0}, {0, r}}}, Continuation::stationary);
  }

  const std::vector<long>& root_edges() const { return root_edges_; }
  Continuation continuation() const { return cont_; }
  const std::vector<IntMatrix>& stored_matrices() const { return matrices_; }

  /// Number of explicitly stored levels N (root_edges covers level 1).
  int stored_levels() const { return static_cast<int>(matrices_.size()) + 1; }

  bool has_level(int n) const {
    return n >= 1 && (cont_ != Continuation::truncated || n <= stored_levels());
  }

  int vertex_count(int n) const {
    require_level(n);
    if (n <= stored_levels()) {
      if (n == 1) return static_cast<int>(root_edges_.size());
      return static_cast<int>(matrices_[static_cast<std::size_t>(n) - 2].size());
    }
    if (cont_ == Continuation::polynomial_example) return 2;
    return static_cast<int>(matrices_.back().size());
  }

  /// Incidence matrix F_n (level n -> n+1), generated on demand past the
  /// stored prefix.
  IntMatrix matrix(int n) const {
    if (n < 1 || !has_level(n + 1))
      throw DiagramError("matrix index out of range: F_" + std::to_string(n));
    if (n <= stored_levels() - 1) return matrices_[static_cast<std::size_t>(n) - 1];
    if (cont_ == Continuation::polynomial_example) return {{1, 1}, {n, 1}};
    return matrices_.back();
  }

  /// Path counts h^{(n)}: h^{(1)} = root_edges, h^{(n+1)} = F_n h^{(n)}.
  std::vector<BigInt> path_counts(int n) const {
    require_level(n);
    std::vector<BigInt> h(root_edges_.begin(), root_edges_.end());
    for (int k = 1; k < n; ++k) h = apply(matrix(k), h);
    return h;
  }

  /// Product F_{m-1} ... F_n; entry (v,w) counts paths from w in V_n to v in V_m.
  BigMatrix telescope(int n, int m) const {
    if (!(1 <= n && n < m)) throw DiagramError("telescope requires 1 <= n < m");
    require_level(m);
    BigMatrix t = to_big(matrix(n));
    for (int k = n + 1; k < m; ++k) t = multiply(to_big(matrix(k)), t);
    return t;
  }

  bool is_simple_window(int n, int m) const {
    for (const auto& row : telescope(n, m))
      for (const auto& e : row)
        if (e < 1) return false;
    return true;
  }

  bool is_even_window(int n, int m) const {
    for (const auto& row : telescope(n, m))
      for (const auto& e : row)
        if (e < 1 || e % 2 != 0) return false;
    return true;
  }

  /// First m in (n, m_max] with an all-positive window, or nullopt (unknown).
  std::optional<int> first_simple_window(int n, int m_max) const {
    for (int m = n + 1; m <= m_max && has_level(m); ++m)
      if (is_simple_window(n, m)) return m;
    return std::nullopt;
  }

  std::optional<int> first_even_window(int n, int m_max) const {
    for (int m = n + 1; m <= m_max && has_level(m); ++m)
      if (is_even_window(n, m)) return m;
    return std::nullopt;
  }

  static std::vector<BigInt> apply(const IntMatrix& f, const std::vector<BigInt>& h) {
    std::vector<BigInt> out(f.size(), BigInt(0));
    for (std::size_t v = 0; v < f.size(); ++v)
      for (std::size_t w = 0; w < h.size(); ++w) out[v] += f[v][w] * h[w];
    return out;
  }

 private:
  static BigMatrix to_big(const IntMatrix& f) {
    BigMatrix out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
      out[i].assign(f[i].begin(), f[i].end());
    return out;
  }

  static BigMatrix multiply(const BigMatrix& a, const BigMatrix& b) {
    BigMatrix out(a.size(), std::vector<BigInt>(b[0].size(), BigInt(0)));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t k = 0; k < b.size(); ++k)
        for (std::size_t j = 0; j < b[0].size(); ++j)
          out[i][j] += a[i][k] * b[k][j];
    return out;
  }

  void require_level(int n) const {
    if (!has_level(n))
      throw DiagramError("level " + std::to_string(n) +
                         " out of range for a truncated diagram with " +
                         std::to_string(stored_levels()) + " levels");
  }

  void validate() const {
    if (root_edges_.empty()) throw DiagramError("root_edges must be nonempty");
    for (std::size_t i = 0; i < root_edges_.size(); ++i)
      if (root_edges_[i] < 1)
        throw DiagramError("root_edges[" + std::to_string(i) + "] must be >= 1");
    std::size_t prev = root_edges_.size();
    for (std::size_t k = 0; k < matrices_.size(); ++k) {
      const auto& f = matrices_[k];
      const std::string at = "F_" + std::to_string(k + 1);
      if (f.empty()) throw DiagramError(at + " is empty");
      for (std::size_t r = 0; r < f.size(); ++r) {
        if (f[r].size() != prev)
          throw DiagramError(at + " row " + std::to_string(r) + " has " +
                             std::to_string(f[r].size()) + " entries, expected " +
                             std::to_string(prev));
        bool row_nonzero = false;
        for (long e : f[r]) {
          if (e < 0) throw DiagramError(at + " has a negative entry");
          row_nonzero |= e > 0;
        }
        if (!row_nonzero)
          throw DiagramError(at + " row " + std::to_string(r) +
                             " is zero (vertex with no incoming edges)");
      }
      for (std::size_t c = 0; c < prev; ++c) {
        bool col_nonzero = false;
        for (const auto& row : f) col_nonzero |= row[c] > 0;
        if (!col_nonzero)
          throw DiagramError(at + " column " + std::to_string(c) +
                             " is zero (vertex with no outgoing edges)");
      }
      prev = f.size();
    }
    if (cont_ == Continuation::polynomial_example) {
      int top = stored_levels() == 1 ? static_cast<int>(root_edges_.size())
                                     : static_cast<int>(matrices_.back().size());
      if (top != 2)
        throw DiagramError("polynomial-example continuation needs 2 vertices per level");
    }
  }

  std::vector<long> root_edges_;
  std::vector<IntMatrix> matrices_;
  Continuation cont_;
};

}  // namespace bratteli
