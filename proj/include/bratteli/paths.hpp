#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "bratteli/diagram.hpp"

namespace bratteli {

/// A finite path from the root. edges[i] is the local index of the i-th edge
/// among the edges between its endpoints (0-based); vertices[i] is the target
/// vertex in V_{i+1}.
struct FinitePath {
  int level = 0;
  std::vector<int> edges;
  std::vector<int> vertices;

  int end_vertex() const { return vertices.back(); }

  FinitePath prefix(int n) const {
    FinitePath p;
    p.level = n;
    p.edges.assign(edges.begin(), edges.begin() + n);
    p.vertices.assign(vertices.begin(), vertices.begin() + n);
    return p;
  }

  FinitePath extended(int edge, int vertex) const {
    FinitePath p = *this;
    ++p.level;
    p.edges.push_back(edge);
    p.vertices.push_back(vertex);
    return p;
  }

  // Canonical order: lexicographic on the interleaved (vertex, edge) sequence.
  friend bool operator<(const FinitePath& a, const FinitePath& b) {
    int n = std::min(a.level, b.level);
    for (int i = 0; i < n; ++i) {
      if (a.vertices[i] != b.vertices[i]) return a.vertices[i] < b.vertices[i];
      if (a.edges[i] != b.edges[i]) return a.edges[i] < b.edges[i];
    }
    return a.level < b.level;
  }
  friend bool operator==(const FinitePath& a, const FinitePath& b) {
    return a.level == b.level && a.vertices == b.vertices && a.edges == b.edges;
  }
};

struct EnumerationCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Materializes E(v0, v) level by level with canonical integer labels
/// (position in the sorted per-vertex list). Lazy; levels are cached.
class PathTable {
 public:
  explicit PathTable(const BratteliDiagram& d, std::int64_t cap = 1000000)
      : d_(&d), cap_(cap) {}

  const BratteliDiagram& diagram() const { return *d_; }

  /// All paths of level n ending at v, sorted canonically.
  const std::vector<FinitePath>& paths(int n, int v) {
    build(n);
    return levels_[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(v)];
  }

  /// Canonical label of p among E(v0, end_vertex(p)).
  int label(const FinitePath& p) {
    const auto& list = paths(p.level, p.end_vertex());
    auto it = std::lower_bound(list.begin(), list.end(), p);
    if (it == list.end() || !(*it == p))
      throw std::runtime_error("path not found in table");
    return static_cast<int>(it - list.begin());
  }

  const FinitePath& path(int n, int v, int lbl) {
    const auto& list = paths(n, v);
    if (lbl < 0 || lbl >= static_cast<int>(list.size()))
      throw std::out_of_range("path label out of range");
    return list[static_cast<std::size_t>(lbl)];
  }

  /// Splits a level-n path label into (prefix vertex, prefix label, last edge).
  struct Decomposition {
    int prefix_vertex;
    int prefix_label;
    int last_edge;
  };
  Decomposition decompose(int n, int v, int lbl) {
    const FinitePath& p = path(n, v, lbl);
    FinitePath pre = p.prefix(n - 1);
    return {pre.end_vertex(), label(pre), p.edges.back()};
  }

  /// Label of the level-n prefix of a level-m path label (m >= n).
  int prefix_label(int m, int v, int lbl, int n) {
    if (n == m) return lbl;
    return label(path(m, v, lbl).prefix(n));
  }

  std::int64_t total_paths(int n) {
    build(n);
    std::int64_t total = 0;
    for (const auto& list : levels_[static_cast<std::size_t>(n) - 1])
      total += static_cast<std::int64_t>(list.size());
    return total;
  }

 private:
  void build(int n) {
    if (n < 1) throw std::out_of_range("path level must be >= 1");
    while (static_cast<int>(levels_.size()) < n) {
      int lvl = static_cast<int>(levels_.size()) + 1;
      std::vector<std::vector<FinitePath>> cur(
          static_cast<std::size_t>(d_->vertex_count(lvl)));
      if (lvl == 1) {
        for (int v = 0; v < d_->vertex_count(1); ++v)
          for (long e = 0; e < d_->root_edges()[static_cast<std::size_t>(v)]; ++e) {
            FinitePath p;
            p.level = 1;
            p.edges = {static_cast<int>(e)};
            p.vertices = {v};
            cur[static_cast<std::size_t>(v)].push_back(std::move(p));
          }
      } else {
        const IntMatrix f = d_->matrix(lvl - 1);
        const auto& prev = levels_.back();
        for (std::size_t v = 0; v < cur.size(); ++v)
          for (std::size_t w = 0; w < prev.size(); ++w)
            for (const FinitePath& p : prev[w])
              for (long e = 0; e < f[v][w]; ++e)
                cur[v].push_back(p.extended(static_cast<int>(e), static_cast<int>(v)));
      }
      std::int64_t total = 0;
      for (auto& list : cur) {
        std::sort(list.begin(), list.end());
        total += static_cast<std::int64_t>(list.size());
      }
      if (total > cap_)
        throw EnumerationCapError("path enumeration cap exceeded at level " +
                                  std::to_string(lvl) + " (" + std::to_string(total) +
                                  " > " + std::to_string(cap_) + ")");
      levels_.push_back(std::move(cur));
    }
  }

  const BratteliDiagram* d_;
  std::int64_t cap_;
  std::vector<std::vector<std::vector<FinitePath>>> levels_;  // [level-1][vertex]
};

}  // namespace bratteli
