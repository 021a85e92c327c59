#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bratteli/measure.hpp"
#include "bratteli/paths.hpp"
#include "bratteli/rng.hpp"

namespace bratteli {

struct GroupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An element of G_n: one permutation of the canonical path labels per vertex
/// of V_n. Stored at its minimal defining level and lifted on demand.
struct GroupElement {
  int level = 0;
  std::vector<std::vector<int>> perms;  // perms[v][label] = image label

  static GroupElement identity(PathTable& t, int n) {
    GroupElement g;
    g.level = n;
    for (int v = 0; v < t.diagram().vertex_count(n); ++v) {
      std::vector<int> id(t.paths(n, v).size());
      for (std::size_t i = 0; i < id.size(); ++i) id[i] = static_cast<int>(i);
      g.perms.push_back(std::move(id));
    }
    return g;
  }

  bool is_identity() const {
    for (const auto& p : perms)
      for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] != static_cast<int>(i)) return false;
    return true;
  }

  friend bool operator==(const GroupElement& a, const GroupElement& b) = default;
};

/// A clopen set given as a union of level-n cylinders: the set of canonical
/// (vertex, label) pairs.
struct ClopenSet {
  int level = 0;
  std::set<std::pair<int, int>> labels;  // (vertex, label)

  static ClopenSet empty(int n) { return {n, {}}; }

  static ClopenSet whole_space(PathTable& t, int n) {
    ClopenSet a;
    a.level = n;
    for (int v = 0; v < t.diagram().vertex_count(n); ++v)
      for (int l = 0; l < static_cast<int>(t.paths(n, v).size()); ++l)
        a.labels.insert({v, l});
    return a;
  }

  bool contains(int v, int l) const { return labels.count({v, l}) > 0; }

  ClopenSet complement(PathTable& t) const {
    ClopenSet out = whole_space(t, level);
    for (const auto& x : labels) out.labels.erase(x);
    return out;
  }
};

inline ClopenSet lift_clopen(PathTable& t, const ClopenSet& a, int m) {
  if (m < a.level) throw GroupError("cannot lift a clopen set to a lower level");
  if (m == a.level) return a;
  ClopenSet out;
  out.level = m;
  for (int v = 0; v < t.diagram().vertex_count(m); ++v)
    for (int l = 0; l < static_cast<int>(t.paths(m, v).size()); ++l) {
      FinitePath pre = t.path(m, v, l).prefix(a.level);
      if (a.contains(pre.end_vertex(), t.label(pre))) out.labels.insert({v, l});
    }
  return out;
}

inline bool clopen_equal(PathTable& t, const ClopenSet& a, const ClopenSet& b) {
  int m = std::max(a.level, b.level);
  return lift_clopen(t, a, m).labels == lift_clopen(t, b, m).labels;
}

inline ClopenSet clopen_union(PathTable& t, const ClopenSet& a, const ClopenSet& b) {
  int m = std::max(a.level, b.level);
  ClopenSet la = lift_clopen(t, a, m), lb = lift_clopen(t, b, m);
  la.labels.insert(lb.labels.begin(), lb.labels.end());
  return la;
}

inline ClopenSet clopen_intersection(PathTable& t, const ClopenSet& a, const ClopenSet& b) {
  int m = std::max(a.level, b.level);
  ClopenSet la = lift_clopen(t, a, m), lb = lift_clopen(t, b, m);
  ClopenSet out;
  out.level = m;
  for (const auto& x : la.labels)
    if (lb.labels.count(x)) out.labels.insert(x);
  return out;
}

/// Lift g one level: the level-(n+1) path (p, e) maps to (sigma_w(p), e).
inline GroupElement lift_once(PathTable& t, const GroupElement& g) {
  const int n = g.level;
  GroupElement out;
  out.level = n + 1;
  for (int v = 0; v < t.diagram().vertex_count(n + 1); ++v) {
    const auto& list = t.paths(n + 1, v);
    std::vector<int> sigma(list.size());
    for (int l = 0; l < static_cast<int>(list.size()); ++l) {
      auto dec = t.decompose(n + 1, v, l);
      int w = dec.prefix_vertex;
      int image_prefix = g.perms[static_cast<std::size_t>(w)][static_cast<std::size_t>(dec.prefix_label)];
      FinitePath img = t.path(n, w, image_prefix).extended(dec.last_edge, v);
      sigma[static_cast<std::size_t>(l)] = t.label(img);
    }
    out.perms.push_back(std::move(sigma));
  }
  return out;
}

inline GroupElement lift(PathTable& t, GroupElement g, int m) {
  if (m < g.level) throw GroupError("cannot lift below the defining level");
  while (g.level < m) g = lift_once(t, g);
  return g;
}

inline GroupElement compose(PathTable& t, const GroupElement& a, const GroupElement& b) {
  int m = std::max(a.level, b.level);
  GroupElement la = lift(t, a, m), lb = lift(t, b, m);
  GroupElement out;
  out.level = m;
  for (std::size_t v = 0; v < la.perms.size(); ++v) {
    std::vector<int> p(la.perms[v].size());
    for (std::size_t i = 0; i < p.size(); ++i)
      p[i] = la.perms[v][static_cast<std::size_t>(lb.perms[v][i])];  // (a o b)(x) = a(b(x))
    out.perms.push_back(std::move(p));
  }
  return out;
}

inline GroupElement inverse(const GroupElement& g) {
  GroupElement out;
  out.level = g.level;
  for (const auto& p : g.perms) {
    std::vector<int> inv(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) inv[static_cast<std::size_t>(p[i])] = static_cast<int>(i);
    out.perms.push_back(std::move(inv));
  }
  return out;
}

inline bool elements_equal(PathTable& t, const GroupElement& a, const GroupElement& b) {
  int m = std::max(a.level, b.level);
  return lift(t, a, m) == lift(t, b, m);
}

/// Fix(g) as a union of level-n cylinders; exact since g permutes whole cylinders.
inline ClopenSet fixed_set(const GroupElement& g) {
  ClopenSet out;
  out.level = g.level;
  for (int v = 0; v < static_cast<int>(g.perms.size()); ++v)
    for (int l = 0; l < static_cast<int>(g.perms[static_cast<std::size_t>(v)].size()); ++l)
      if (g.perms[static_cast<std::size_t>(v)][static_cast<std::size_t>(l)] == l)
        out.labels.insert({v, l});
  return out;
}

inline ClopenSet support(PathTable& t, const GroupElement& g) {
  return fixed_set(g).complement(t);
}

template <class S>
S clopen_measure(const Measure<S>& mu, const ClopenSet& a) {
  S total = S(0);
  for (const auto& [v, l] : a.labels) total += mu.q(a.level, v);
  return total;
}

/// mu_alpha of a product set A^{|alpha|}: prod_i mu_i(A)^{alpha_i}.
template <class S>
S product_clopen_measure(const std::vector<Measure<S>>& measures,
                         const std::vector<int>& alpha, const ClopenSet& a) {
  S out = S(1);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] < 0) throw GroupError("alpha exponents must be >= 0");
    if (alpha[i] == 0) continue;
    S m = clopen_measure(measures.at(i), a);
    for (int e = 0; e < alpha[i]; ++e) out *= m;
  }
  return out;
}

template <class S>
S fix_measure(const Measure<S>& mu, const GroupElement& g) {
  return clopen_measure(mu, fixed_set(g));
}

template <class S>
S fix_measure_product(const std::vector<Measure<S>>& measures,
                      const std::vector<int>& alpha, const GroupElement& g) {
  return product_clopen_measure(measures, alpha, fixed_set(g));
}

/// G_n°(A) or L_n(C): per vertex, the labels the subgroup may permute freely;
/// every other label is fixed pointwise. Order = prod_v (free_v)!.
struct YoungSubgroup {
  int level = 0;
  std::vector<std::vector<int>> free;  // free[v] = sorted free labels

  BigInt order() const {
    BigInt o = 1;
    for (const auto& f : free) o *= factorial(static_cast<long>(f.size()));
    return o;
  }

  bool contains(const GroupElement& g) const {
    if (g.level != level) throw GroupError("membership test needs matching levels");
    for (std::size_t v = 0; v < g.perms.size(); ++v) {
      std::set<int> fv(free[v].begin(), free[v].end());
      for (std::size_t l = 0; l < g.perms[v].size(); ++l)
        if (g.perms[v][l] != static_cast<int>(l) && !fv.count(static_cast<int>(l)))
          return false;
    }
    return true;
  }
};

/// G_n°(A): free labels are those outside the lifted A.
inline YoungSubgroup pointwise_stabilizer(PathTable& t, const ClopenSet& a, int n) {
  ClopenSet la = lift_clopen(t, a, n);
  YoungSubgroup y;
  y.level = n;
  for (int v = 0; v < t.diagram().vertex_count(n); ++v) {
    std::vector<int> f;
    for (int l = 0; l < static_cast<int>(t.paths(n, v).size()); ++l)
      if (!la.contains(v, l)) f.push_back(l);
    y.free.push_back(std::move(f));
  }
  return y;
}

/// L_n(C): elements supported by C; free labels are those inside the lifted C.
inline YoungSubgroup local_subgroup(PathTable& t, const ClopenSet& c, int n) {
  ClopenSet lc = lift_clopen(t, c, n);
  YoungSubgroup y;
  y.level = n;
  for (int v = 0; v < t.diagram().vertex_count(n); ++v) {
    std::vector<int> f;
    for (int l = 0; l < static_cast<int>(t.paths(n, v).size()); ++l)
      if (lc.contains(v, l)) f.push_back(l);
    y.free.push_back(std::move(f));
  }
  return y;
}

/// Uniform element of the described subgroup: an independent shuffle of each
/// vertex's free labels.
inline GroupElement random_element(PathTable& t, const YoungSubgroup& y, Rng& rng) {
  GroupElement g = GroupElement::identity(t, y.level);
  for (std::size_t v = 0; v < y.free.size(); ++v) {
    std::vector<int> images = y.free[v];
    rng.shuffle(images);
    for (std::size_t i = 0; i < images.size(); ++i)
      g.perms[v][static_cast<std::size_t>(y.free[v][i])] = images[i];
  }
  return g;
}

/// Transposition of two labels at one vertex (test/CLI convenience).
inline GroupElement transposition(PathTable& t, int n, int v, int a, int b) {
  GroupElement g = GroupElement::identity(t, n);
  std::swap(g.perms[static_cast<std::size_t>(v)][static_cast<std::size_t>(a)],
            g.perms[static_cast<std::size_t>(v)][static_cast<std::size_t>(b)]);
  return g;
}

/// A small generating set of a Young subgroup: adjacent transpositions of
/// each vertex's free labels.
inline std::vector<GroupElement> young_generators(PathTable& t, const YoungSubgroup& y) {
  std::vector<GroupElement> gens;
  for (std::size_t v = 0; v < y.free.size(); ++v)
    for (std::size_t i = 0; i + 1 < y.free[v].size(); ++i)
      gens.push_back(transposition(t, y.level, static_cast<int>(v), y.free[v][i], y.free[v][i + 1]));
  return gens;
}

/// Order of the subgroup of prod_v Sym(h_v) generated by the lifted
/// generators; brute-force closure with a hard cap.
inline BigInt generated_subgroup_order(PathTable& t, const std::vector<GroupElement>& gens,
                                       int n, std::int64_t cap = 10000000) {
  std::vector<GroupElement> lifted;
  for (const auto& g : gens) lifted.push_back(lift(t, g, n));
  GroupElement id = GroupElement::identity(t, n);
  std::set<std::vector<std::vector<int>>> seen{id.perms};
  std::vector<GroupElement> frontier{id};
  while (!frontier.empty()) {
    std::vector<GroupElement> next;
    for (const auto& g : frontier)
      for (const auto& s : lifted) {
        GroupElement h = compose(t, s, g);
        if (seen.insert(h.perms).second) {
          if (static_cast<std::int64_t>(seen.size()) > cap)
            throw GroupError("generated subgroup exceeds the closure cap");
          next.push_back(std::move(h));
        }
      }
    frontier = std::move(next);
  }
  return BigInt(seen.size());
}

/// g applied to a path whose depth is >= level(g): the level-n prefix is
/// replaced by its sigma-image, the tail is kept.
inline FinitePath act_on_path(PathTable& t, const GroupElement& g, const FinitePath& p) {
  if (p.level < g.level) throw GroupError("path shorter than the element's level");
  FinitePath pre = p.prefix(g.level);
  int w = pre.end_vertex();
  int img = g.perms[static_cast<std::size_t>(w)][static_cast<std::size_t>(t.label(pre))];
  FinitePath out = t.path(g.level, w, img);
  for (int i = g.level; i < p.level; ++i)
    out = out.extended(p.edges[static_cast<std::size_t>(i)], p.vertices[static_cast<std::size_t>(i)]);
  return out;
}

inline ClopenSet act_on_clopen(PathTable& t, const GroupElement& g, const ClopenSet& a) {
  int m = std::max(g.level, a.level);
  ClopenSet la = lift_clopen(t, a, m);
  GroupElement lg = lift(t, g, m);
  ClopenSet out;
  out.level = m;
  for (const auto& [v, l] : la.labels)
    out.labels.insert({v, lg.perms[static_cast<std::size_t>(v)][static_cast<std::size_t>(l)]});
  return out;
}

}  // namespace bratteli
