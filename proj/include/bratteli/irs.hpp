#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "bratteli/character.hpp"
#include "bratteli/group.hpp"
#include "bratteli/measure.hpp"
#include "bratteli/rng.hpp"

namespace bratteli {

/// Finite-depth trace of Stab_G(x_bar) for x_bar drawn from mu_alpha:
/// each coordinate is a depth-m path sampled from its ergodic measure.
/// Determines Stab(x_bar) ∩ G_n exactly for every n <= m.
struct StabilizerTrace {
  std::vector<int> alpha;
  int depth = 0;
  std::vector<std::pair<std::size_t, FinitePath>> coords;  // (measure index, path)
};

template <class S>
StabilizerTrace sample_stabilizer(const std::vector<int>& alpha,
                                  const std::vector<Measure<S>>& measures, int depth,
                                  Rng& rng) {
  StabilizerTrace t;
  t.alpha = alpha;
  t.depth = depth;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    for (int e = 0; e < alpha[i]; ++e)
      t.coords.emplace_back(i, sample_path(measures.at(i), depth, rng));
  return t;
}

/// g ∈ Stab(x_bar) iff g fixes every coordinate's level-level(g) prefix.
/// Exact for level(g) <= depth; raising the depth never changes the answer.
inline bool contains(PathTable& pt, const StabilizerTrace& t, const GroupElement& g) {
  if (g.level > t.depth) throw GroupError("element level exceeds trace depth");
  for (const auto& [i, p] : t.coords) {
    FinitePath pre = p.prefix(g.level);
    int lbl = pt.label(pre);
    if (g.perms[static_cast<std::size_t>(pre.end_vertex())][static_cast<std::size_t>(lbl)] != lbl)
      return false;
  }
  return true;
}

/// g Stab(x_bar) g^-1 = Stab(g x_bar).
inline StabilizerTrace conjugate(PathTable& pt, const StabilizerTrace& t,
                                 const GroupElement& g) {
  if (g.level > t.depth) throw GroupError("element level exceeds trace depth");
  StabilizerTrace out = t;
  for (auto& [i, p] : out.coords) p = act_on_path(pt, g, p);
  return out;
}

/// Trace equality: per measure label, equal multisets of depth-m paths
/// (Stab is insensitive to coordinate order within one measure).
inline bool traces_equal(const StabilizerTrace& a, const StabilizerTrace& b) {
  if (a.depth != b.depth || a.alpha != b.alpha) return false;
  std::map<std::size_t, std::vector<FinitePath>> ga, gb;
  for (const auto& [i, p] : a.coords) ga[i].push_back(p);
  for (const auto& [i, p] : b.coords) gb[i].push_back(p);
  for (auto& [i, v] : ga) std::sort(v.begin(), v.end());
  for (auto& [i, v] : gb) std::sort(v.begin(), v.end());
  return ga == gb;
}

/// Two distinct coordinates sharing their full depth-m path.
inline bool has_collision(const StabilizerTrace& t) {
  for (std::size_t i = 0; i < t.coords.size(); ++i)
    for (std::size_t j = i + 1; j < t.coords.size(); ++j)
      if (t.coords[i].second == t.coords[j].second) return true;
  return false;
}

struct IrsEstimate {
  double estimate = 0;
  double std_err = 0;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double collision_rate = 0;
};

namespace detail {

inline IrsEstimate finish(std::int64_t succ, std::int64_t trials, std::int64_t collisions) {
  IrsEstimate e;
  e.successes = succ;
  e.trials = trials;
  e.estimate = static_cast<double>(succ) / static_cast<double>(trials);
  e.std_err = std::sqrt(std::max(0.0, e.estimate * (1 - e.estimate)) /
                        static_cast<double>(trials));
  e.collision_rate = static_cast<double>(collisions) / static_cast<double>(trials);
  return e;
}

template <class S, class Pred>
IrsEstimate estimate_event(PathTable& pt, const std::vector<int>& alpha,
                           const std::vector<Measure<S>>& measures, std::int64_t samples,
                           int depth, std::uint64_t seed, int workers, Pred&& pred) {
  std::int64_t succ = 0, collisions = 0;
  for (int w = 0; w < workers; ++w) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(w));
    std::int64_t quota = samples / workers + (w < samples % workers ? 1 : 0);
    for (std::int64_t s = 0; s < quota; ++s) {
      StabilizerTrace t = sample_stabilizer(alpha, measures, depth, rng);
      if (has_collision(t)) ++collisions;
      if (pred(t)) ++succ;
    }
  }
  return finish(succ, samples, collisions);
}

}  // namespace detail

/// Empirical Prob(g ∈ K) under phi_alpha; converges to chi_alpha(g).
template <class S>
IrsEstimate estimate_chi(PathTable& pt, const std::vector<int>& alpha,
                         const std::vector<Measure<S>>& measures, const GroupElement& g,
                         std::int64_t samples, int depth, std::uint64_t seed,
                         int workers = 1) {
  if (depth < g.level) throw GroupError("depth must cover the element's level");
  return detail::estimate_event(pt, alpha, measures, samples, depth, seed, workers,
                                [&](const StabilizerTrace& t) { return contains(pt, t, g); });
}

/// Empirical Prob(gKg^-1 = K). Setwise fixing without pointwise fixing is a
/// finite-depth artifact (coordinates colliding or trading places under g);
/// such samples are counted into collision_rate, so the gap to estimate_chi
/// is bounded by the reported collision budget.
template <class S>
IrsEstimate estimate_chi_prime(PathTable& pt, const std::vector<int>& alpha,
                               const std::vector<Measure<S>>& measures,
                               const GroupElement& g, std::int64_t samples, int depth,
                               std::uint64_t seed, int workers = 1) {
  if (depth < g.level) throw GroupError("depth must cover the element's level");
  std::int64_t succ = 0, collisions = 0;
  for (int w = 0; w < workers; ++w) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(w));
    std::int64_t quota = samples / workers + (w < samples % workers ? 1 : 0);
    for (std::int64_t s = 0; s < quota; ++s) {
      StabilizerTrace t = sample_stabilizer(alpha, measures, depth, rng);
      bool setwise = traces_equal(conjugate(pt, t, g), t);
      bool pointwise = contains(pt, t, g);
      if (has_collision(t) || (setwise && !pointwise)) ++collisions;
      if (setwise) ++succ;
    }
  }
  return detail::finish(succ, samples, collisions);
}

/// Sufficient-at-depth test for Stab(x_bar) ∈ F(A): every coordinate's
/// cylinder lies inside A, so all of G°(A) fixes the coordinates.
inline bool f_membership(PathTable& pt, const StabilizerTrace& t, const ClopenSet& a) {
  if (a.level > t.depth) throw GroupError("set level exceeds trace depth");
  for (const auto& [i, p] : t.coords) {
    FinitePath pre = p.prefix(a.level);
    if (!a.contains(pre.end_vertex(), pt.label(pre))) return false;
  }
  return true;
}

/// Empirical phi_alpha(F(A)); converges to prod_i mu_i(A)^{alpha_i}.
template <class S>
IrsEstimate empirical_f_measure(PathTable& pt, const std::vector<int>& alpha,
                                const std::vector<Measure<S>>& measures,
                                const ClopenSet& a, std::int64_t samples, int depth,
                                std::uint64_t seed, int workers = 1) {
  if (depth < a.level) throw GroupError("depth must cover the set's level");
  return detail::estimate_event(
      pt, alpha, measures, samples, depth, seed, workers,
      [&](const StabilizerTrace& t) { return f_membership(pt, t, a); });
}

}  // namespace bratteli
