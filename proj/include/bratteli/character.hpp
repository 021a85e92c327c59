#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "bratteli/group.hpp"
#include "bratteli/measure.hpp"
#include "bratteli/rng.hpp"

namespace bratteli {

struct CharacterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// chi_alpha, the regular character, or a convex combination of specs.
struct CharacterSpec {
  enum class Kind { alpha, regular, combination };
  Kind kind = Kind::alpha;
  std::vector<int> alpha;  // exponents, aligned with the measure list
  std::vector<std::pair<Rational, CharacterSpec>> parts;  // combination

  static CharacterSpec chi_alpha(std::vector<int> a) {
    CharacterSpec s;
    s.kind = Kind::alpha;
    s.alpha = std::move(a);
    return s;
  }
  static CharacterSpec chi_reg() {
    CharacterSpec s;
    s.kind = Kind::regular;
    return s;
  }
  static CharacterSpec combination(std::vector<std::pair<Rational, CharacterSpec>> parts) {
    Rational total = 0;
    for (const auto& [w, p] : parts) {
      if (w < 0) throw CharacterError("combination weights must be >= 0");
      total += w;
    }
    if (total != 1) throw CharacterError("combination weights must sum to 1");
    CharacterSpec s;
    s.kind = Kind::combination;
    s.parts = std::move(parts);
    return s;
  }
};

template <class S>
S evaluate(const CharacterSpec& spec, const GroupElement& g,
           const std::vector<Measure<S>>& measures) {
  switch (spec.kind) {
    case CharacterSpec::Kind::alpha:
      if (spec.alpha.size() > measures.size())
        throw CharacterError("alpha refers to an unknown measure label");
      return fix_measure_product(measures, spec.alpha, g);
    case CharacterSpec::Kind::regular:
      return g.is_identity() ? S(1) : S(0);
    case CharacterSpec::Kind::combination: {
      S out = S(0);
      for (const auto& [w, p] : spec.parts)
        out += S(w.template convert_to<S>()) * evaluate(p, g, measures);
      return out;
    }
  }
  throw CharacterError("bad character spec");
}

template <>
inline Rational evaluate<Rational>(const CharacterSpec& spec, const GroupElement& g,
                                   const std::vector<Measure<Rational>>& measures) {
  switch (spec.kind) {
    case CharacterSpec::Kind::alpha:
      if (spec.alpha.size() > measures.size())
        throw CharacterError("alpha refers to an unknown measure label");
      return fix_measure_product(measures, spec.alpha, g);
    case CharacterSpec::Kind::regular:
      return g.is_identity() ? Rational(1) : Rational(0);
    case CharacterSpec::Kind::combination: {
      Rational out = 0;
      for (const auto& [w, p] : spec.parts) out += w * evaluate(p, g, measures);
      return out;
    }
  }
  throw CharacterError("bad character spec");
}

/// Max |chi(ab) - chi(ba)| over the supplied pairs.
template <class S>
S check_central(PathTable& t, const CharacterSpec& spec,
                const std::vector<std::pair<GroupElement, GroupElement>>& pairs,
                const std::vector<Measure<S>>& measures) {
  S worst = S(0);
  for (const auto& [a, b] : pairs) {
    S ab = evaluate(spec, compose(t, a, b), measures);
    S ba = evaluate(spec, compose(t, b, a), measures);
    S diff = ab > ba ? S(ab - ba) : S(ba - ab);
    worst = std::max(worst, diff);
  }
  return worst;
}

/// Minimum eigenvalue of the Gram matrix {chi(g_i g_j^-1)}.
template <class S>
double check_psd(PathTable& t, const CharacterSpec& spec,
                 const std::vector<GroupElement>& elements,
                 const std::vector<Measure<S>>& measures) {
  const int m = static_cast<int>(elements.size());
  if (m > 50) throw CharacterError("check_psd is capped at 50 elements");
  Eigen::MatrixXd gram(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      GroupElement gij = compose(t, elements[static_cast<std::size_t>(i)],
                                 inverse(lift(t, elements[static_cast<std::size_t>(j)],
                                              std::max(elements[static_cast<std::size_t>(i)].level,
                                                       elements[static_cast<std::size_t>(j)].level))));
      gram(i, j) = to_double(evaluate(spec, gij, measures));
    }
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw CharacterError("Gram matrix is not symmetric (evaluate bug)");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  return solver.eigenvalues().minCoeff();
}

namespace detail {

// Coordinate measure indices of alpha, e.g. (2,1) -> {0,0,1}.
inline std::vector<std::size_t> alpha_coords(const std::vector<int>& alpha) {
  std::vector<std::size_t> coords;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    for (int e = 0; e < alpha[i]; ++e) coords.push_back(i);
  return coords;
}

}  // namespace detail

/// Exact value of (1/|H|) sum_{g in H} mu_alpha(Fix_{X^K}(g)) for a Young
/// subgroup H, via the closed form: sum over K-tuples of level-n paths of the
/// tuple's product weight times prod_v (free_v - d_v)!/free_v!, d_v = number
/// of distinct free tuple members at v.
template <class S>
S exact_average(PathTable& t, const YoungSubgroup& y, const std::vector<int>& alpha,
                const std::vector<Measure<S>>& measures, std::int64_t tuple_cap = 300) {
  const int n = y.level;
  auto coords = detail::alpha_coords(alpha);
  const std::size_t K = coords.size();
  if (K > 3) throw CharacterError("exact_average is capped at |alpha| <= 3");
  if (K == 0) return S(1);
  if (t.total_paths(n) > tuple_cap)
    throw CharacterError("exact_average tuple cap exceeded");

  std::vector<std::pair<int, int>> cells;  // (vertex, label)
  std::vector<std::vector<bool>> is_free(static_cast<std::size_t>(t.diagram().vertex_count(n)));
  for (int v = 0; v < t.diagram().vertex_count(n); ++v) {
    std::size_t hv = t.paths(n, v).size();
    is_free[static_cast<std::size_t>(v)].assign(hv, false);
    for (int f : y.free[static_cast<std::size_t>(v)])
      is_free[static_cast<std::size_t>(v)][static_cast<std::size_t>(f)] = true;
    for (int l = 0; l < static_cast<int>(hv); ++l) cells.emplace_back(v, l);
  }

  S total = S(0);
  std::vector<std::size_t> idx(K, 0);
  while (true) {
    S weight = S(1);
    for (std::size_t j = 0; j < K; ++j)
      weight *= measures.at(coords[j]).q(n, cells[idx[j]].first);
    // probability that a uniform element fixes every tuple member
    std::vector<std::pair<int, int>> distinct_free;
    for (std::size_t j = 0; j < K; ++j) {
      auto [v, l] = cells[idx[j]];
      if (is_free[static_cast<std::size_t>(v)][static_cast<std::size_t>(l)] &&
          std::find(distinct_free.begin(), distinct_free.end(), cells[idx[j]]) ==
              distinct_free.end())
        distinct_free.push_back(cells[idx[j]]);
    }
    std::vector<int> d(is_free.size(), 0);
    for (auto [v, l] : distinct_free) ++d[static_cast<std::size_t>(v)];
    S prob = S(1);
    for (std::size_t v = 0; v < d.size(); ++v)
      for (int q = 0; q < d[v]; ++q)
        prob /= S(static_cast<int>(y.free[v].size()) - q);
    total += weight * prob;

    std::size_t j = 0;
    for (; j < K; ++j) {
      if (++idx[j] < cells.size()) break;
      idx[j] = 0;
    }
    if (j == K) break;
  }
  return total;
}

/// Independent oracle for exact_average: averages mu_alpha(Fix) over every
/// element of the Young subgroup by full enumeration.
template <class S>
S brute_force_average(PathTable& t, const YoungSubgroup& y, const std::vector<int>& alpha,
                      const std::vector<Measure<S>>& measures,
                      std::int64_t order_cap = 100000) {
  if (y.order() > order_cap) throw CharacterError("brute_force_average order cap exceeded");
  const int n = y.level;
  // all permutations per vertex (as image vectors over the free labels)
  std::vector<std::vector<std::vector<int>>> per_vertex;
  for (const auto& f : y.free) {
    std::vector<std::vector<int>> perms;
    std::vector<int> images = f;
    std::sort(images.begin(), images.end());
    do {
      perms.push_back(images);
    } while (std::next_permutation(images.begin(), images.end()));
    per_vertex.push_back(std::move(perms));
  }
  std::vector<std::size_t> pick(per_vertex.size(), 0);
  S total = S(0);
  BigInt count = 0;
  while (true) {
    GroupElement g = GroupElement::identity(t, n);
    for (std::size_t v = 0; v < per_vertex.size(); ++v)
      for (std::size_t i = 0; i < y.free[v].size(); ++i)
        g.perms[v][static_cast<std::size_t>(y.free[v][i])] = per_vertex[v][pick[v]][i];
    total += fix_measure_product(measures, alpha, g);
    ++count;
    std::size_t v = 0;
    for (; v < pick.size(); ++v) {
      if (++pick[v] < per_vertex[v].size()) break;
      pick[v] = 0;
    }
    if (v == pick.size()) break;
  }
  return total / S(count.convert_to<long>());
}

struct MonteCarloResult {
  double estimate = 0;
  double std_err = 0;
  std::int64_t samples = 0;
};

/// Sample mean of mu_alpha(Fix(g)) over uniform elements of the subgroup,
/// split deterministically across workers (merge by sums).
template <class S>
MonteCarloResult monte_carlo_average(PathTable& t, const YoungSubgroup& y,
                                     const std::vector<int>& alpha,
                                     const std::vector<Measure<S>>& measures,
                                     std::int64_t samples, std::uint64_t seed,
                                     int workers = 1) {
  if (samples < 1) throw CharacterError("need at least one sample");
  double sum = 0, sum_sq = 0;
  for (int w = 0; w < workers; ++w) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(w));
    std::int64_t quota = samples / workers + (w < samples % workers ? 1 : 0);
    for (std::int64_t i = 0; i < quota; ++i) {
      GroupElement g = random_element(t, y, rng);
      double x = to_double(fix_measure_product(measures, alpha, g));
      sum += x;
      sum_sq += x * x;
    }
  }
  MonteCarloResult r;
  r.samples = samples;
  r.estimate = sum / static_cast<double>(samples);
  double var = std::max(0.0, sum_sq / static_cast<double>(samples) - r.estimate * r.estimate);
  r.std_err = std::sqrt(var / static_cast<double>(samples));
  return r;
}

template <class S>
struct ProfileRow {
  int level = 0;
  BigInt subgroup_order;
  bool exact = true;
  S value = S(0);
  double std_err = 0;  // 0 for exact rows
};

/// Pre-limit ergodic averages of mu_alpha(Fix) over G_n°(A) for a list of
/// levels; exact where the caps allow, Monte Carlo otherwise.
template <class S>
std::vector<ProfileRow<S>> average_profile(PathTable& t, const ClopenSet& a,
                                           const std::vector<int>& alpha,
                                           const std::vector<Measure<S>>& measures,
                                           const std::vector<int>& levels,
                                           std::int64_t mc_samples = 100000,
                                           std::uint64_t seed = 1, int workers = 1) {
  std::vector<ProfileRow<S>> rows;
  for (int n : levels) {
    YoungSubgroup y = pointwise_stabilizer(t, a, n);
    ProfileRow<S> row;
    row.level = n;
    row.subgroup_order = y.order();
    try {
      row.value = exact_average(t, y, alpha, measures);
      row.exact = true;
    } catch (const CharacterError&) {
      auto mc = monte_carlo_average(t, y, alpha, measures, mc_samples, seed, workers);
      row.exact = false;
      row.value = S(mc.estimate);
      row.std_err = mc.std_err;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct IepResult {
  bool pair_cover_warning = false;  // some pair of p-tuple unions covers X
  Rational lhs = 0;
  Rational rhs = 0;
  Rational residual = 0;
};

struct IepHypothesisError : CharacterError {
  using CharacterError::CharacterError;
};

/// Checks mu_alpha(U_{Cbar} (U Cbar)^K) against its inclusion-exclusion
/// expansion over the level-n cylinder partition, exactly.
inline IepResult verify_iep(PathTable& t, const std::vector<Measure<Rational>>& measures,
                            const std::vector<int>& alpha, int n, int p,
                            std::int64_t combo_cap = 10000) {
  // global cylinder list
  std::vector<std::pair<int, int>> cyl;
  for (int v = 0; v < t.diagram().vertex_count(n); ++v)
    for (int l = 0; l < static_cast<int>(t.paths(n, v).size()); ++l) cyl.emplace_back(v, l);
  const int T = static_cast<int>(cyl.size());
  if (p < 1 || p > T) throw IepHypothesisError("p out of range for the level-" +
                                               std::to_string(n) + " partition");
  if (p == T)
    throw IepHypothesisError("p = |Xi_n|: the single p-tuple union covers X");

  // p-subsets as bitmasks
  if (T > 62) throw CharacterError("partition too large for verify_iep");
  std::vector<std::uint64_t> combos;
  std::vector<int> sel(static_cast<std::size_t>(p));
  std::iota(sel.begin(), sel.end(), 0);
  while (true) {
    std::uint64_t mask = 0;
    for (int s : sel) mask |= 1ULL << s;
    combos.push_back(mask);
    if (static_cast<std::int64_t>(combos.size()) > combo_cap)
      throw CharacterError("verify_iep combination cap exceeded");
    int i = p - 1;
    while (i >= 0 && sel[static_cast<std::size_t>(i)] == T - p + i) --i;
    if (i < 0) break;
    ++sel[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < p; ++j)
      sel[static_cast<std::size_t>(j)] = sel[static_cast<std::size_t>(j) - 1] + 1;
  }
  const std::uint64_t full = T == 64 ? ~0ULL : (1ULL << T) - 1;
  IepResult res;
  for (std::size_t i = 0; i < combos.size() && !res.pair_cover_warning; ++i)
    for (std::size_t j = i; j < combos.size(); ++j)
      if ((combos[i] | combos[j]) == full) {
        res.pair_cover_warning = true;
        break;
      }

  auto coords = detail::alpha_coords(alpha);
  const std::size_t K = coords.size();

  // LHS directly: a product cylinder tuple lies in some (U Cbar)^K iff its
  // distinct cylinders number at most p.
  std::vector<std::size_t> idx(K, 0);
  if (K > 0) {
    while (true) {
      std::uint64_t used = 0;
      for (std::size_t j = 0; j < K; ++j) used |= 1ULL << idx[j];
      if (std::popcount(used) <= p) {
        Rational w = 1;
        for (std::size_t j = 0; j < K; ++j)
          w *= measures.at(coords[j]).q(n, cyl[idx[j]].first);
        res.lhs += w;
      }
      std::size_t j = 0;
      for (; j < K; ++j) {
        if (++idx[j] < static_cast<std::size_t>(T)) break;
        idx[j] = 0;
      }
      if (j == K) break;
    }
  } else {
    res.lhs = 1;  // X^0 is a singleton covered by any nonempty union
  }

  // RHS by inclusion-exclusion over nonempty J subsets of the p-subsets.
  if (combos.size() > 20) throw CharacterError("verify_iep IEP expansion too large");
  auto mu_alpha_of_mask = [&](std::uint64_t mask) {
    Rational out = 1;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (alpha[static_cast<std::size_t>(i)] == 0) continue;
      Rational m = 0;
      for (int c = 0; c < T; ++c)
        if (mask & (1ULL << c)) m += measures[i].q(n, cyl[static_cast<std::size_t>(c)].first);
      for (int e = 0; e < alpha[i]; ++e) out *= m;
    }
    return out;
  };
  for (std::uint64_t sub = 1; sub < (1ULL << combos.size()); ++sub) {
    std::uint64_t inter = full;
    for (std::size_t c = 0; c < combos.size(); ++c)
      if (sub & (1ULL << c)) inter &= combos[c];
    Rational term = mu_alpha_of_mask(inter);
    if (std::popcount(sub) % 2 == 1)
      res.rhs += term;
    else
      res.rhs -= term;
  }
  res.residual = res.lhs - res.rhs;
  if (res.residual < 0) res.residual = -res.residual;
  return res;
}

}  // namespace bratteli
