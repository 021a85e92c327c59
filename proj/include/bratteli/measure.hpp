#pragma once

#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bratteli/diagram.hpp"
#include "bratteli/paths.hpp"
#include "bratteli/rng.hpp"

namespace bratteli {

struct MeasureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A G-invariant measure stored as per-level cylinder weights q_v^{(n)}:
/// the measure of any single cylinder into vertex v at level n. S is
/// Rational (exact mode) or double (float mode).
template <class S>
struct Measure {
  const BratteliDiagram* diagram = nullptr;
  int depth = 0;
  std::vector<std::vector<S>> levels;  // levels[n-1][v] = q_v^{(n)}
  int label = 0;                       // ergodic index when solver-produced

  const S& q(int n, int v) const {
    if (n < 1 || n > depth) throw MeasureError("measure depth exceeded");
    return levels[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(v)];
  }

  S cylinder(const FinitePath& p) const { return q(p.level, p.end_vertex()); }

  /// Max violation of compatibility + normalization over stored levels.
  double invariant_residual() const {
    double worst = 0;
    for (int n = 1; n <= depth; ++n) {
      S total = S(0);
      auto h = diagram->path_counts(n);
      for (int v = 0; v < static_cast<int>(levels[n - 1].size()); ++v)
        total += S(h[static_cast<std::size_t>(v)].template convert_to<double>()) * q(n, v);
      worst = std::max(worst, std::abs(to_double(total) - 1.0));
      if (n < depth) {
        IntMatrix f = diagram->matrix(n);
        for (std::size_t w = 0; w < levels[n - 1].size(); ++w) {
          S s = S(0);
          for (std::size_t v = 0; v < levels[n].size(); ++v)
            s += S(static_cast<double>(f[v][w])) * levels[n][v];
          worst = std::max(worst, std::abs(to_double(s) - to_double(levels[n - 1][w])));
        }
      }
    }
    return worst;
  }
};

// Rational needs an exact residual; specialize the two numeric spots.
template <>
inline double Measure<Rational>::invariant_residual() const {
  Rational worst = 0;
  auto absr = [](Rational x) { return x < 0 ? Rational(-x) : x; };
  for (int n = 1; n <= depth; ++n) {
    Rational total = 0;
    auto h = diagram->path_counts(n);
    for (std::size_t v = 0; v < levels[n - 1].size(); ++v)
      total += Rational(h[v]) * levels[n - 1][v];
    worst = std::max(worst, absr(total - 1));
    if (n < depth) {
      IntMatrix f = diagram->matrix(n);
      for (std::size_t w = 0; w < levels[n - 1].size(); ++w) {
        Rational s = 0;
        for (std::size_t v = 0; v < levels[n].size(); ++v)
          s += Rational(f[v][w]) * levels[n][v];
        worst = std::max(worst, absr(s - levels[n - 1][w]));
      }
    }
  }
  return to_double(worst);
}

namespace detail {

// Kernel vector of (M - lambda I) over the rationals, entries normalized to be
// nonnegative if possible; M is square.
inline std::optional<std::vector<Rational>> kernel_vector(
    std::vector<std::vector<Rational>> m) {
  const std::size_t n = m.size();
  std::vector<int> pivot_col(n, -1);
  std::size_t rank = 0;
  for (std::size_t col = 0; col < n && rank < n; ++col) {
    std::size_t piv = rank;
    while (piv < n && m[piv][col] == 0) ++piv;
    if (piv == n) continue;
    std::swap(m[rank], m[piv]);
    Rational d = m[rank][col];
    for (auto& x : m[rank]) x /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == rank || m[r][col] == 0) continue;
      Rational factor = m[r][col];
      for (std::size_t c = 0; c < n; ++c) m[r][c] -= factor * m[rank][c];
    }
    pivot_col[rank] = static_cast<int>(col);
    ++rank;
  }
  if (rank == n) return std::nullopt;
  // free column: first column that is not a pivot
  std::vector<bool> is_pivot(n, false);
  for (std::size_t r = 0; r < rank; ++r) is_pivot[static_cast<std::size_t>(pivot_col[r])] = true;
  std::size_t free_col = 0;
  while (is_pivot[free_col]) ++free_col;
  std::vector<Rational> xi(n, Rational(0));
  xi[free_col] = 1;
  for (std::size_t r = 0; r < rank; ++r)
    xi[static_cast<std::size_t>(pivot_col[r])] = -m[r][free_col];
  bool all_nonneg = true, all_nonpos = true;
  for (const auto& x : xi) {
    all_nonneg &= x >= 0;
    all_nonpos &= x <= 0;
  }
  if (all_nonpos)
    for (auto& x : xi) x = -x;
  else if (!all_nonneg)
    return std::nullopt;
  return xi;
}

}  // namespace detail

inline bool is_primitive(const IntMatrix& a, int power_bound = 64) {
  if (a.size() != a[0].size()) return false;
  BigMatrix p(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) p[i].assign(a[i].begin(), a[i].end());
  for (int k = 1; k <= power_bound; ++k) {
    bool positive = true;
    for (const auto& row : p)
      for (const auto& e : row) positive &= e > 0;
    if (positive) return true;
    BigMatrix next(p.size(), std::vector<BigInt>(p.size(), BigInt(0)));
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t k2 = 0; k2 < p.size(); ++k2)
        for (std::size_t j = 0; j < p.size(); ++j) next[i][j] += p[i][k2] * a[k2][j];
    p = std::move(next);
  }
  return false;
}

/// Exact invariant measure for a stationary diagram whose Perron root is an
/// integer (odometers, all-ones blocks): q^{(n)} solves q^{(n)} = F_n^T q^{(n+1)}
/// through the stored prefix with Perron data lambda, xi on the stationary tail.
inline std::optional<Measure<Rational>> exact_stationary_measure(
    const BratteliDiagram& d, int depth) {
  if (d.continuation() != Continuation::stationary) return std::nullopt;
  const IntMatrix a = d.matrix(d.stored_levels() > 1 ? d.stored_levels() - 1 : 1);
  const std::size_t k = a.size();
  if (a[0].size() != k) return std::nullopt;
  long bound = 0;
  for (std::size_t c = 0; c < k; ++c) {
    long col = 0;
    for (std::size_t r = 0; r < k; ++r) col += a[r][c];
    bound = std::max(bound, col);
  }
  // Perron root <= max column sum of A = max row sum of A^T; integer roots only.
  for (long lam = bound; lam >= 1; --lam) {
    std::vector<std::vector<Rational>> m(k, std::vector<Rational>(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        m[i][j] = Rational(a[j][i]) - (i == j ? Rational(lam) : Rational(0));
    auto xi = detail::kernel_vector(m);
    if (!xi) continue;
    Measure<Rational> mu;
    mu.diagram = &d;
    mu.depth = depth;
    mu.levels.resize(static_cast<std::size_t>(depth));
    // top level from Perron data, then push down through the stored prefix
    std::vector<Rational> q = *xi;
    Rational scale = Rational(1);
    for (int n = depth; n >= 1; --n) {
      mu.levels[static_cast<std::size_t>(n) - 1] = q;
      if (n > 1) {
        IntMatrix f = d.matrix(n - 1);
        std::vector<Rational> down(f[0].size(), Rational(0));
        for (std::size_t w = 0; w < down.size(); ++w)
          for (std::size_t v = 0; v < f.size(); ++v)
            down[w] += Rational(f[v][w]) * q[v];
        q = std::move(down);
      }
    }
    Rational total = 0;
    auto h = d.path_counts(1);
    for (std::size_t v = 0; v < mu.levels[0].size(); ++v)
      total += Rational(h[v]) * mu.levels[0][v];
    if (total == 0) continue;
    scale = Rational(1) / total;
    for (auto& lvl : mu.levels)
      for (auto& x : lvl) x *= scale;
    if (mu.invariant_residual() != 0) continue;
    return mu;
  }
  return std::nullopt;
}

/// Float-mode stationary measure via power iteration on A^T.
inline Measure<double> stationary_measure(const BratteliDiagram& d, int depth,
                                          double residual_tol = 1e-12,
                                          int max_iters = 100000) {
  if (d.continuation() != Continuation::stationary)
    throw MeasureError("stationary_measure requires a stationary diagram");
  const IntMatrix a = d.matrix(std::max(1, d.stored_levels() - 1));
  if (!is_primitive(a))
    throw MeasureError("stationary matrix is not primitive (no power is strictly positive)");
  const std::size_t k = a.size();
  std::vector<double> xi(k, 1.0 / static_cast<double>(k));
  double lambda = 0;
  double residual = 1;
  for (int it = 0; it < max_iters && residual > residual_tol; ++it) {
    std::vector<double> next(k, 0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        next[i] += static_cast<double>(a[j][i]) * xi[j];
    double norm = 0;
    for (double x : next) norm += x;
    for (double& x : next) x /= norm;
    lambda = norm;
    residual = 0;
    for (std::size_t i = 0; i < k; ++i) residual = std::max(residual, std::abs(next[i] - xi[i]));
    xi = std::move(next);
  }
  // residual of the eigen equation itself
  double eig_res = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < k; ++j) s += static_cast<double>(a[j][i]) * xi[j];
    eig_res = std::max(eig_res, std::abs(s - lambda * xi[i]));
  }
  if (eig_res > residual_tol * std::max(1.0, lambda))
    throw MeasureError("power iteration did not converge");
  Measure<double> mu;
  mu.diagram = &d;
  mu.depth = depth;
  mu.levels.resize(static_cast<std::size_t>(depth));
  std::vector<double> q = xi;
  for (int n = depth; n >= 1; --n) {
    mu.levels[static_cast<std::size_t>(n) - 1] = q;
    if (n > 1) {
      IntMatrix f = d.matrix(n - 1);
      std::vector<double> down(f[0].size(), 0);
      for (std::size_t w = 0; w < down.size(); ++w)
        for (std::size_t v = 0; v < f.size(); ++v)
          down[w] += static_cast<double>(f[v][w]) * q[v];
      q = std::move(down);
    }
  }
  double total = 0;
  auto h = d.path_counts(1);
  for (std::size_t v = 0; v < mu.levels[0].size(); ++v)
    total += h[v].convert_to<double>() * mu.levels[0][v];
  for (auto& lvl : mu.levels)
    for (auto& x : lvl) x /= total;
  return mu;
}

struct ErgodicSetDiagnostics {
  int cluster_count = 0;
  double max_intra_spread = 0;    // within-cluster l_inf spread
  double inter_depth_spread = 0;  // depth M vs M-1 representatives
  bool converged = true;
};

struct ErgodicSetResult {
  std::vector<Measure<double>> measures;
  ErgodicSetDiagnostics diagnostics;
};

namespace detail {

inline std::vector<std::vector<double>> candidate_vectors(const BratteliDiagram& d,
                                                          int depth, int store_levels) {
  auto h = d.path_counts(depth);
  std::vector<std::vector<double>> out;
  for (int w = 0; w < d.vertex_count(depth); ++w) {
    std::vector<double> concat;
    for (int n = 1; n <= store_levels; ++n) {
      BigMatrix t = d.telescope(n, depth);
      for (std::size_t u = 0; u < t[static_cast<std::size_t>(w)].size(); ++u)
        concat.push_back(
            Rational(t[static_cast<std::size_t>(w)][u], h[static_cast<std::size_t>(w)])
                .convert_to<double>());
    }
    out.push_back(std::move(concat));
  }
  return out;
}

inline double linf(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace detail

/// Estimates the ergodic measures by pushing Dirac weights at depth-M vertices
/// down to levels 1..store_levels and clustering the resulting q-vectors.
/// The count is an estimate with stability diagnostics, not a certificate.
inline ErgodicSetResult approximate_ergodic_set(const BratteliDiagram& d, int depth,
                                                double epsilon, int store_levels = 0) {
  if (depth < 3) throw MeasureError("approximate_ergodic_set requires depth >= 3");
  if (store_levels <= 0) store_levels = std::min(depth - 1, 6);

  auto cluster = [&](const std::vector<std::vector<double>>& cands,
                     double* intra) {
    std::vector<std::vector<double>> reps;
    std::vector<std::vector<int>> members;
    *intra = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      bool placed = false;
      for (std::size_t c = 0; c < reps.size(); ++c) {
        double dist = detail::linf(cands[i], reps[c]);
        if (dist <= epsilon) {
          members[c].push_back(static_cast<int>(i));
          *intra = std::max(*intra, dist);
          placed = true;
          break;
        }
      }
      if (!placed) {
        reps.push_back(cands[i]);
        members.push_back({static_cast<int>(i)});
      }
    }
    return reps;
  };

  auto cands = detail::candidate_vectors(d, depth, store_levels);
  auto cands_prev = detail::candidate_vectors(d, depth - 1, store_levels);
  double intra = 0, intra_prev = 0;
  auto reps = cluster(cands, &intra);
  auto reps_prev = cluster(cands_prev, &intra_prev);

  ErgodicSetDiagnostics diag;
  diag.cluster_count = static_cast<int>(reps.size());
  diag.max_intra_spread = intra;
  double inter = 0;
  for (const auto& r : reps) {
    double best = 1e300;
    for (const auto& rp : reps_prev) best = std::min(best, detail::linf(r, rp));
    inter = std::max(inter, best);
  }
  diag.inter_depth_spread = inter;
  diag.converged = reps.size() == reps_prev.size();

  ErgodicSetResult result;
  result.diagnostics = diag;
  for (std::size_t c = 0; c < reps.size(); ++c) {
    Measure<double> mu;
    mu.diagram = &d;
    mu.depth = store_levels;
    mu.label = static_cast<int>(c);
    std::size_t pos = 0;
    for (int n = 1; n <= store_levels; ++n) {
      std::size_t k = static_cast<std::size_t>(d.vertex_count(n));
      mu.levels.push_back(std::vector<double>(reps[c].begin() + static_cast<long>(pos),
                                              reps[c].begin() + static_cast<long>(pos + k)));
      pos += k;
    }
    result.measures.push_back(std::move(mu));
  }
  return result;
}

/// Samples a depth-m path with cylinder distribution mu, edge by edge using
/// the conditional weights q^{(n+1)}/q^{(n)}.
template <class S>
FinitePath sample_path(const Measure<S>& mu, int m, Rng& rng) {
  if (m > mu.depth) throw MeasureError("sample depth exceeds measure depth");
  const BratteliDiagram& d = *mu.diagram;
  FinitePath p;
  p.level = 0;
  int at = -1;  // root
  for (int n = 1; n <= m; ++n) {
    std::vector<double> weights;
    std::vector<std::pair<int, int>> choices;  // (vertex, edge)
    if (n == 1) {
      for (int v = 0; v < d.vertex_count(1); ++v) {
        double qv = to_double(mu.q(1, v));
        for (long e = 0; e < d.root_edges()[static_cast<std::size_t>(v)]; ++e) {
          weights.push_back(qv);
          choices.emplace_back(v, static_cast<int>(e));
        }
      }
    } else {
      IntMatrix f = d.matrix(n - 1);
      for (std::size_t v = 0; v < f.size(); ++v) {
        double qv = to_double(mu.q(n, static_cast<int>(v)));
        for (long e = 0; e < f[v][static_cast<std::size_t>(at)]; ++e) {
          weights.push_back(qv);
          choices.emplace_back(static_cast<int>(v), static_cast<int>(e));
        }
      }
    }
    double total = 0;
    for (double w : weights) total += w;
    if (total <= 0) throw MeasureError("zero conditional mass while sampling");
    double u = rng.next_unit() * total;
    std::size_t pick = 0;
    double acc = 0;
    for (; pick + 1 < weights.size(); ++pick) {
      acc += weights[pick];
      if (u < acc) break;
    }
    p = p.extended(choices[pick].second, choices[pick].first);
    at = choices[pick].first;
  }
  return p;
}

}  // namespace bratteli
