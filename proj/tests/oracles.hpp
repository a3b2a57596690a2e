// Test-side reference implementations, kept deliberately naive and
// independent of the library code paths they check.
#ifndef PROXML_TESTS_ORACLES_HPP_
#define PROXML_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace oracle {

// A dense row representation of a tiny binary problem.
struct TinyProblem {
  std::vector<std::vector<double>> rows;  // N x D dense
  std::vector<int8_t> signs;              // +-1 per row
  size_t dim() const { return rows.empty() ? 0 : rows[0].size(); }
};

inline TinyProblem random_problem(std::mt19937& rng, size_t n, size_t d, double density = 0.6) {
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TinyProblem p;
  p.rows.assign(n, std::vector<double>(d, 0.0));
  p.signs.resize(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < d; ++j)
      if (unit(rng) < density) p.rows[i][j] = value(rng);
    p.signs[i] = unit(rng) < 0.5 ? int8_t{1} : int8_t{-1};
  }
  return p;
}

// lambda*||w||_1 + sum_i max(1 - s_i <w, x_i>, 0)^2, written from the
// definition.
inline double objective(const TinyProblem& p, std::span<const double> w, double lambda) {
  double obj = 0.0;
  for (double v : w) obj += lambda * std::fabs(v);
  for (size_t i = 0; i < p.rows.size(); ++i) {
    double dot = 0.0;
    for (size_t j = 0; j < w.size(); ++j) dot += p.rows[i][j] * w[j];
    double b = 1.0 - static_cast<double>(p.signs[i]) * dot;
    if (b > 0.0) obj += b * b;
  }
  return obj;
}

inline double smooth_loss(const TinyProblem& p, std::span<const double> w) {
  return objective(p, w, 0.0);
}

// Central finite differences of the smooth squared-hinge part.
inline std::vector<double> fd_gradient(const TinyProblem& p, std::span<const double> w,
                                       double h = 1e-6) {
  std::vector<double> grad(w.size());
  std::vector<double> probe(w.begin(), w.end());
  for (size_t j = 0; j < w.size(); ++j) {
    probe[j] = w[j] + h;
    double up = smooth_loss(p, probe);
    probe[j] = w[j] - h;
    double down = smooth_loss(p, probe);
    probe[j] = w[j];
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

// Grid argmin of thr*|v| + (v - u)^2 / 2 over [lo, hi].
inline double prox_1d_grid(double u, double thr, double lo = -4.0, double hi = 4.0,
                           double step = 1e-4) {
  auto f = [&](double v) { return thr * std::fabs(v) + 0.5 * (v - u) * (v - u); };
  double best_v = 0.0, best_f = f(0.0);  // the kink is always a candidate
  for (double v = lo; v <= hi; v += step) {
    double fv = f(v);
    if (fv < best_f) {
      best_f = fv;
      best_v = v;
    }
  }
  return best_v;
}

// Same brute force, zoomed: re-grids around the winner until the pitch
// is below 1e-12. Convexity makes the zoom sound. Comparisons of nearby
// grid points use the algebraic difference
//   f(v1) - f(v2) = thr (|v1| - |v2|) + (v1 - v2)((v1 + v2)/2 - u)
// which stays accurate where direct evaluation cancels.
inline double prox_1d_refined(double u, double thr, double lo = -4.0, double hi = 4.0) {
  auto f_less = [&](double v1, double v2) {
    return thr * (std::fabs(v1) - std::fabs(v2)) + (v1 - v2) * ((v1 + v2) / 2.0 - u) < 0.0;
  };
  double step = (hi - lo) / 400.0;
  double center = prox_1d_grid(u, thr, lo, hi, step);
  while (step > 1e-13) {
    double next_step = step / 50.0;
    double best = center;
    for (double v = center - 2.0 * step; v <= center + 2.0 * step; v += next_step)
      if (f_less(v, best)) best = v;
    if (f_less(0.0, best)) best = 0.0;  // the kink is always a candidate
    center = best;
    step = next_step;
  }
  return center;
}

// Slow generic minimizer: subgradient descent with geometrically
// annealed step sizes, warm-started across phases, best iterate kept.
inline double subgradient_solve(const TinyProblem& p, double lambda, int phases = 46,
                                int iters_per_phase = 4000, double step0 = 0.5) {
  const size_t d = p.dim();
  std::vector<double> w(d, 0.0), best_w(d, 0.0), g(d);
  double best_obj = objective(p, w, lambda);
  double step = step0;
  for (int phase = 0; phase < phases; ++phase, step *= 0.66) {
    w = best_w;
    for (int t = 0; t < iters_per_phase; ++t) {
      std::fill(g.begin(), g.end(), 0.0);
      for (size_t i = 0; i < p.rows.size(); ++i) {
        double dot = 0.0;
        for (size_t j = 0; j < d; ++j) dot += p.rows[i][j] * w[j];
        double b = 1.0 - static_cast<double>(p.signs[i]) * dot;
        if (b > 0.0) {
          double coef = -2.0 * static_cast<double>(p.signs[i]) * b;
          for (size_t j = 0; j < d; ++j) g[j] += coef * p.rows[i][j];
        }
      }
      for (size_t j = 0; j < d; ++j) {
        double sub = w[j] > 0.0 ? lambda : (w[j] < 0.0 ? -lambda : 0.0);
        w[j] -= step * (g[j] + sub);
      }
      double obj = objective(p, w, lambda);
      if (obj < best_obj) {
        best_obj = obj;
        best_w = w;
      }
    }
  }
  return best_obj;
}

// Ranking-metric reference: gains computed from an explicit ranked list.
inline double ref_psp(std::span<const uint32_t> ranking, std::span<const uint32_t> truth_sorted,
                      std::span<const double> p, size_t k) {
  double gain = 0.0;
  for (size_t r = 0; r < std::min(k, ranking.size()); ++r) {
    uint32_t label = ranking[r];
    if (std::binary_search(truth_sorted.begin(), truth_sorted.end(), label))
      gain += 1.0 / p[label];
  }
  return gain / static_cast<double>(k);
}

inline double ref_psndcg(std::span<const uint32_t> ranking, std::span<const uint32_t> truth_sorted,
                         std::span<const double> p, size_t k) {
  if (truth_sorted.empty()) return 0.0;
  double dcg = 0.0;
  for (size_t r = 0; r < std::min(k, ranking.size()); ++r) {
    uint32_t label = ranking[r];
    if (std::binary_search(truth_sorted.begin(), truth_sorted.end(), label))
      dcg += 1.0 / (p[label] * std::log2(static_cast<double>(r + 1) + 1.0));
  }
  double norm = 0.0;
  for (size_t r = 1; r <= std::min(k, truth_sorted.size()); ++r)
    norm += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  return dcg / norm;
}

// Best gain over every permutation of the label universe (L <= ~6).
template <typename Gain>
double best_over_rankings(uint32_t n_labels, const Gain& gain) {
  std::vector<uint32_t> perm(n_labels);
  for (uint32_t l = 0; l < n_labels; ++l) perm[l] = l;
  double best = -1.0;
  std::sort(perm.begin(), perm.end());
  do {
    best = std::max(best, gain(perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Plain union-find, separate from the library's.
struct DisjointSet {
  std::vector<uint32_t> parent;
  explicit DisjointSet(size_t n) : parent(n) {
    for (size_t i = 0; i < n; ++i) parent[i] = static_cast<uint32_t>(i);
  }
  uint32_t find(uint32_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(uint32_t a, uint32_t b) { parent[find(a)] = find(b); }
};

}  // namespace oracle

#endif  // PROXML_TESTS_ORACLES_HPP_
