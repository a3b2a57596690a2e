/*
 * Copyright 2026 The proxml authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "proxml/labelgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

#include "proxml/errors.hpp"

namespace proxml {

namespace {

struct UnionFind {
  std::vector<uint32_t> parent;
  explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  uint32_t find(uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(uint32_t a, uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

LabelGraph graph_from_edges(uint32_t n_vertices,
                            std::vector<std::pair<uint64_t, double>> edges) {
  // Deterministic CSR layout: sorted (lo, hi) keys.
  std::sort(edges.begin(), edges.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  LabelGraph g;
  g.n_vertices = n_vertices;
  std::vector<size_t> counts(n_vertices, 0);
  for (const auto& [key, w] : edges) {
    counts[static_cast<uint32_t>(key >> 32)]++;
    counts[static_cast<uint32_t>(key)]++;
  }
  g.offsets.assign(n_vertices + 1, 0);
  for (uint32_t v = 0; v < n_vertices; ++v) g.offsets[v + 1] = g.offsets[v] + counts[v];
  g.neighbors.resize(g.offsets.back());
  g.weights.resize(g.offsets.back());
  std::vector<size_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
  for (const auto& [key, w] : edges) {
    uint32_t lo = static_cast<uint32_t>(key >> 32);
    uint32_t hi = static_cast<uint32_t>(key);
    g.neighbors[cursor[lo]] = hi;
    g.weights[cursor[lo]++] = w;
    g.neighbors[cursor[hi]] = lo;
    g.weights[cursor[hi]++] = w;
  }
  g.degrees.assign(n_vertices, 0.0);
  for (uint32_t v = 0; v < n_vertices; ++v)
    for (size_t k = g.offsets[v]; k < g.offsets[v + 1]; ++k) g.degrees[v] += g.weights[k];
  for (uint32_t v = 0; v < n_vertices; ++v)
    if (g.degrees[v] == 0.0) g.isolated.push_back(v);
  return g;
}

}  // namespace

LabelGraph build_graph(const Dataset& data, size_t pair_warn_budget) {
  std::unordered_map<uint64_t, double> acc;
  for (size_t i = 0; i < data.n_instances(); ++i) {
    const auto& row_labels = data.labels[i];
    size_t n = row_labels.size();
    size_t pairs = n * (n - 1) / 2;
    if (pairs > pair_warn_budget) {
      std::fprintf(stderr,
                   "proxml: instance %zu has %zu labels (%zu co-occurrence pairs), counting "
                   "exactly but memory use grows quadratically\n",
                   i, n, pairs);
    }
    for (size_t a = 0; a < n; ++a) {
      for (size_t b = a + 1; b < n; ++b) {
        uint64_t key = (static_cast<uint64_t>(row_labels[a]) << 32) | row_labels[b];
        acc[key] += 1.0;
      }
    }
  }
  std::vector<std::pair<uint64_t, double>> edges(acc.begin(), acc.end());
  return graph_from_edges(data.n_labels, std::move(edges));
}

void normalized_laplacian_apply(const LabelGraph& g, std::span<const double> v,
                                std::span<double> out) {
  for (uint32_t u = 0; u < g.n_vertices; ++u) {
    if (g.degrees[u] == 0.0) {
      out[u] = 0.0;
      continue;
    }
    double acc = v[u];
    double inv_sqrt_du = 1.0 / std::sqrt(g.degrees[u]);
    for (size_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
      uint32_t nbr = g.neighbors[k];
      acc -= g.weights[k] * inv_sqrt_du / std::sqrt(g.degrees[nbr]) * v[nbr];
    }
    out[u] = acc;
  }
}

uint32_t count_components(const LabelGraph& g) {
  UnionFind uf(g.n_vertices);
  for (uint32_t u = 0; u < g.n_vertices; ++u)
    for (size_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) uf.unite(u, g.neighbors[k]);
  uint32_t components = 0;
  for (uint32_t u = 0; u < g.n_vertices; ++u)
    if (g.degrees[u] > 0.0 && uf.find(u) == u) ++components;
  return components;
}

LabelGraph largest_component_subgraph(const LabelGraph& g) {
  UnionFind uf(g.n_vertices);
  for (uint32_t u = 0; u < g.n_vertices; ++u)
    for (size_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) uf.unite(u, g.neighbors[k]);

  std::unordered_map<uint32_t, uint32_t> component_size;
  for (uint32_t u = 0; u < g.n_vertices; ++u)
    if (g.degrees[u] > 0.0) component_size[uf.find(u)]++;
  uint32_t best_root = 0, best_size = 0;
  for (const auto& [root, size] : component_size) {
    if (size > best_size || (size == best_size && root < best_root)) {
      best_root = root;
      best_size = size;
    }
  }

  std::vector<uint32_t> remap(g.n_vertices, UINT32_MAX);
  uint32_t next = 0;
  for (uint32_t u = 0; u < g.n_vertices; ++u)
    if (g.degrees[u] > 0.0 && uf.find(u) == best_root) remap[u] = next++;

  std::vector<std::pair<uint64_t, double>> edges;
  for (uint32_t u = 0; u < g.n_vertices; ++u) {
    if (remap[u] == UINT32_MAX) continue;
    for (size_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k) {
      uint32_t nbr = g.neighbors[k];
      if (u < nbr)
        edges.push_back({(static_cast<uint64_t>(remap[u]) << 32) | remap[nbr], g.weights[k]});
    }
  }
  return graph_from_edges(next, std::move(edges));
}

SpectralResult algebraic_connectivity(const LabelGraph& g, double tol, int max_iters) {
  // Compact the non-isolated subgraph for the iteration.
  std::vector<uint32_t> active;
  std::vector<uint32_t> remap(g.n_vertices, UINT32_MAX);
  for (uint32_t u = 0; u < g.n_vertices; ++u) {
    if (g.degrees[u] > 0.0) {
      remap[u] = static_cast<uint32_t>(active.size());
      active.push_back(u);
    }
  }
  const size_t m = active.size();
  if (m < 2) throw DataError("algebraic connectivity needs at least two non-isolated labels");
  if (max_iters <= 0) max_iters = static_cast<int>(10 * g.n_vertices);

  std::vector<size_t> offsets(m + 1, 0);
  for (size_t i = 0; i < m; ++i)
    offsets[i + 1] = offsets[i] + (g.offsets[active[i] + 1] - g.offsets[active[i]]);
  std::vector<uint32_t> neighbors(offsets.back());
  std::vector<double> norm_weights(offsets.back());  // a / sqrt(d_u d_v)
  for (size_t i = 0; i < m; ++i) {
    uint32_t u = active[i];
    double inv_sqrt_du = 1.0 / std::sqrt(g.degrees[u]);
    size_t dst = offsets[i];
    for (size_t k = g.offsets[u]; k < g.offsets[u + 1]; ++k, ++dst) {
      neighbors[dst] = remap[g.neighbors[k]];
      norm_weights[dst] = g.weights[k] * inv_sqrt_du / std::sqrt(g.degrees[g.neighbors[k]]);
    }
  }

  // Known null direction of L: phi ~ sqrt(degree).
  std::vector<double> phi(m);
  double phi_norm_sq = 0.0;
  for (size_t i = 0; i < m; ++i) {
    phi[i] = std::sqrt(g.degrees[active[i]]);
    phi_norm_sq += phi[i] * phi[i];
  }
  double inv_phi_norm = 1.0 / std::sqrt(phi_norm_sq);
  for (auto& x : phi) x *= inv_phi_norm;

  auto apply_shifted = [&](std::span<const double> v, std::span<double> out) {
    // out = (2I - L) v = v + D^{-1/2} A D^{-1/2} v
    for (size_t i = 0; i < m; ++i) {
      double acc = v[i];
      for (size_t k = offsets[i]; k < offsets[i + 1]; ++k) acc += norm_weights[k] * v[neighbors[k]];
      out[i] = acc;
    }
  };

  SpectralResult result;
  result.n_isolated = static_cast<uint32_t>(g.isolated.size());
  result.component_count = count_components(g);
  result.residual = std::numeric_limits<double>::infinity();

  std::vector<double> v(m), y(m);
  int iterations_used = 0;
  for (uint32_t attempt = 0; attempt < 2 && !result.converged; ++attempt) {
    std::mt19937 rng(12345 + 777 * attempt);
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    for (auto& x : v) x = unit(rng);
    double dot_phi = std::inner_product(v.begin(), v.end(), phi.begin(), 0.0);
    double norm_sq = 0.0;
    for (size_t i = 0; i < m; ++i) {
      v[i] -= dot_phi * phi[i];
      norm_sq += v[i] * v[i];
    }
    double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& x : v) x *= inv;

    for (int t = 0; t < max_iters; ++t) {
      ++iterations_used;
      apply_shifted(v, y);
      double mu = std::inner_product(v.begin(), v.end(), y.begin(), 0.0);
      double res_sq = 0.0;
      for (size_t i = 0; i < m; ++i) {
        double r = y[i] - mu * v[i];
        res_sq += r * r;
      }
      double lambda = 2.0 - mu;
      double residual = std::sqrt(res_sq);
      if (residual < result.residual) {
        result.residual = residual;
        result.lambda2 = lambda;
      }
      if (residual <= tol * std::max(1.0, std::fabs(lambda))) {
        result.converged = true;
        break;
      }
      double y_dot_phi = std::inner_product(y.begin(), y.end(), phi.begin(), 0.0);
      double y_norm_sq = 0.0;
      for (size_t i = 0; i < m; ++i) {
        y[i] -= y_dot_phi * phi[i];
        y_norm_sq += y[i] * y[i];
      }
      if (y_norm_sq <= 0.0) break;  // operator annihilated v; restart
      double scale = 1.0 / std::sqrt(y_norm_sq);
      for (size_t i = 0; i < m; ++i) v[i] = y[i] * scale;
    }
  }
  result.iterations = iterations_used;
  // The Rayleigh quotient lies in [0, 2] exactly; trim rounding residue.
  result.lambda2 = std::min(2.0, std::max(0.0, result.lambda2));
  return result;
}

}  // namespace proxml
