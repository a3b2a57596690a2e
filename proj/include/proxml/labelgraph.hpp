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
#ifndef PROXML_LABELGRAPH_HPP_
#define PROXML_LABELGRAPH_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "proxml/dataset.hpp"

namespace proxml {

// Weighted label co-occurrence graph: edge weight a(l, l') counts the
// training instances carrying both labels. Symmetric, no self-loops.
struct LabelGraph {
  uint32_t n_vertices = 0;
  std::vector<size_t> offsets;     // CSR over vertices, n_vertices + 1
  std::vector<uint32_t> neighbors;
  std::vector<double> weights;     // integer co-occurrence counts
  std::vector<double> degrees;     // weighted degree per vertex
  std::vector<uint32_t> isolated;  // sorted zero-degree vertices

  size_t n_edges() const { return neighbors.size() / 2; }
};

// Exact pairwise co-occurrence accumulation. Instances whose label list
// produces more than pair_warn_budget pairs are still counted exactly but
// flagged on stderr as a memory-pressure note.
LabelGraph build_graph(const Dataset& data, size_t pair_warn_budget = 10000);

// Matrix-free product with the normalized Laplacian
//   (Lv)_l = v_l - sum_{l'} a(l,l') / sqrt(d_l d_l') v_l'   (d_l != 0)
// Rows of isolated vertices are zero. Reentrant; safe to call
// concurrently on a shared graph.
void normalized_laplacian_apply(const LabelGraph& graph, std::span<const double> v,
                                std::span<double> out);

struct SpectralResult {
  double lambda2 = 0.0;
  int iterations = 0;
  double residual = 0.0;
  uint32_t component_count = 0;  // connected components of the non-isolated subgraph
  uint32_t n_isolated = 0;
  bool converged = false;
};

// Second-smallest eigenvalue of the normalized Laplacian restricted to
// the non-isolated vertex set, by power iteration on (2I - L) with the
// known null direction D^(1/2) 1 deflated. max_iters = 0 picks
// 10 * n_active. Requires at least two non-isolated vertices.
SpectralResult algebraic_connectivity(const LabelGraph& graph, double tol = 1e-6,
                                      int max_iters = 0);

// Connected components of the non-isolated subgraph (union-find).
uint32_t count_components(const LabelGraph& graph);

// The largest connected component (by vertex count, ties to the one with
// the smallest vertex id), with vertices relabeled compactly.
LabelGraph largest_component_subgraph(const LabelGraph& graph);

}  // namespace proxml

#endif  // PROXML_LABELGRAPH_HPP_
