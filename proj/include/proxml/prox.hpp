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
#ifndef PROXML_PROX_HPP_
#define PROXML_PROX_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "proxml/dataset.hpp"
#include "proxml/sparse.hpp"

namespace proxml {

// Forward-backward proximal gradient for one label:
//     min_w  lambda * ||w||_1 + sum_i max(1 - s_i <w, x_i>, 0)^2
// Each iteration takes a gradient step on the smooth squared-hinge part,
// then soft-thresholds. The step size is found by backtracking from the
// previously accepted step grown by gamma_grow.

struct ProxConfig {
  double lambda = 0.1;
  int max_iters = 500;
  double tol = 1e-5;          // relative objective decrease
  double gamma_init = 1.0;
  double gamma_shrink = 0.5;  // backtracking factor, in (0,1)
  double gamma_grow = 2.0;    // optimistic per-iteration growth, >= 1

  void validate() const;
};

struct SolveResult {
  SparseVector w;       // exact zeros dropped
  double objective = 0.0;
  int iters = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // objective(w_0), objective(w_1), ...
};

// loss = sum over {i : b_i > 0} of b_i^2 with b_i = 1 - s_i <w, x_i>.
// When `active` is non-null it receives the indices of that set.
double squared_hinge_loss(std::span<const double> w, const CsrMatrix& x, std::span<const int8_t> s,
                          std::vector<uint32_t>* active = nullptr);

// grad = -2 * sum over active i of s_i * x_i * b_i.
void squared_hinge_grad(std::span<const double> w, const CsrMatrix& x, std::span<const int8_t> s,
                        std::span<double> grad);

// Per coordinate: argmin_v threshold*|v| + (v - u)^2 / 2, i.e.
// sign(u) * max(|u| - threshold, 0).
void soft_threshold(std::span<const double> u, double threshold, std::span<double> out);
double soft_threshold(double u, double threshold);

struct LineSearchResult {
  double gamma = 0.0;
  std::vector<double> candidate;      // prox-mapped iterate at the accepted step
  std::vector<double> candidate_margins;
  double candidate_loss = 0.0;
};

// Backtracks gamma from gamma_start by the shrink factor until the
// majorization condition
//   L(w') <= L(w) + <grad, w' - w> + ||w' - w||^2 / (2 gamma)
// holds for the candidate w' = soft_threshold(w - gamma grad, lambda gamma).
// Throws NumericalError if gamma underflows below 1e-12.
LineSearchResult line_search(std::span<const double> w, std::span<const double> grad, double loss,
                             const CsrMatrix& x, std::span<const int8_t> s, double lambda,
                             double gamma_start, double shrink);

SolveResult solve_prox(const CsrMatrix& x, std::span<const int8_t> s, const ProxConfig& config);
SolveResult solve_prox(const Dataset& data, std::span<const int8_t> s, const ProxConfig& config);

}  // namespace proxml

#endif  // PROXML_PROX_HPP_
