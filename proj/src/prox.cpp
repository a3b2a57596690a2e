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
#include "proxml/prox.hpp"

#include <algorithm>
#include <cmath>

#include "proxml/errors.hpp"
#include "proxml/objective.hpp"

namespace proxml {

namespace {
constexpr double kGammaUnderflow = 1e-12;

// Non-strict acceptance: keeps backtracking from spinning on ties that are
// pure rounding noise.
bool majorization_holds(double lhs, double rhs) {
  return lhs <= rhs + 1e-12 * std::max(1.0, std::fabs(rhs));
}
}  // namespace

void ProxConfig::validate() const {
  if (lambda < 0.0) throw NumericalError("lambda must be >= 0");
  if (max_iters <= 0) throw NumericalError("max_iters must be positive");
  if (tol <= 0.0) throw NumericalError("tol must be positive");
  if (gamma_init <= 0.0) throw NumericalError("gamma_init must be positive");
  if (gamma_shrink <= 0.0 || gamma_shrink >= 1.0)
    throw NumericalError("gamma_shrink must be in (0,1)");
  if (gamma_grow < 1.0) throw NumericalError("gamma_grow must be >= 1");
}

double squared_hinge_loss(std::span<const double> w, const CsrMatrix& x, std::span<const int8_t> s,
                          std::vector<uint32_t>* active) {
  std::vector<double> margins(x.n_rows);
  compute_margins(w, x, s, margins);
  if (active) {
    active->clear();
    for (uint32_t i = 0; i < x.n_rows; ++i)
      if (margins[i] > 0.0) active->push_back(i);
  }
  return squared_hinge_from_margins(margins);
}

namespace {
void grad_from_margins(const CsrMatrix& x, std::span<const int8_t> s,
                       std::span<const double> margins, std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  for (uint32_t i = 0; i < x.n_rows; ++i) {
    if (margins[i] <= 0.0) continue;
    double coef = -2.0 * static_cast<double>(s[i]) * margins[i];
    auto idx = x.row_indices(i);
    auto val = x.row_values(i);
    for (size_t k = 0; k < idx.size(); ++k) grad[idx[k]] += coef * val[k];
  }
}
}  // namespace

void squared_hinge_grad(std::span<const double> w, const CsrMatrix& x, std::span<const int8_t> s,
                        std::span<double> grad) {
  std::vector<double> margins(x.n_rows);
  compute_margins(w, x, s, margins);
  grad_from_margins(x, s, margins, grad);
}

double soft_threshold(double u, double threshold) {
  if (u > threshold) return u - threshold;
  if (u < -threshold) return u + threshold;
  return 0.0;
}

void soft_threshold(std::span<const double> u, double threshold, std::span<double> out) {
  for (size_t d = 0; d < u.size(); ++d) out[d] = soft_threshold(u[d], threshold);
}

LineSearchResult line_search(std::span<const double> w, std::span<const double> grad, double loss,
                             const CsrMatrix& x, std::span<const int8_t> s, double lambda,
                             double gamma_start, double shrink) {
  const size_t dim = w.size();
  LineSearchResult result;
  result.candidate.resize(dim);
  result.candidate_margins.resize(x.n_rows);

  double gamma = gamma_start;
  while (true) {
    if (gamma < kGammaUnderflow)
      throw NumericalError("line search step size underflow (gamma < 1e-12)");
    for (size_t d = 0; d < dim; ++d)
      result.candidate[d] = soft_threshold(w[d] - gamma * grad[d], lambda * gamma);
    compute_margins(result.candidate, x, s, result.candidate_margins);
    double cand_loss = squared_hinge_from_margins(result.candidate_margins);

    double linear = 0.0, dist_sq = 0.0;
    for (size_t d = 0; d < dim; ++d) {
      double delta = result.candidate[d] - w[d];
      linear += grad[d] * delta;
      dist_sq += delta * delta;
    }
    if (majorization_holds(cand_loss, loss + linear + dist_sq / (2.0 * gamma))) {
      result.gamma = gamma;
      result.candidate_loss = cand_loss;
      return result;
    }
    gamma *= shrink;
  }
}

SolveResult solve_prox(const CsrMatrix& x, std::span<const int8_t> s, const ProxConfig& config) {
  config.validate();
  const size_t dim = x.n_cols;
  const uint32_t n = x.n_rows;

  std::vector<double> w(dim, 0.0);
  std::vector<double> margins(n, 1.0);  // w = 0 puts every margin at 1
  std::vector<double> grad(dim);
  double loss = static_cast<double>(n);
  double objective = loss;  // ||0||_1 = 0

  SolveResult result;
  result.objective_trace.push_back(objective);

  double gamma_accepted = config.gamma_init;
  for (int t = 0; t < config.max_iters; ++t) {
    grad_from_margins(x, s, margins, grad);
    double gamma_start = t == 0 ? config.gamma_init : gamma_accepted * config.gamma_grow;
    auto step = line_search(w, grad, loss, x, s, config.lambda, gamma_start, config.gamma_shrink);

    gamma_accepted = step.gamma;
    w.swap(step.candidate);
    margins.swap(step.candidate_margins);
    loss = step.candidate_loss;

    double next_objective = config.lambda * l1_norm(w) + loss;
    result.objective_trace.push_back(next_objective);
    result.iters = t + 1;

    double decrease = (objective - next_objective) / std::max(objective, 1e-12);
    objective = next_objective;
    if (decrease < config.tol) {
      result.converged = true;
      break;
    }
  }

  result.objective = objective;
  result.w = SparseVector::from_dense(w);
  return result;
}

SolveResult solve_prox(const Dataset& data, std::span<const int8_t> s, const ProxConfig& config) {
  auto x = CsrMatrix::from_rows(data.rows, data.n_features);
  return solve_prox(x, s, config);
}

}  // namespace proxml
