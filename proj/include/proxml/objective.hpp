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
#ifndef PROXML_OBJECTIVE_HPP_
#define PROXML_OBJECTIVE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "proxml/dataset.hpp"
#include "proxml/sparse.hpp"

namespace proxml {

// Shared evaluator for the per-label objective
//     f(w) = lambda * ||w||_1 + sum_i max(1 - s_i <w, x_i>, 0)^2.
// Both solvers report objectives through this path so that their results
// are directly comparable.

// margins[i] = 1 - s_i <w, x_i>
void compute_margins(std::span<const double> w, const CsrMatrix& x, std::span<const int8_t> s,
                     std::span<double> margins);

double squared_hinge_from_margins(std::span<const double> margins);

double l1_norm(std::span<const double> w);

double eval_objective(std::span<const double> w, const CsrMatrix& x, std::span<const int8_t> s,
                      double lambda);

double eval_objective(const SparseVector& w, const Dataset& data, std::span<const int8_t> s,
                      double lambda);

}  // namespace proxml

#endif  // PROXML_OBJECTIVE_HPP_
