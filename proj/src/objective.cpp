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
#include "proxml/objective.hpp"

#include <cmath>

namespace proxml {

void compute_margins(std::span<const double> w, const CsrMatrix& x, std::span<const int8_t> s,
                     std::span<double> margins) {
  for (uint32_t i = 0; i < x.n_rows; ++i) {
    double dot = 0.0;
    auto idx = x.row_indices(i);
    auto val = x.row_values(i);
    for (size_t k = 0; k < idx.size(); ++k) dot += val[k] * w[idx[k]];
    margins[i] = 1.0 - static_cast<double>(s[i]) * dot;
  }
}

double squared_hinge_from_margins(std::span<const double> margins) {
  double loss = 0.0;
  for (double b : margins)
    if (b > 0.0) loss += b * b;
  return loss;
}

double l1_norm(std::span<const double> w) {
  double acc = 0.0;
  for (double v : w) acc += std::fabs(v);
  return acc;
}

double eval_objective(std::span<const double> w, const CsrMatrix& x, std::span<const int8_t> s,
                      double lambda) {
  std::vector<double> margins(x.n_rows);
  compute_margins(w, x, s, margins);
  return lambda * l1_norm(w) + squared_hinge_from_margins(margins);
}

double eval_objective(const SparseVector& w, const Dataset& data, std::span<const int8_t> s,
                      double lambda) {
  double loss = 0.0;
  std::vector<double> dense(w.dim(), 0.0);
  w.to_dense(dense);
  for (size_t i = 0; i < data.n_instances(); ++i) {
    double b = 1.0 - static_cast<double>(s[i]) * data.rows[i].dot(dense);
    if (b > 0.0) loss += b * b;
  }
  return lambda * w.l1_norm() + loss;
}

}  // namespace proxml
